#pragma once

// Inequality monitors re-evaluated on recorded runs. Each check compares a
// left side against a bound; slack = bound - left side, and a violation is a
// slack below -tolerance * scale.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ipg/solver.hpp"

namespace ipg {

struct MonitorCheck {
  std::string name;
  long evaluated = 0;
  long violations = 0;
  /// Smallest slack / scale seen (+inf when nothing was evaluated).
  double worst_slack = std::numeric_limits<double>::infinity();
  double tolerance = 1e-8;
  bool skipped = false;
  std::string note;

  MonitorCheck() = default;
  MonitorCheck(std::string n, double tol) : name(std::move(n)), tolerance(tol) {}

  void add(double slack, double scale = 1.0) {
    const double rel = slack / scale;
    ++evaluated;
    worst_slack = std::min(worst_slack, rel);
    if (!(rel >= -tolerance)) ++violations;
  }
  /// Strict form: requires slack > 0.
  void add_strict(double slack, double scale = 1.0) {
    const double rel = slack / scale;
    ++evaluated;
    worst_slack = std::min(worst_slack, rel);
    if (!(rel > 0.0)) ++violations;
  }
  void skip(std::string why) {
    skipped = true;
    note = std::move(why);
  }
  bool passed() const { return violations == 0; }
};

struct MonitorReport {
  std::vector<MonitorCheck> checks;

  long violations() const {
    long v = 0;
    for (const auto& c : checks) v += c.violations;
    return v;
  }
  bool passed() const { return violations() == 0; }
  /// True when some violation exceeds the given relative slack (strict mode).
  bool exceeds(double rel_slack) const {
    for (const auto& c : checks) {
      if (c.violations > 0 && c.worst_slack < -rel_slack) return true;
    }
    return false;
  }
  const MonitorCheck* find(const std::string& name) const {
    for (const auto& c : checks) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }
  void append(const MonitorReport& other) {
    checks.insert(checks.end(), other.checks.begin(), other.checks.end());
  }
};

namespace detail {

inline double min_f_seen(double f0, const std::vector<IterationRecord>& records) {
  double best = f0;
  for (const auto& r : records) best = std::min({best, r.f, r.f_next});
  return best;
}

// Certificate gaps must stay below the roundoff the eigensolver can resolve.
inline MonitorCheck certificate_check(const std::vector<IterationRecord>& records, double rel) {
  MonitorCheck c("certificate", rel);
  for (const auto& r : records) {
    if (std::isnan(r.certificate_gap)) continue;
    c.add(-r.certificate_gap, std::max(1.0, r.input_norm));
  }
  if (c.evaluated == 0) c.skip("no certificates recorded (exact projection)");
  return c;
}

template <class F>
bool flagged_convex(const F& obj) {
  if constexpr (requires { obj.is_convex(); }) return obj.is_convex();
  return false;
}

}  // namespace detail

/// Per-iteration descent inequality
///   f(x^{k+1}) <= f(x^k) + rho (gamma1 + gamma2) |grad f(x^k)|^2 - nu |x^{k+1} - x^k|^2
/// and monotonicity of k -> f(x^k) + rho b_{k-1}, with tolerance
/// rel_slack * max(1, |f(x^0)|).
template <class Point>
MonitorReport monitor_descent(const SolveResult<Point>& run, const ConstantStepConfig& cfg,
                              double lipschitz, double rel_slack = 1e-8) {
  const double scale = std::max(1.0, std::abs(run.f0));
  const double nu = cfg.nu(lipschitz);
  const double rho = cfg.rho();
  MonitorCheck descent("descent", rel_slack);
  MonitorCheck lyapunov("lyapunov", rel_slack);
  double prev = run.f0 + rho * cfg.b(-1);
  for (const auto& r : run.records) {
    const double budget = (r.gamma.gamma1 + r.gamma.gamma2) * r.grad_norm * r.grad_norm;
    const double bound = r.f + rho * budget - nu * r.step_norm * r.step_norm;
    descent.add(bound - r.f_next, scale);
    const double next = r.f_next + rho * cfg.b(r.k);
    lyapunov.add(prev - next, scale);
    prev = next;
  }
  MonitorReport out;
  out.checks = {descent, lyapunov, detail::certificate_check(run.records, rel_slack)};
  return out;
}

template <class Point>
struct ComplexityInputs {
  /// Surrogate for f*; defaults to the smallest value seen in the run. Any
  /// value >= f* gives a weaker bound, so passing it is sound.
  std::optional<double> f_best;
  /// Minimizer for the convex and contraction checks.
  std::optional<Point> x_star;
  /// x^0; taken from the trajectory when absent.
  std::optional<Point> x0;
  double rel_slack = 1e-8;
};

/// Finite-horizon complexity checks for a constant-step run:
///   displacement: min_{k<=N} |x^{k+1} - x^k| <= sqrt(eta / nu) / sqrt(N + 1),
///                 eta = f(x^0) - f* + rho b_{-1}, for every prefix N;
///   convex:       min_{1<=k<=N} f(x^k) - f* <= (|x^0 - x*|^2 + 2 alpha rho b_{-1}) / (2 alpha N);
///   contraction:  |x^{k+1} - x*|^2 <= (1 - alpha mu) |x^k - x*|^2 when gamma1 = gamma2 = 0,
///                 evaluated while |x^k - x*| >= 1e-10.
template <Objective F>
MonitorReport monitor_complexity(const SolveResult<typename F::point_type>& run, const F& obj,
                                 const ConstantStepConfig& cfg,
                                 const ComplexityInputs<typename F::point_type>& in = {}) {
  using Point = typename F::point_type;
  MonitorReport out;
  const double f_best = in.f_best.value_or(detail::min_f_seen(run.f0, run.records));

  MonitorCheck displacement("displacement", in.rel_slack);
  if (const auto lip = obj.lipschitz()) {
    const double nu = cfg.nu(*lip);
    const double eta = std::max(0.0, run.f0 - f_best + cfg.rho() * cfg.b(-1));
    double best_step = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < run.records.size(); ++i) {
      best_step = std::min(best_step, run.records[i].step_norm);
      const double bound = std::sqrt(eta / nu) / std::sqrt(static_cast<double>(i + 1));
      displacement.add(bound - best_step, std::max(1.0, bound));
    }
  } else {
    displacement.skip("Lipschitz constant unknown");
  }
  out.checks.push_back(displacement);

  std::optional<Point> x0 = in.x0;
  if (!x0 && !run.trajectory.empty()) x0 = run.trajectory.front();

  MonitorCheck convex("convex-rate", in.rel_slack);
  if (!detail::flagged_convex(obj)) {
    convex.skip("objective not flagged convex");
  } else if (!in.x_star || !x0) {
    convex.skip("needs x* and x^0");
  } else {
    const double d0 = squared_distance(*x0, *in.x_star);
    const double scale = std::max(1.0, std::abs(run.f0));
    double best_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < run.records.size(); ++i) {
      best_gap = std::min(best_gap, run.records[i].f_next - f_best);
      const double big_n = static_cast<double>(i + 1);
      const double bound = (d0 + 2.0 * cfg.alpha * cfg.rho() * cfg.b(-1)) / (2.0 * cfg.alpha * big_n);
      convex.add(bound - best_gap, scale);
    }
  }
  out.checks.push_back(convex);

  MonitorCheck contraction("contraction", in.rel_slack);
  const auto mu = obj.strong_convexity();
  if (!mu || !(*mu > 0.0)) {
    contraction.skip("objective not flagged strongly convex");
  } else if (!in.x_star || run.trajectory.size() < run.records.size() + 1) {
    contraction.skip("needs x* and the trajectory");
  } else {
    const double factor = 1.0 - cfg.alpha * *mu;
    for (std::size_t i = 0; i < run.records.size(); ++i) {
      const auto& r = run.records[i];
      if (r.gamma.gamma1 != 0.0 || r.gamma.gamma2 != 0.0) continue;
      const double before = squared_distance(run.trajectory[i], *in.x_star);
      if (std::sqrt(before) < 1e-10) break;
      const double after = squared_distance(run.trajectory[i + 1], *in.x_star);
      contraction.add(factor - after / before);
    }
    if (contraction.evaluated == 0) contraction.skip("no iteration with gamma1 = gamma2 = 0");
  }
  out.checks.push_back(contraction);
  return out;
}

template <class Point>
struct ArmijoInputs {
  std::optional<double> lipschitz;
  std::optional<double> f_best;
  std::optional<Point> x_star;
  std::optional<Point> x0;
  bool convex = false;
  double rel_slack = 1e-8;
};

/// Checks for an Armijo run:
///   tau-min:     tau_k >= min(2 tau (1 - sigma)(1 - gamma3_bar) / (alpha_max L), 1);
///   decrease:    f(x^{k+1}) < f(x^k) and f(x^k) - f(x^{k+1}) >= -sigma tau_k <grad, d>;
///   sign:        <grad f(x^k), w^k - x^k> <= ((gamma3 - 1) / alpha_k) |w^k - x^k|^2;
///   complexity:  min_{k<N} |w^k - x^k| <= sqrt(alpha_max (f(x^0) - f*) / (sigma tau_min (1 - gamma3_bar))) / sqrt(N);
///   convex-rate: min_{k<N} f(x^k) - f* <= (|x^0 - x*|^2 + xi (f(x^0) - f*)) / (2 alpha_min tau_min N).
template <class Point>
MonitorReport monitor_armijo(const SolveResult<Point>& run, const ArmijoConfig& cfg,
                             const ArmijoInputs<Point>& in = {}) {
  MonitorReport out;
  const double f_best = in.f_best.value_or(detail::min_f_seen(run.f0, run.records));
  const double f_scale = std::max(1.0, std::abs(run.f0));
  const double eps = std::numeric_limits<double>::epsilon();

  MonitorCheck tau_min("tau-min", in.rel_slack);
  MonitorCheck complexity("armijo-complexity", in.rel_slack);
  MonitorCheck convex("armijo-convex-rate", in.rel_slack);
  if (in.lipschitz) {
    const double tmin = cfg.tau_min(*in.lipschitz);
    for (const auto& r : run.records) tau_min.add(r.tau - tmin, tmin);

    const double drop = std::max(0.0, run.f0 - f_best);
    const double c = std::sqrt(cfg.alpha_max * drop / (cfg.sigma * tmin * (1.0 - cfg.gamma3_bar)));
    double best_dir = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < run.records.size(); ++i) {
      best_dir = std::min(best_dir, run.records[i].direction_norm);
      const double bound = c / std::sqrt(static_cast<double>(i + 1));
      complexity.add(bound - best_dir, std::max(1.0, bound));
    }

    std::optional<Point> x0 = in.x0;
    if (!x0 && !run.trajectory.empty()) x0 = run.trajectory.front();
    if (!in.convex) {
      convex.skip("objective not flagged convex");
    } else if (!in.x_star || !x0) {
      convex.skip("needs x* and x^0");
    } else {
      const double d0 = squared_distance(*x0, *in.x_star);
      double best_gap = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < run.records.size(); ++i) {
        best_gap = std::min(best_gap, run.records[i].f - f_best);
        const double bound = (d0 + cfg.xi() * drop) /
                             (2.0 * cfg.alpha_min * tmin * static_cast<double>(i + 1));
        convex.add(bound - best_gap, f_scale);
      }
    }
  } else {
    tau_min.skip("Lipschitz constant unknown");
    complexity.skip("Lipschitz constant unknown");
    convex.skip("Lipschitz constant unknown");
  }

  MonitorCheck decrease("armijo-decrease", 0.0);
  MonitorCheck sufficient("sufficient-decrease", 4.0 * eps);
  MonitorCheck sign("descent-sign", in.rel_slack);
  for (const auto& r : run.records) {
    decrease.add_strict(r.f - r.f_next, f_scale);
    const double predicted = -cfg.sigma * r.tau * r.slope;
    sufficient.add((r.f - r.f_next) - predicted, std::max(1.0, std::abs(r.f)));
    const double dd = r.direction_norm * r.direction_norm;
    const double bound = ((r.gamma.gamma3 - 1.0) / r.alpha) * dd;
    // The projection is certified up to roundoff relative to |z|.
    sign.add(bound - r.slope, std::max(1.0, r.input_norm) / r.alpha + std::abs(r.slope) + std::abs(bound));
  }
  out.checks = {tau_min, decrease, sufficient, sign, complexity, convex,
                detail::certificate_check(run.records, in.rel_slack)};
  return out;
}

}  // namespace ipg
