#pragma once

// Gradient projection with feasible inexact projections: constant step size
// and Armijo search along the feasible direction.

#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ipg/errors.hpp"
#include "ipg/linalg.hpp"
#include "ipg/problems.hpp"
#include "ipg/schedules.hpp"
#include "ipg/sets.hpp"

namespace ipg {

enum class StopReason { kConverged, kStationaryGradient, kWEqualsX, kMaxIter, kError };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::kConverged: return "converged";
    case StopReason::kStationaryGradient: return "stationary-gradient";
    case StopReason::kWEqualsX: return "w-equals-x";
    case StopReason::kMaxIter: return "max-iter";
    case StopReason::kError: return "error";
  }
  return "?";
}

/// alpha = 0.9999 (1 - 2 gamma3_bar) / L
inline double constant_alpha_from_gamma(double lipschitz, double gamma3_bar) {
  if (!(lipschitz > 0.0)) throw std::invalid_argument("constant_alpha_from_gamma: L must be > 0");
  if (!(gamma3_bar >= 0.0 && gamma3_bar < 0.5)) {
    throw std::invalid_argument("constant_alpha_from_gamma: gamma3_bar must lie in [0, 1/2)");
  }
  return 0.9999 * (1.0 - 2.0 * gamma3_bar) / lipschitz;
}

struct ConstantStepConfig {
  double alpha = 0.0;
  double gamma3_bar = 0.0;
  double gamma2_cap = 0.49995;
  /// Budget schedule for gamma1 + gamma2; nullopt forces gamma1 = gamma2 = 0.
  std::optional<SummableSchedule> schedule = SummableSchedule::logarithmic(100.0);
  ToleranceFn phi = ToleranceFn::full();
  long max_iter = 10000;
  double stop_tol = 1e-4;
  bool keep_trajectory = false;
  bool check_feasibility = false;

  /// b_k of the schedule (k >= -1), zero without one.
  double b(long k) const { return schedule ? schedule->b(k) : 0.0; }
  double a(long k) const { return schedule ? schedule->a(k) : 0.0; }
  double gamma2_bar() const { return schedule ? gamma2_cap : 0.0; }

  /// nu = (1 - gamma2_bar - gamma3_bar) / alpha - L / 2
  double nu(double lipschitz) const {
    return (1.0 - gamma2_bar() - gamma3_bar) / alpha - 0.5 * lipschitz;
  }
  /// rho = alpha / (1 - 2 gamma2_bar)
  double rho() const { return alpha / (1.0 - 2.0 * gamma2_bar()); }

  void validate(std::optional<double> lipschitz) const {
    if (!(alpha > 0.0)) throw std::invalid_argument("ConstantStepConfig: alpha must be > 0");
    if (!(gamma3_bar >= 0.0 && gamma3_bar < 0.5)) {
      throw std::invalid_argument("ConstantStepConfig: gamma3_bar must lie in [0, 1/2)");
    }
    if (!(gamma2_cap >= 0.0 && gamma2_cap < 0.5)) {
      throw std::invalid_argument("ConstantStepConfig: gamma2_cap must lie in [0, 1/2)");
    }
    if (!(stop_tol >= 0.0) || max_iter < 0) throw std::invalid_argument("ConstantStepConfig: bad stopping rule");
    if (lipschitz) {
      // alpha = (1 - 2 gamma3_bar) / L still gives nu > 0, so the boundary is allowed.
      if (alpha > (1.0 - 2.0 * gamma3_bar) / *lipschitz) {
        throw std::invalid_argument("ConstantStepConfig: alpha exceeds (1 - 2 gamma3_bar) / L");
      }
      if (!(nu(*lipschitz) > 0.0)) throw std::invalid_argument("ConstantStepConfig: nu <= 0");
    }
  }
};

struct ArmijoConfig {
  enum class StepRule { kFixed, kSpectral };

  double sigma = 1e-4;
  double tau = 0.5;
  double alpha_min = 1e-10;
  double alpha_max = 1e10;
  /// Used by the fixed rule (clamped into [alpha_min, alpha_max]).
  double alpha = 1.0;
  double gamma3_bar = 0.49995;
  StepRule step_rule = StepRule::kSpectral;
  ToleranceFn phi = ToleranceFn::relative();
  int max_backtracks = 60;
  long max_iter = 1000;
  double stop_tol = 1e-4;
  bool keep_trajectory = false;
  bool check_feasibility = false;

  /// xi = 2 alpha_max / sigma
  double xi() const { return 2.0 * alpha_max / sigma; }
  /// min(2 tau (1 - sigma)(1 - gamma3_bar) / (alpha_max L), 1)
  double tau_min(double lipschitz) const {
    return std::min(2.0 * tau * (1.0 - sigma) * (1.0 - gamma3_bar) / (alpha_max * lipschitz), 1.0);
  }

  void validate() const {
    if (!(sigma > 0.0 && sigma < 1.0)) throw std::invalid_argument("ArmijoConfig: sigma in (0, 1)");
    if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("ArmijoConfig: tau in (0, 1)");
    if (!(alpha_min > 0.0 && alpha_min <= alpha_max)) {
      throw std::invalid_argument("ArmijoConfig: need 0 < alpha_min <= alpha_max");
    }
    if (!(gamma3_bar >= 0.0 && gamma3_bar < 0.5)) {
      throw std::invalid_argument("ArmijoConfig: gamma3_bar must lie in [0, 1/2)");
    }
    if (max_backtracks < 0 || max_iter < 0 || !(stop_tol >= 0.0)) {
      throw std::invalid_argument("ArmijoConfig: bad iteration limits");
    }
  }
};

/// Telemetry for one outer iteration k (x^k -> x^{k+1}).
struct IterationRecord {
  long k = 0;
  double f = 0.0;          // f(x^k)
  double grad_norm = 0.0;  // |grad f(x^k)|
  double alpha = 0.0;
  double tau = 1.0;        // Armijo step tau_k
  int backtracks = 0;      // j_k
  ForcingParams gamma;
  int p_used = 0;
  double step_norm = 0.0;       // |x^{k+1} - x^k|
  double direction_norm = 0.0;  // |w^k - x^k|
  double slope = 0.0;           // <grad f(x^k), w^k - x^k>
  double f_next = 0.0;          // f(x^{k+1})
  double certificate_gap = std::numeric_limits<double>::quiet_NaN();
  double certificate_allowance = 0.0;  // roundoff slack granted to the certificate
  double input_norm = 0.0;             // |z^k|, the point handed to the projection
  double relative_change = 0.0;        // |x^{k+1} - x^k| / |x^k|
  bool feasible = true;
  double seconds = 0.0;
};

template <class Point>
struct SolveResult {
  Point x;
  double f = 0.0;
  double f0 = 0.0;
  long iterations = 0;
  StopReason reason = StopReason::kMaxIter;
  std::string message;
  std::vector<IterationRecord> records;
  /// x^0, x^1, ... when requested.
  std::vector<Point> trajectory;
  double seconds = 0.0;

  double mean_rank() const {
    if (records.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : records) s += r.p_used;
    return s / static_cast<double>(records.size());
  }
  int max_rank() const {
    int m = 0;
    for (const auto& r : records) m = std::max(m, r.p_used);
    return m;
  }
};

/// Stateful projection adaptor: (u, v, gamma, phi) -> feasible inexact
/// projection of v relative to u.
template <class P, class Point>
concept ProjectorFor = requires(P& proj, const Point& x, const ForcingParams& g, const ToleranceFn& phi) {
  { proj(x, x, g, phi) } -> std::same_as<InexactProjection<Point>>;
  proj.set();
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline double relative_change(double step, double base) {
  if (base > 0.0) return step / base;
  return step == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

template <class Set>
void require_feasible_start(const Set& set, const typename Set::point_type& x0) {
  if (!set.contains(x0, kDefaultFeasTol)) {
    throw std::invalid_argument("starting point is not in " + set.descriptor());
  }
}

}  // namespace detail

/// Constant step size: x^{k+1} in P_C(phi_{gamma^k}, x^k, x^k - alpha grad f(x^k)),
/// gamma^k from the schedule budget a_k / |grad f(x^k)|^2. Stops when the
/// relative change is below stop_tol on two consecutive iterations.
template <Objective F, class Projector>
  requires ProjectorFor<Projector, typename F::point_type>
SolveResult<typename F::point_type> solve_constant(const F& obj, Projector& proj,
                                                   const typename F::point_type& x0,
                                                   const ConstantStepConfig& cfg) {
  using Point = typename F::point_type;
  cfg.validate(obj.lipschitz());
  detail::require_feasible_start(proj.set(), x0);

  const auto t_start = std::chrono::steady_clock::now();
  SolveResult<Point> out;
  Point x = x0;
  double fx = obj.value(x);
  out.f0 = fx;
  if (cfg.keep_trajectory) out.trajectory.push_back(x);

  double grad0_norm = -1.0;
  double prev_rel = std::numeric_limits<double>::infinity();
  out.reason = StopReason::kMaxIter;
  for (long k = 0; k < cfg.max_iter; ++k) {
    const auto t_iter = std::chrono::steady_clock::now();
    const Point g = obj.gradient(x);
    const double gnorm = norm(g);
    if (grad0_norm < 0.0) grad0_norm = gnorm;
    if (gnorm <= 1e-14 * std::max(1.0, grad0_norm)) {
      out.reason = StopReason::kStationaryGradient;
      break;
    }
    const ForcingParams gamma = cfg.schedule
                                    ? forcing_for_iteration(gnorm * gnorm, cfg.a(k), cfg.gamma2_cap,
                                                            cfg.gamma3_bar)
                                    : ForcingParams{0.0, 0.0, cfg.gamma3_bar};
    const Point z = x - cfg.alpha * g;
    InexactProjection<Point> w;
    try {
      w = proj(x, z, gamma, cfg.phi);
    } catch (const Error& e) {
      out.reason = StopReason::kError;
      out.message = e.what();
      break;
    }
    const double step = norm(Point(w.point - x));
    const double xnorm = norm(x);
    if (gamma.gamma1 == 0.0 && gamma.gamma2 == 0.0 && step <= 1e-12 * std::max(1.0, xnorm)) {
      // x^k is its own projection: stationary.
      out.reason = StopReason::kWEqualsX;
      break;
    }

    IterationRecord rec;
    rec.k = k;
    rec.f = fx;
    rec.grad_norm = gnorm;
    rec.alpha = cfg.alpha;
    rec.gamma = gamma;
    rec.p_used = w.rank_used;
    rec.step_norm = step;
    rec.direction_norm = step;
    rec.slope = inner(g, Point(w.point - x));
    rec.certificate_gap = w.certificate_gap;
    rec.input_norm = norm(z);
    rec.certificate_allowance = kCertificateSlack * std::max(1.0, rec.input_norm);
    rec.relative_change = detail::relative_change(step, xnorm);
    if (cfg.check_feasibility) rec.feasible = proj.set().contains(w.point, kDefaultFeasTol);

    x = std::move(w.point);
    fx = obj.value(x);
    rec.f_next = fx;
    rec.seconds = detail::seconds_since(t_iter);
    out.records.push_back(rec);
    if (cfg.keep_trajectory) out.trajectory.push_back(x);
    out.iterations = k + 1;

    if (rec.relative_change <= cfg.stop_tol && prev_rel <= cfg.stop_tol) {
      out.reason = StopReason::kConverged;
      break;
    }
    prev_rel = rec.relative_change;
  }
  out.x = std::move(x);
  out.f = fx;
  out.seconds = detail::seconds_since(t_start);
  return out;
}

struct LineSearchResult {
  double tau = 1.0;
  int backtracks = 0;
  double f_new = 0.0;
};

/// Smallest j >= 0 with f(x + tau^j d) <= f(x) + sigma tau^j <grad f(x), d>,
/// given f(x) and the slope <grad f(x), d> < 0.
template <Objective F>
LineSearchResult armijo_search(const F& obj, const typename F::point_type& xk,
                               const typename F::point_type& direction, double fx, double slope,
                               double sigma, double tau, int max_backtracks) {
  using Point = typename F::point_type;
  if (!(slope < 0.0)) throw std::invalid_argument("armijo_search: direction is not a descent direction");
  double t = 1.0;
  for (int j = 0; j <= max_backtracks; ++j) {
    const double f_trial = obj.value(Point(xk + t * direction));
    if (f_trial <= fx + sigma * t * slope) return {t, j, f_trial};
    t *= tau;
  }
  std::ostringstream msg;
  msg << "armijo_search: no sufficient decrease after " << max_backtracks << " backtracks";
  throw Error(msg.str());
}

/// Convenience form computing f(x^k) and the slope along w^k - x^k.
template <Objective F>
LineSearchResult armijo_search(const F& obj, const typename F::point_type& xk,
                               const typename F::point_type& wk, double sigma, double tau,
                               int max_backtracks) {
  using Point = typename F::point_type;
  const Point d = wk - xk;
  return armijo_search(obj, xk, d, obj.value(xk), inner(obj.gradient(xk), d), sigma, tau,
                       max_backtracks);
}

/// Spectral (Barzilai-Borwein) step <S,S>/<S,Y> clamped to [alpha_min,
/// alpha_max]; alpha_max when <S,Y> <= 0.
template <class Point>
double spectral_step(const Point& s, const Point& y, double alpha_min, double alpha_max) {
  const double sy = inner(s, y);
  if (!(sy > 0.0)) return alpha_max;
  return std::min(alpha_max, std::max(alpha_min, inner(s, s) / sy));
}

/// Armijo search along w^k - x^k with w^k in P_C(phi_{gamma3}, x^k,
/// x^k - alpha_k grad f(x^k)) and gamma1 = gamma2 = 0. Stops when w^k = x^k
/// or on the two-consecutive relative change rule.
template <Objective F, class Projector>
  requires ProjectorFor<Projector, typename F::point_type>
SolveResult<typename F::point_type> solve_armijo(const F& obj, Projector& proj,
                                                 const typename F::point_type& x0,
                                                 const ArmijoConfig& cfg) {
  using Point = typename F::point_type;
  cfg.validate();
  detail::require_feasible_start(proj.set(), x0);

  const auto t_start = std::chrono::steady_clock::now();
  SolveResult<Point> out;
  Point x = x0;
  double fx = obj.value(x);
  out.f0 = fx;
  if (cfg.keep_trajectory) out.trajectory.push_back(x);

  std::optional<Point> x_prev;
  std::optional<Point> g_prev;
  double prev_rel = std::numeric_limits<double>::infinity();
  const ForcingParams gamma{0.0, 0.0, cfg.gamma3_bar};
  out.reason = StopReason::kMaxIter;
  for (long k = 0; k < cfg.max_iter; ++k) {
    const auto t_iter = std::chrono::steady_clock::now();
    Point g = obj.gradient(x);
    double alpha = std::min(cfg.alpha_max, std::max(cfg.alpha_min, cfg.alpha));
    if (cfg.step_rule == ArmijoConfig::StepRule::kSpectral) {
      alpha = x_prev ? spectral_step(Point(x - *x_prev), Point(g - *g_prev), cfg.alpha_min,
                                     cfg.alpha_max)
                     : cfg.alpha_max;
    }
    const Point z = x - alpha * g;
    InexactProjection<Point> w;
    try {
      w = proj(x, z, gamma, cfg.phi);
    } catch (const Error& e) {
      out.reason = StopReason::kError;
      out.message = e.what();
      break;
    }
    const Point d = w.point - x;
    const double dnorm = norm(d);
    const double xnorm = norm(x);
    if (dnorm <= 1e-12 * std::max(1.0, xnorm)) {
      out.reason = StopReason::kWEqualsX;
      break;
    }
    const double slope = inner(g, d);
    LineSearchResult ls;
    try {
      ls = armijo_search(obj, x, d, fx, slope, cfg.sigma, cfg.tau, cfg.max_backtracks);
    } catch (const std::exception& e) {
      out.reason = StopReason::kError;
      out.message = e.what();
      break;
    }

    IterationRecord rec;
    rec.k = k;
    rec.f = fx;
    rec.grad_norm = norm(g);
    rec.alpha = alpha;
    rec.tau = ls.tau;
    rec.backtracks = ls.backtracks;
    rec.gamma = gamma;
    rec.p_used = w.rank_used;
    rec.direction_norm = dnorm;
    rec.slope = slope;
    rec.certificate_gap = w.certificate_gap;
    rec.input_norm = norm(z);
    rec.certificate_allowance = kCertificateSlack * std::max(1.0, rec.input_norm);

    Point x_next = x + ls.tau * d;
    rec.step_norm = ls.tau * dnorm;
    rec.relative_change = detail::relative_change(rec.step_norm, xnorm);
    if (cfg.check_feasibility) rec.feasible = proj.set().contains(x_next, kDefaultFeasTol);
    rec.f_next = ls.f_new;

    x_prev = std::move(x);
    g_prev = std::move(g);
    x = std::move(x_next);
    fx = ls.f_new;
    rec.seconds = detail::seconds_since(t_iter);
    out.records.push_back(rec);
    if (cfg.keep_trajectory) out.trajectory.push_back(x);
    out.iterations = k + 1;

    if (rec.relative_change <= cfg.stop_tol && prev_rel <= cfg.stop_tol) {
      out.reason = StopReason::kConverged;
      break;
    }
    prev_rel = rec.relative_change;
  }
  out.x = std::move(x);
  out.f = fx;
  out.seconds = detail::seconds_since(t_start);
  return out;
}

}  // namespace ipg
