#pragma once

// Error-tolerance functions, forcing parameters and summable schedules.

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "ipg/linalg.hpp"

namespace ipg {

/// Forcing parameters (gamma1, gamma2, gamma3) weighting the three squared
/// distances among anchor u, input v and candidate w.
struct ForcingParams {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma3 = 0.0;

  bool nonnegative() const { return gamma1 >= 0.0 && gamma2 >= 0.0 && gamma3 >= 0.0; }
  friend bool operator==(const ForcingParams&, const ForcingParams&) = default;
};

/// Squared distances ||v-u||^2, ||w-v||^2, ||w-u||^2.
struct SquaredGaps {
  double vu = 0.0;
  double wv = 0.0;
  double wu = 0.0;
};

template <class Point>
SquaredGaps squared_gaps(const Point& u, const Point& v, const Point& w) {
  return {squared_distance(v, u), squared_distance(w, v), squared_distance(w, u)};
}

/// gamma1 ||v-u||^2 + gamma2 ||w-v||^2 + gamma3 ||w-u||^2
inline double tolerance_bound(const ForcingParams& g, const SquaredGaps& d) {
  return g.gamma1 * d.vu + g.gamma2 * d.wv + g.gamma3 * d.wu;
}

/// Error-tolerance function phi_gamma(u, v, w). The five canonical forms are
///   full:      gamma1 |v-u|^2 + gamma2 |w-v|^2 + gamma3 |w-u|^2
///   anchor:    gamma1 |v-u|^2
///   residual:  gamma2 |w-v|^2
///   relative:  gamma3 |w-u|^2
///   product:   gamma1 gamma2 gamma3 |v-u|^2 |w-v|^2 |w-u|^2, capped at the
///              full form (the raw product exceeds it once the distances grow)
/// A custom form receives the forcing parameters and the squared distances;
/// it is the caller's job to keep it below tolerance_bound and continuous.
class ToleranceFn {
 public:
  enum class Kind { kFull, kAnchor, kResidual, kRelative, kProduct, kCustom };
  using Custom = std::function<double(const ForcingParams&, const SquaredGaps&)>;

  ToleranceFn() = default;
  explicit ToleranceFn(Kind kind) : kind_(kind) {
    if (kind == Kind::kCustom) throw std::invalid_argument("ToleranceFn: custom kind needs a hook");
  }
  explicit ToleranceFn(Custom hook) : kind_(Kind::kCustom), hook_(std::move(hook)) {}

  static ToleranceFn full() { return ToleranceFn(Kind::kFull); }
  static ToleranceFn anchor() { return ToleranceFn(Kind::kAnchor); }
  static ToleranceFn residual() { return ToleranceFn(Kind::kResidual); }
  static ToleranceFn relative() { return ToleranceFn(Kind::kRelative); }
  static ToleranceFn product() { return ToleranceFn(Kind::kProduct); }

  /// Canonical form by index 1..5 (full, anchor, residual, relative, product).
  static ToleranceFn canonical(int index) {
    switch (index) {
      case 1: return full();
      case 2: return anchor();
      case 3: return residual();
      case 4: return relative();
      case 5: return product();
      default: throw std::invalid_argument("ToleranceFn: canonical index must be 1..5");
    }
  }

  Kind kind() const { return kind_; }

  double operator()(const ForcingParams& g, const SquaredGaps& d) const {
    switch (kind_) {
      case Kind::kFull: return tolerance_bound(g, d);
      case Kind::kAnchor: return g.gamma1 * d.vu;
      case Kind::kResidual: return g.gamma2 * d.wv;
      case Kind::kRelative: return g.gamma3 * d.wu;
      case Kind::kProduct:
        return std::min(g.gamma1 * g.gamma2 * g.gamma3 * d.vu * d.wv * d.wu, tolerance_bound(g, d));
      case Kind::kCustom: return hook_(g, d);
    }
    return 0.0;
  }

  template <class Point>
  double operator()(const ForcingParams& g, const Point& u, const Point& v, const Point& w) const {
    return (*this)(g, squared_gaps(u, v, w));
  }

  std::string name() const {
    switch (kind_) {
      case Kind::kFull: return "full";
      case Kind::kAnchor: return "anchor";
      case Kind::kResidual: return "residual";
      case Kind::kRelative: return "relative";
      case Kind::kProduct: return "product";
      case Kind::kCustom: return "custom";
    }
    return "?";
  }

 private:
  Kind kind_ = Kind::kFull;
  Custom hook_;
};

/// True iff phi_gamma(u, v, w) stays below the three-term bound (up to
/// 1e-12 relative roundoff).
template <class Point>
bool tolerance_bound_check(const ToleranceFn& phi, const ForcingParams& g, const Point& u,
                           const Point& v, const Point& w) {
  const SquaredGaps d = squared_gaps(u, v, w);
  const double bound = tolerance_bound(g, d);
  return phi(g, d) <= bound + 1e-12 * std::max(1.0, bound);
}

/// Nonincreasing b_k -> 0 with b_{-1} = 3 bbar, b_0 = 2 bbar and
/// a_k = b_{k-1} - b_k, so the a_k sum to at most b_{-1}.
///   harmonic:    b_k = bbar / k          (k >= 1)
///   logarithmic: b_k = bbar / ln(k + 1)  (k >= 1)
class SummableSchedule {
 public:
  enum class Kind { kHarmonic, kLogarithmic };

  SummableSchedule(Kind kind, double bbar) : kind_(kind), bbar_(bbar) {
    if (!(bbar > 0.0) || !std::isfinite(bbar)) {
      throw std::invalid_argument("SummableSchedule: bbar must be positive");
    }
  }
  static SummableSchedule harmonic(double bbar) { return {Kind::kHarmonic, bbar}; }
  static SummableSchedule logarithmic(double bbar) { return {Kind::kLogarithmic, bbar}; }

  static SummableSchedule parse(std::string_view name, double bbar) {
    if (name == "harmonic") return harmonic(bbar);
    if (name == "log" || name == "logarithmic") return logarithmic(bbar);
    throw std::invalid_argument("unknown schedule '" + std::string(name) + "'");
  }

  Kind kind() const { return kind_; }
  double bbar() const { return bbar_; }
  std::string name() const { return kind_ == Kind::kHarmonic ? "harmonic" : "log"; }

  /// b_k for k >= -1.
  double b(long k) const {
    if (k < -1) throw std::invalid_argument("SummableSchedule::b: k must be >= -1");
    if (k == -1) return 3.0 * bbar_;
    if (k == 0) return 2.0 * bbar_;
    const double kd = static_cast<double>(k);
    return kind_ == Kind::kHarmonic ? bbar_ / kd : bbar_ / std::log(kd + 1.0);
  }
  double a(long k) const {
    if (k < 0) throw std::invalid_argument("SummableSchedule::a: k must be >= 0");
    return b(k - 1) - b(k);
  }

 private:
  Kind kind_;
  double bbar_;
};

/// (a_k, b_k)
inline std::pair<double, double> schedule_values(const SummableSchedule& s, long k) {
  if (k < 0) throw std::invalid_argument("schedule_values: k must be >= 0");
  return {s.a(k), s.b(k)};
}

/// Forcing parameters for one constant-step iteration:
///   gamma2 = min(a_k / (2 |grad|^2), gamma2_cap),
///   gamma1 = a_k / |grad|^2 - gamma2,
///   gamma3 = gamma3_bar.
inline ForcingParams forcing_for_iteration(double grad_norm_sq, double a_k, double gamma2_cap,
                                           double gamma3_bar) {
  if (!(grad_norm_sq > 0.0)) {
    throw std::invalid_argument("forcing_for_iteration: gradient norm must be positive");
  }
  if (a_k < 0.0) throw std::invalid_argument("forcing_for_iteration: a_k must be >= 0");
  if (!(gamma2_cap >= 0.0 && gamma2_cap < 0.5) || !(gamma3_bar >= 0.0 && gamma3_bar < 0.5)) {
    throw std::invalid_argument("forcing_for_iteration: caps must lie in [0, 1/2)");
  }
  const double budget = a_k / grad_norm_sq;
  const double gamma2 = std::min(0.5 * budget, gamma2_cap);
  return {budget - gamma2, gamma2, gamma3_bar};
}

}  // namespace ipg
