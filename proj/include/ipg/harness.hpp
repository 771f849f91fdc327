#pragma once

// Experiment runner behind the command line tool: configuration, batches of
// solver runs on one instance, monitor evaluation and CSV / JSON reports.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ipg/monitors.hpp"
#include "ipg/problems.hpp"
#include "ipg/sets.hpp"
#include "ipg/solver.hpp"

namespace ipg::harness {

enum ExitCode { kOk = 0, kUsage = 1, kRunFailure = 2, kStrictViolation = 3 };

/// Violations beyond this relative slack fail a strict run.
inline constexpr double kStrictSlack = 1e-6;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
  std::string algorithm = "constant";  // constant | armijo
  std::string projection = "inexact";  // inexact | exact
  std::string problem = "lsq";         // lsq | boxqp (verify only)
  Index n = 200;
  Index m = 400;
  std::int64_t omega = 10;
  std::optional<double> density;  // default_density(n, m) when unset
  std::uint64_t seed = 1;
  std::vector<double> betas{0.0};
  std::vector<double> gamma3s{0.0, 0.1, 0.2, 0.3, 0.4};
  double armijo_gamma3 = 0.49995;
  std::string schedule = "log";  // log | harmonic | none
  double bbar = 100.0;
  double tol = 1e-4;
  long max_iter = 10000;
  bool strict = false;
  std::string instance;  // load this instance instead of generating one
  std::string out;
  std::string json;

  static const std::vector<std::string>& keys() {
    static const std::vector<std::string> k = {
        "algo", "proj", "problem", "n", "m", "omega", "density", "seed", "beta", "gamma3",
        "armijo-gamma3", "schedule", "bbar", "tol", "max-iter", "strict", "instance", "out", "json"};
    return k;
  }

  double density_value() const { return density.value_or(default_density(n, m)); }

  void set(const std::string& key, const std::string& value);
  std::string get(const std::string& key) const;
  void validate() const;

  /// Flat key=value text, readable by parse_config.
  std::string to_text() const {
    std::ostringstream os;
    for (const auto& k : keys()) {
      const std::string v = get(k);
      if (!v.empty()) os << k << " = " << v << "\n";
    }
    return os.str();
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad number for " + key + ": '" + v + "'");
  }
}

inline long long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("bad integer for " + key + ": '" + v + "'");
  }
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  if (out.empty()) throw ConfigError(key + " needs at least one value");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("bad boolean for " + key + ": '" + v + "'");
}

inline std::string fmt(const char* spec, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

inline std::string join(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + fmt("%.17g", xs[i]);
  return s;
}

}  // namespace detail

inline void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = detail::trim(raw);
  if (key == "algo") algorithm = v;
  else if (key == "proj") projection = v;
  else if (key == "problem") problem = v;
  else if (key == "n") n = static_cast<Index>(detail::parse_int(key, v));
  else if (key == "m") m = static_cast<Index>(detail::parse_int(key, v));
  else if (key == "omega") omega = detail::parse_int(key, v);
  else if (key == "density") density = v.empty() || v == "default" ? std::nullopt : std::optional(detail::parse_double(key, v));
  else if (key == "seed") seed = static_cast<std::uint64_t>(detail::parse_int(key, v));
  else if (key == "beta") betas = detail::parse_list(key, v);
  else if (key == "gamma3") gamma3s = detail::parse_list(key, v);
  else if (key == "armijo-gamma3") armijo_gamma3 = detail::parse_double(key, v);
  else if (key == "schedule") schedule = v;
  else if (key == "bbar") bbar = detail::parse_double(key, v);
  else if (key == "tol") tol = detail::parse_double(key, v);
  else if (key == "max-iter") max_iter = static_cast<long>(detail::parse_int(key, v));
  else if (key == "strict") strict = detail::parse_bool(key, v);
  else if (key == "instance") instance = v;
  else if (key == "out") out = v;
  else if (key == "json") json = v;
  else throw ConfigError("unknown key '" + key + "'");
}

inline std::string ExperimentConfig::get(const std::string& key) const {
  using detail::fmt;
  if (key == "algo") return algorithm;
  if (key == "proj") return projection;
  if (key == "problem") return problem;
  if (key == "n") return std::to_string(n);
  if (key == "m") return std::to_string(m);
  if (key == "omega") return std::to_string(omega);
  if (key == "density") return density ? fmt("%.17g", *density) : "default";
  if (key == "seed") return std::to_string(seed);
  if (key == "beta") return detail::join(betas);
  if (key == "gamma3") return detail::join(gamma3s);
  if (key == "armijo-gamma3") return fmt("%.17g", armijo_gamma3);
  if (key == "schedule") return schedule;
  if (key == "bbar") return fmt("%.17g", bbar);
  if (key == "tol") return fmt("%.17g", tol);
  if (key == "max-iter") return std::to_string(max_iter);
  if (key == "strict") return strict ? "true" : "false";
  if (key == "instance") return instance;
  if (key == "out") return out;
  if (key == "json") return json;
  throw ConfigError("unknown key '" + key + "'");
}

inline void ExperimentConfig::validate() const {
  if (algorithm != "constant" && algorithm != "armijo") throw ConfigError("algo must be constant or armijo");
  if (projection != "inexact" && projection != "exact") throw ConfigError("proj must be inexact or exact");
  if (problem != "lsq" && problem != "boxqp") throw ConfigError("problem must be lsq or boxqp");
  if (schedule != "log" && schedule != "harmonic" && schedule != "none") {
    throw ConfigError("schedule must be log, harmonic or none");
  }
  if (instance.empty()) {
    if (n < 2 || m < n) throw ConfigError("need m >= n >= 2");
    if (omega < 2) throw ConfigError("omega must be > 1");
  }
  if (density && !(*density > 0.0 && *density <= 1.0)) throw ConfigError("density must lie in (0, 1]");
  for (double b : betas) {
    if (!(b >= 0.0 && b <= 1.0)) throw ConfigError("beta values must lie in [0, 1]");
  }
  for (double g : gamma3s) {
    if (!(g >= 0.0 && g < 0.5)) throw ConfigError("gamma3 values must lie in [0, 1/2)");
  }
  if (!(armijo_gamma3 >= 0.0 && armijo_gamma3 < 0.5)) throw ConfigError("armijo-gamma3 must lie in [0, 1/2)");
  if (!(bbar > 0.0)) throw ConfigError("bbar must be > 0");
  if (!(tol >= 0.0) || max_iter < 0) throw ConfigError("bad stopping rule");
}

/// Flat "key = value" lines; '#' starts a comment.
inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    base.set(detail::trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  return parse_config(in, std::move(base));
}

// ---------------------------------------------------------------------------
// Runs

enum class Algo { kConstant, kArmijo };

struct RunSpec {
  Algo algo = Algo::kConstant;
  bool exact = false;
  double beta = 0.0;
  double gamma3 = 0.0;  // constant-step gamma3_bar; Armijo uses cfg.armijo_gamma3

  std::string tag() const {
    return std::string(algo == Algo::kConstant ? "c" : "a") + (exact ? "e" : "i");
  }
};

struct RunOutcome {
  RunSpec spec;
  SolveResult<SymMatrix> result;
  double alpha = 0.0;  // constant step, or the last Armijo alpha
  MonitorReport monitors;
};

inline std::optional<SummableSchedule> make_schedule(const ExperimentConfig& cfg) {
  if (cfg.schedule == "none") return std::nullopt;
  return SummableSchedule::parse(cfg.schedule, cfg.bbar);
}

inline ConstantStepConfig constant_config(const ExperimentConfig& cfg, double lipschitz, double gamma3) {
  ConstantStepConfig c;
  c.alpha = constant_alpha_from_gamma(lipschitz, gamma3);
  c.gamma3_bar = gamma3;
  c.schedule = make_schedule(cfg);
  c.max_iter = cfg.max_iter;
  c.stop_tol = cfg.tol;
  return c;
}

inline ArmijoConfig armijo_config(const ExperimentConfig& cfg) {
  ArmijoConfig a;
  a.gamma3_bar = cfg.armijo_gamma3;
  a.max_iter = cfg.max_iter;
  a.stop_tol = cfg.tol;
  return a;
}

inline SpectrahedronLSQ make_instance(const ExperimentConfig& cfg) {
  if (!cfg.instance.empty()) return load_instance(cfg.instance);
  return generate_instance(cfg.n, cfg.m, cfg.omega, cfg.density_value(), cfg.seed);
}

inline SolveResult<SymMatrix> solve_one(const SpectrahedronLSQ& inst, const Spectrahedron& set,
                                        const RunSpec& spec, const ExperimentConfig& cfg,
                                        double* alpha_out = nullptr) {
  const SymMatrix x0 = starting_point(spec.beta, inst.n());
  const double lip = *inst.lipschitz();
  auto run = [&](auto& proj) {
    if (spec.algo == Algo::kConstant) {
      const ConstantStepConfig c = constant_config(cfg, lip, spec.gamma3);
      if (alpha_out) *alpha_out = c.alpha;
      return solve_constant(inst, proj, x0, c);
    }
    auto r = solve_armijo(inst, proj, x0, armijo_config(cfg));
    if (alpha_out) *alpha_out = r.records.empty() ? 0.0 : r.records.back().alpha;
    return r;
  };
  if (spec.exact) {
    ExactProjector<Spectrahedron> proj(set);
    return run(proj);
  }
  SpectrahedronInexactProjector proj(set);
  return run(proj);
}

/// Runs every spec on one instance (sequentially, in order), then evaluates
/// the monitors with f* estimated by the best value seen across the batch
/// and x* by the final iterate of the run reaching it.
inline std::vector<RunOutcome> run_batch(const SpectrahedronLSQ& inst, const std::vector<RunSpec>& specs,
                                         const ExperimentConfig& cfg) {
  const Spectrahedron set(inst.n());
  std::vector<RunOutcome> out;
  out.reserve(specs.size());
  for (const auto& spec : specs) {
    RunOutcome o;
    o.spec = spec;
    o.result = solve_one(inst, set, spec, cfg, &o.alpha);
    out.push_back(std::move(o));
  }

  double f_best = std::numeric_limits<double>::infinity();
  const SymMatrix* x_star = nullptr;
  double f_star_run = std::numeric_limits<double>::infinity();
  for (const auto& o : out) {
    f_best = std::min(f_best, ipg::detail::min_f_seen(o.result.f0, o.result.records));
    if (o.result.reason != StopReason::kError && o.result.f < f_star_run) {
      f_star_run = o.result.f;
      x_star = &o.result.x;
    }
  }
  const double lip = *inst.lipschitz();
  for (auto& o : out) {
    const SymMatrix x0 = starting_point(o.spec.beta, inst.n());
    if (o.spec.algo == Algo::kConstant) {
      const ConstantStepConfig c = constant_config(cfg, lip, o.spec.gamma3);
      o.monitors = monitor_descent(o.result, c, lip);
      ComplexityInputs<SymMatrix> in;
      in.f_best = f_best;
      in.x0 = x0;
      if (x_star) in.x_star = *x_star;
      o.monitors.append(monitor_complexity(o.result, inst, c, in));
    } else {
      ArmijoInputs<SymMatrix> in;
      in.lipschitz = lip;
      in.f_best = f_best;
      in.x0 = x0;
      in.convex = true;
      if (x_star) in.x_star = *x_star;
      o.monitors = monitor_armijo(o.result, armijo_config(cfg), in);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

inline std::string format_f(double f) { return detail::fmt("%.6g", f); }
inline std::string format_time(double s) { return detail::fmt("%.1f", s); }
inline std::string format_alpha(double a) { return detail::fmt("%.17g", a); }
inline std::string format_real(double x) { return detail::fmt("%.6g", x); }

inline std::string monitor_verdict(const MonitorReport& r) {
  return r.passed() ? "pass" : "fail:" + std::to_string(r.violations());
}

struct Report {
  std::string csv;
  nlohmann::json json;
  bool run_failure = false;
  bool strict_violation = false;

  int exit_code(bool strict) const {
    if (run_failure) return kRunFailure;
    if (strict && strict_violation) return kStrictViolation;
    return kOk;
  }
};

inline nlohmann::json to_json(const MonitorReport& r) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : r.checks) {
    nlohmann::json j = {{"name", c.name},           {"evaluated", c.evaluated},
                        {"violations", c.violations}, {"tolerance", c.tolerance},
                        {"skipped", c.skipped},       {"pass", c.passed()}};
    j["worst_slack"] = c.evaluated > 0 ? nlohmann::json(c.worst_slack) : nlohmann::json(nullptr);
    if (!c.note.empty()) j["note"] = c.note;
    arr.push_back(j);
  }
  return arr;
}

inline nlohmann::json to_json(const RunOutcome& o) {
  const auto& r = o.result;
  return {{"variant", o.spec.tag()},
          {"beta", o.spec.beta},
          {"gamma3", o.spec.algo == Algo::kConstant ? o.spec.gamma3 : std::numeric_limits<double>::quiet_NaN()},
          {"f", r.f},
          {"f0", r.f0},
          {"iterations", r.iterations},
          {"seconds", r.seconds},
          {"alpha", o.alpha},
          {"mean_p", r.mean_rank()},
          {"max_p", r.max_rank()},
          {"stop", to_string(r.reason)},
          {"message", r.message},
          {"monitors", to_json(o.monitors)}};
}

inline nlohmann::json environment_stamp() {
  return {{"compiler", __VERSION__},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"cplusplus", __cplusplus}};
}

inline nlohmann::json config_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  for (const auto& k : ExperimentConfig::keys()) j[k] = cfg.get(k);
  return j;
}

inline void note_outcome(Report& rep, const RunOutcome& o) {
  if (o.result.reason == StopReason::kError) rep.run_failure = true;
  if (o.monitors.exceeds(kStrictSlack)) rep.strict_violation = true;
}

/// One constant-step run per (beta, gamma3_bar), alpha from the step rule.
inline Report sweep_gamma3(const SpectrahedronLSQ& inst, const ExperimentConfig& cfg) {
  std::vector<RunSpec> specs;
  for (double beta : cfg.betas) {
    for (double g3 : cfg.gamma3s) specs.push_back({Algo::kConstant, cfg.projection == "exact", beta, g3});
  }
  const auto outcomes = run_batch(inst, specs, cfg);

  Report rep;
  std::ostringstream csv;
  csv << "beta,gamma3,f,it,time_s,alpha,mean_p,max_p,stop,monitors\n";
  rep.json["runs"] = nlohmann::json::array();
  for (const auto& o : outcomes) {
    const auto& r = o.result;
    csv << format_real(o.spec.beta) << ',' << format_real(o.spec.gamma3) << ',' << format_f(r.f) << ','
        << r.iterations << ',' << format_time(r.seconds) << ',' << format_alpha(o.alpha) << ','
        << format_real(r.mean_rank()) << ',' << r.max_rank() << ',' << to_string(r.reason) << ','
        << monitor_verdict(o.monitors) << '\n';
    rep.json["runs"].push_back(to_json(o));
    note_outcome(rep, o);
  }
  rep.csv = csv.str();
  return rep;
}

/// The 2x2 grid {constant, armijo} x {inexact, exact} for every beta; one
/// CSV row per beta.
inline Report compare(const SpectrahedronLSQ& inst, const ExperimentConfig& cfg) {
  const double g3 = cfg.gamma3s.front();
  std::vector<RunSpec> specs;
  for (double beta : cfg.betas) {
    specs.push_back({Algo::kConstant, false, beta, g3});
    specs.push_back({Algo::kConstant, true, beta, g3});
    specs.push_back({Algo::kArmijo, false, beta, g3});
    specs.push_back({Algo::kArmijo, true, beta, g3});
  }
  const auto outcomes = run_batch(inst, specs, cfg);

  Report rep;
  std::ostringstream csv;
  csv << "n,m,omega,beta";
  for (const char* v : {"ci", "ce", "ai", "ae"}) csv << ',' << v << "_f," << v << "_it," << v << "_time_s";
  csv << ",ci_mean_p,ci_max_p,ai_mean_p,ai_max_p,stop,monitors\n";
  rep.json["runs"] = nlohmann::json::array();
  const auto& meta = inst.metadata();
  for (std::size_t row = 0; row < cfg.betas.size(); ++row) {
    const RunOutcome* cell = &outcomes[4 * row];
    csv << meta.n << ',' << meta.m << ',' << meta.omega << ',' << format_real(cfg.betas[row]);
    MonitorReport merged;
    std::string stops;
    for (int v = 0; v < 4; ++v) {
      const auto& r = cell[v].result;
      csv << ',' << format_f(r.f) << ',' << r.iterations << ',' << format_time(r.seconds);
      merged.append(cell[v].monitors);
      stops += (v ? "/" : "") + std::string(to_string(r.reason));
      rep.json["runs"].push_back(to_json(cell[v]));
      note_outcome(rep, cell[v]);
    }
    csv << ',' << format_real(cell[0].result.mean_rank()) << ',' << cell[0].result.max_rank() << ','
        << format_real(cell[2].result.mean_rank()) << ',' << cell[2].result.max_rank() << ',' << stops
        << ',' << monitor_verdict(merged) << '\n';
  }
  rep.csv = csv.str();
  return rep;
}

/// Monitor summary for one run: a least-squares instance with the
/// configured algorithm, projection, first beta and first gamma3, or the
/// strongly convex box QP (mu / L = 0.1, alpha = 1 / L, exact projection,
/// no schedule) with its planted minimizer.
inline Report verify(const ExperimentConfig& cfg) {
  Report rep;
  MonitorReport monitors;
  nlohmann::json run;
  if (cfg.problem == "boxqp") {
    const BoxQP qp = make_boxqp(cfg.n, 0.1, 1.0, cfg.seed);
    const Box box(qp.lo(), qp.hi());
    ExactProjector<Box> proj(box);
    ConstantStepConfig c;
    c.alpha = 1.0 / qp.l();
    c.schedule = std::nullopt;
    c.max_iter = cfg.max_iter;
    c.stop_tol = cfg.tol;
    c.keep_trajectory = true;
    const auto r = solve_constant(qp, proj, Eigen::VectorXd::Zero(cfg.n), c);
    monitors = monitor_descent(r, c, qp.l());
    ComplexityInputs<Eigen::VectorXd> in;
    in.x_star = *qp.minimizer();
    in.f_best = qp.value(*qp.minimizer());
    monitors.append(monitor_complexity(r, qp, c, in));
    run = {{"problem", "boxqp"}, {"f", r.f}, {"iterations", r.iterations}, {"stop", to_string(r.reason)}};
    if (r.reason == StopReason::kError) rep.run_failure = true;
  } else {
    const SpectrahedronLSQ inst = make_instance(cfg);
    const RunSpec spec{cfg.algorithm == "armijo" ? Algo::kArmijo : Algo::kConstant, cfg.projection == "exact",
                       cfg.betas.front(), cfg.gamma3s.front()};
    const auto outcomes = run_batch(inst, {spec}, cfg);
    monitors = outcomes.front().monitors;
    run = to_json(outcomes.front());
    run["problem"] = "lsq";
    if (outcomes.front().result.reason == StopReason::kError) rep.run_failure = true;
  }
  rep.strict_violation = monitors.exceeds(kStrictSlack);

  std::ostringstream csv;
  csv << "check,evaluated,violations,worst_slack,status\n";
  for (const auto& c : monitors.checks) {
    csv << c.name << ',' << c.evaluated << ',' << c.violations << ','
        << (c.evaluated > 0 ? detail::fmt("%.3e", c.worst_slack) : std::string("-")) << ','
        << (c.skipped ? "skipped" : c.passed() ? "pass" : "fail") << '\n';
  }
  rep.csv = csv.str();
  rep.json["runs"] = nlohmann::json::array({run});
  rep.json["monitors"] = to_json(monitors);
  return rep;
}

}  // namespace ipg::harness
