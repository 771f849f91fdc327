// Command line front end: generate | sweep-gamma3 | compare | verify.

#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "ipg/harness.hpp"

namespace {

using ipg::harness::ExperimentConfig;

// Flags share names with the config-file keys; a flag given on the command
// line overrides the file.
struct Overrides {
  std::map<std::string, std::string> values;
  bool strict = false;

  void attach(CLI::App& app) {
    static const std::map<std::string, std::string> help = {
        {"algo", "constant | armijo"},
        {"proj", "inexact | exact"},
        {"problem", "lsq | boxqp (verify)"},
        {"n", "matrix dimension"},
        {"m", "rows of A (m >= n)"},
        {"omega", "planted rank"},
        {"density", "nonzero fraction of A, or 'default'"},
        {"seed", "instance seed"},
        {"beta", "starting point parameter(s), comma separated"},
        {"gamma3", "gamma3_bar value(s), comma separated"},
        {"armijo-gamma3", "gamma3_bar for the Armijo variant"},
        {"schedule", "log | harmonic | none"},
        {"bbar", "schedule scale"},
        {"tol", "relative change stopping tolerance"},
        {"max-iter", "iteration limit"},
        {"instance", "load this instance file"},
        {"out", "output path (CSV, or the instance for generate)"},
        {"json", "JSON report path"},
    };
    for (const auto& key : ExperimentConfig::keys()) {
      if (key == "strict") continue;
      app.add_option("--" + key, values[key], help.at(key));
    }
    app.add_flag("--strict", strict, "exit 3 on monitor violations beyond 1e-6 relative slack");
  }

  void apply(const CLI::App& app, ExperimentConfig& cfg) const {
    for (const auto& [key, value] : values) {
      if (app.count("--" + key) > 0) cfg.set(key, value);
    }
    if (app.count("--strict") > 0) cfg.strict = strict;
  }
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

int finish(const ipg::harness::Report& rep, const ExperimentConfig& cfg) {
  emit(rep.csv, cfg.out);
  if (!cfg.json.empty()) {
    nlohmann::json doc = rep.json;
    doc["config"] = ipg::harness::config_json(cfg);
    doc["environment"] = ipg::harness::environment_stamp();
    emit(doc.dump(2) + "\n", cfg.json);
  }
  return rep.exit_code(cfg.strict);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gradient projection with feasible inexact projections"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "flat key = value configuration file");

  std::map<std::string, Overrides> overrides;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, about] : std::map<std::string, std::string>{
           {"generate", "write a random least-squares instance"},
           {"sweep-gamma3", "constant-step runs over gamma3_bar"},
           {"compare", "constant / Armijo x inexact / exact grid"},
           {"verify", "monitor summary for one run"}}) {
    CLI::App* sub = app.add_subcommand(name, about);
    sub->add_option("--config", config_path, "flat key = value configuration file");
    overrides[name].attach(*sub);
    subs[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ipg::harness::kOk : ipg::harness::kUsage;
  }

  std::string command;
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) command = name;
  }

  ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = ipg::harness::load_config(config_path);
    overrides[command].apply(*subs[command], cfg);
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ipg::harness::kUsage;
  }

  try {
    if (command == "generate") {
      if (cfg.out.empty()) {
        std::cerr << "error: generate needs --out\n";
        return ipg::harness::kUsage;
      }
      const auto inst = ipg::harness::make_instance(cfg);
      ipg::save_instance(inst, cfg.out);
      const auto& meta = inst.metadata();
      std::cout << "n=" << meta.n << " m=" << meta.m << " omega=" << meta.omega
                << " density=" << ipg::harness::format_real(meta.density) << " seed=" << meta.seed
                << " nnz=" << inst.a().nonZeros() << " L=" << ipg::harness::format_alpha(*inst.lipschitz())
                << " f(X0)=" << ipg::harness::format_f(inst.value(ipg::starting_point(cfg.betas.front(), meta.n)))
                << "\n";
      return ipg::harness::kOk;
    }
    if (command == "verify") return finish(ipg::harness::verify(cfg), cfg);
    const auto inst = ipg::harness::make_instance(cfg);
    if (command == "sweep-gamma3") return finish(ipg::harness::sweep_gamma3(inst, cfg), cfg);
    return finish(ipg::harness::compare(inst, cfg), cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ipg::harness::kRunFailure;
  }
}
