#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "combqfi/channel_estimation.hpp"
#include "combqfi/collision.hpp"
#include "combqfi/qfi.hpp"
#include "combqfi/variational.hpp"

using nlohmann::json;
using namespace combqfi;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string experiment;
  Interaction interaction = Interaction::partial_swap;
  std::vector<Scenario> scenarios;
  std::vector<int> n_values;
  std::vector<double> t_tot;
  double omega = M_PI / 10;
  double g = 1.0;
  sdp::SolveOptions solver;
  std::uint64_t seed = 1;
  bool timings = false;
  int restarts = 20;
  int max_opt_iters = 200;
  std::string output = "results.csv";
};

struct Row {
  Scenario scenario;
  int N = 0;
  double t_tot = 0;
  double qfi = 0;
  double gap = 0;
  double wall_ms = 0;
  bool failed = false;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ExperimentConfig parse_config(const std::string& path, const std::string& kind,
                              std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.contains("schema_version") || j["schema_version"] != 1)
    throw ConfigError("config field 'schema_version' must be 1");
  ExperimentConfig cfg;
  cfg.experiment = j.value("experiment", kind);
  if (cfg.experiment != kind)
    throw ConfigError("config field 'experiment' is '" + cfg.experiment +
                      "' but the subcommand expects '" + kind + "'");
  const std::string ikey = j.value("interaction", "swap");
  if (!interaction_from_string(ikey, cfg.interaction))
    throw ConfigError("config field 'interaction': unknown value '" + ikey + "'");
  for (const auto& s : j.value("scenarios", std::vector<std::string>{"nm-control"})) {
    Scenario sc;
    if (!scenario_from_string(s, sc))
      throw ConfigError("config field 'scenarios': unknown value '" + s + "'");
    cfg.scenarios.push_back(sc);
  }
  cfg.n_values = j.value("N", std::vector<int>{1});
  cfg.t_tot = j.value("t_tot", std::vector<double>{});
  if (cfg.scenarios.empty() || cfg.n_values.empty() || cfg.t_tot.empty())
    throw ConfigError("config grids 'scenarios', 'N' and 't_tot' must be nonempty");
  for (int n : cfg.n_values)
    if (n < 1 || n > 4)
      throw ConfigError("config field 'N': values must be in 1..4");
  cfg.omega = j.value("omega", M_PI / 10);
  cfg.g = j.value("g", 1.0);
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    cfg.solver.gap_tol = s.value("gap_tol", cfg.solver.gap_tol);
    cfg.solver.feas_tol = s.value("feas_tol", cfg.solver.feas_tol);
    cfg.solver.max_iters = s.value("max_iters", cfg.solver.max_iters);
  }
  cfg.seed = j.value("seed", std::uint64_t{1});
  if (seed_override) cfg.seed = *seed_override;
  cfg.timings = j.value("timings", false);
  cfg.restarts = j.value("restarts", 20);
  cfg.max_opt_iters = j.value("max_opt_iters", 200);
  cfg.output = j.value("output", std::string("results.csv"));
  return cfg;
}

double run_point(const ExperimentConfig& cfg, Scenario sc, int n, double t_tot,
                 double& gap) {
  CollisionParams p;
  p.interaction = cfg.interaction;
  p.scenario = sc;
  p.N = n;
  p.t_tot = t_tot;
  p.g = cfg.g;
  QfiOptions opts;
  opts.solver = cfg.solver;
  if (cfg.experiment == "variational") {
    OptimizeConfig oc;
    oc.restarts = cfg.restarts;
    oc.max_iters = cfg.max_opt_iters;
    oc.seed = cfg.seed;
    const auto res = optimize_probe(p, cfg.omega, oc);
    gap = 0;
    return res.fisher;
  }
  if (cfg.experiment == "channel-ncopy") {
    // Single collision step of duration t_tot as the channel, used n times.
    p.N = 1;
    p.scenario = Scenario::nm_control;
    auto fam = build_comb_family(p);
    auto [comb, ens] = fam.evaluate(cfg.omega);
    const auto r = adaptive_channel_qfi(ens, n, opts);
    if (r.status != sdp::Status::optimal) throw validation_error("solver failed");
    gap = r.gap;
    return r.J;
  }
  auto fam = build_comb_family(p);
  auto [comb, ens] = fam.evaluate(cfg.omega);
  if (cfg.experiment == "probe") {
    const auto r = comb_qfi_dual(ens, fam.structure, opts);
    if (r.status != sdp::Status::optimal) throw validation_error("solver failed");
    const auto perf =
        performance_operator(ens, GaugeMatrix{r.h_opt}, fam.structure);
    const auto w = partial_trace(
        perf.op, {fam.structure.all_spaces().back().id});
    const auto probe = optimal_probe(w, fam.structure, cfg.solver);
    if (probe.status != sdp::Status::optimal)
      throw validation_error("probe solver failed");
    gap = r.gap;
    return probe.value;
  }
  const auto r = comb_qfi_dual(ens, fam.structure, opts);
  if (r.status != sdp::Status::optimal) throw validation_error("solver failed");
  gap = r.gap;
  return r.J;
}

int run_experiment(const ExperimentConfig& cfg) {
  std::vector<Row> rows;
  for (Scenario sc : cfg.scenarios)
    for (int n : cfg.n_values)
      for (double t : cfg.t_tot) rows.push_back(Row{sc, n, t, 0, 0, 0, false});

  bool any_failed = false;
  for (auto& row : rows) {
    const auto start = std::chrono::steady_clock::now();
    try {
      row.qfi = run_point(cfg, row.scenario, row.N, row.t_tot, row.gap);
    } catch (const std::exception& e) {
      std::cerr << "solve failed (" << to_string(row.scenario) << ", N=" << row.N
                << ", t_tot=" << row.t_tot << "): " << e.what() << "\n";
      row.failed = true;
      any_failed = true;
    }
    if (cfg.timings)
      row.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  }

  std::ofstream out(cfg.output);
  if (!out) {
    std::cerr << "cannot write output file: " << cfg.output << "\n";
    return 2;
  }
  out << "experiment,scenario,interaction,N,t_tot,omega,g,qfi,gap,wall_ms\n";
  for (const auto& row : rows) {
    out << cfg.experiment << ',' << to_string(row.scenario) << ','
        << to_string(cfg.interaction) << ',' << row.N << ',' << fmt(row.t_tot)
        << ',' << fmt(cfg.omega) << ',' << fmt(cfg.g) << ','
        << (row.failed ? "nan" : fmt(row.qfi)) << ','
        << (row.failed ? "nan" : fmt(row.gap)) << ',' << fmt(row.wall_ms) << '\n';
  }
  out.close();
  std::cout << "wrote " << rows.size() << " rows to " << cfg.output;
  if (any_failed) std::cout << " (some solves FAILED)";
  std::cout << "\n";
  return any_failed ? 3 : 0;
}

int run_validate(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot open comb file: " << path << "\n";
    return 2;
  }
  Comb c;
  try {
    c = read_comb(in);
  } catch (const std::exception& e) {
    std::cerr << "cannot parse comb file: " << e.what() << "\n";
    return 2;
  }
  const auto report = validate_comb(c.op, c.structure, 1e-8);
  std::cout << "teeth: " << c.structure.N() << ", dim: " << c.op.dim()
            << ", max residual: " << fmt(report.max_residual) << "\n";
  for (const auto& m : report.messages) std::cout << "  " << m << "\n";
  std::cout << (report.passed ? "VALID" : "INVALID") << "\n";
  return report.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fisher information of parametrized quantum combs"};
  app.require_subcommand(1);

  std::string comb_file;
  auto* validate = app.add_subcommand("validate", "check a comb file");
  validate->add_option("comb-file", comb_file, "comb file to check")->required();

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  std::vector<CLI::App*> runners;
  for (const char* name : {"qfi", "sweep", "probe", "variational", "channel-ncopy"}) {
    auto* sub = app.add_subcommand(name, std::string("run a ") + name + " experiment");
    sub->add_option("config", config_path, "JSON config file")->required();
    sub->add_option("--seed", seed_override, "override the config seed");
    runners.push_back(sub);
  }

  CLI11_PARSE(app, argc, argv);

  if (const char* workers = std::getenv("COMBQFI_WORKERS")) {
#ifdef _OPENMP
    const int w = std::atoi(workers);
    if (w > 0) omp_set_num_threads(w);
#endif
  }

  if (validate->parsed()) return run_validate(comb_file);
  for (auto* sub : runners)
    if (sub->parsed()) {
      try {
        return run_experiment(
            parse_config(config_path, sub->get_name(), seed_override));
      } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
      }
    }
  return 2;
}
