#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>
#include <omp.h>

#include "ergofit/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"ergofit: fits dynamical models by ERM and reproduces the "
               "entropy / mean-width / distortion phenomena behind it"};
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int threads = 0;
  bool list = false;
  auto* seed_opt = app.add_option("--seed", seed, "override config seeds with a single seed");
  app.add_option("--config", config_path, "experiment config JSON path");
  app.add_option("--out", out_dir, "output directory (overrides config)");
  app.add_option("--threads", threads, "OpenMP thread count (0 = runtime default)");
  app.add_flag("--list-experiments", list, "print experiment names and exit");
  CLI11_PARSE(app, argc, argv);

  if (list) {
    for (const auto& name : ergofit::kExperimentNames) std::printf("%s\n", name.c_str());
    return 0;
  }
  if (config_path.empty()) {
    std::fprintf(stderr, "error: --config is required (see --help)\n");
    return 2;
  }
  if (threads > 0) omp_set_num_threads(threads);

  ergofit::ExperimentConfig cfg;
  try {
    cfg = ergofit::ExperimentConfig::from_json_file(config_path);
  } catch (const ergofit::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }
  if (seed_opt->count() > 0) cfg.seeds = {seed};
  if (!out_dir.empty()) cfg.output_dir = out_dir;

  try {
    ergofit::RunReport rep = ergofit::run_experiment(cfg);
    ergofit::emit_report(rep, cfg.output_dir);
    for (const auto& v : rep.verdicts)
      std::printf("%-28s %s  %s\n", v.id.c_str(), v.pass ? "pass" : "FAIL",
                  v.detail.c_str());
    if (rep.budget_exceeded) {
      std::fprintf(stderr, "budget cap exceeded; report is partial\n");
      return 3;
    }
    return rep.all_pass() ? 0 : 1;
  } catch (const ergofit::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const ergofit::BudgetError& e) {
    std::fprintf(stderr, "budget error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
