#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergofit/erm.hpp"
#include "ergofit/meanwidth.hpp"

namespace ergofit {

// Config file rejected: carries the offending key path, e.g. "$.family.id".
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FamilySpec {
  std::string id;  // logistic | rotation | identity_vs_chaos | thue_morse | fibonacci
  double a_lo = 0.0, a_hi = 4.0;  // logistic
  int a_grid = 0;                 // 0 = keep the constructor default
  int dim = 1;                    // rotation torus dimension
  std::vector<std::string> dictionary = {"cosine"};  // rotation observations
  int alpha_grid = 0;

  ModelFamily build() const;  // throws ConfigError on unknown ids/dictionary names
};

struct BudgetSpec {
  std::size_t cell_budget = 200000000;         // complexity cells, |sample|*n
  std::size_t eval_budget = std::size_t{1} << 32;  // loss-term evaluations per fit
  int replicates = 64;                         // Monte Carlo replicates
  int x_grid_points = 1024;                    // initial-state grid per coordinate
  int theta_grid = 0;                          // 0 = per-axis defaults
  int mc_samples = 20000;                      // auxiliary-loss Monte Carlo
};

// One experiment run, reproducible from (config, seeds). Parsed from JSON
// with a strict schema: version checked, unknown keys rejected with their
// path, required keys per experiment enforced at dispatch.
struct ExperimentConfig {
  int version = 1;
  std::string experiment;
  FamilySpec family;
  NoiseModel noise;
  std::vector<int> horizons;
  std::vector<double> radii;
  std::vector<std::uint64_t> seeds = {1};
  LossSpec loss;
  std::string output_dir = "out";
  BudgetSpec budget;

  // experiment-specific knobs
  std::string optimizer = "grid_refine";  // mean_width / sudakov
  double a_star = 3.2;                    // consistency_subcritical ground truth
  double sigma_signal = 0.5;              // amplitude knobs where applicable

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
  std::string to_json() const;  // canonical echo, key order fixed
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

struct Verdict {
  std::string id;      // keyed to acceptance criteria, e.g. "crit5.pass_rate"
  bool pass = false;
  std::string detail;  // the numbers behind the verdict
};

// Plot-ready long format: one (x, y) point per row with series/seed labels.
struct LongRow {
  double x = 0.0;
  double y = 0.0;
  std::string series;
  std::uint64_t seed = 0;
};

struct RunReport {
  ExperimentConfig config;
  std::vector<Table> tables;
  std::vector<LongRow> long_rows;
  std::vector<Verdict> verdicts;
  bool budget_exceeded = false;

  bool all_pass() const;
};

extern const std::vector<std::string> kExperimentNames;

// Dispatches on config.experiment. Deterministic: identical (config, seeds)
// give identical reports for any thread count.
RunReport run_experiment(const ExperimentConfig& cfg);

// report.json plus one CSV per table and long.csv; directories created as
// needed. Throws std::runtime_error on I/O failure. No timestamps.
void emit_report(const RunReport& rep, const std::string& out_dir);

std::string report_json(const RunReport& rep);
std::string table_csv(const Table& t);

}  // namespace ergofit
