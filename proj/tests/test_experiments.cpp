#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "ergofit/experiments.hpp"

using namespace ergofit;

namespace {

const char* kTinyMeanWidth = R"({
  "version": 1,
  "experiment": "mean_width",
  "family": {"id": "logistic", "a_lo": 4.0, "a_hi": 4.0},
  "noise": {"kind": "gaussian", "sigma": 1.0},
  "horizons": [16, 32],
  "seeds": [1],
  "optimizer": "tracking_oracle",
  "budget": {"replicates": 8},
  "output_dir": "out/tiny"
})";

}  // namespace

TEST_CASE("config round-trips through the canonical echo") {
  auto cfg = ExperimentConfig::from_json_text(kTinyMeanWidth);
  CHECK(cfg.experiment == "mean_width");
  CHECK(cfg.family.id == "logistic");
  CHECK(cfg.noise.sigma == doctest::Approx(1.0));
  CHECK(cfg.horizons == std::vector<int>{16, 32});
  CHECK(cfg.budget.replicates == 8);
  auto echo = ExperimentConfig::from_json_text(cfg.to_json());
  CHECK(echo.to_json() == cfg.to_json());
}

TEST_CASE("unknown keys are rejected with the offending path") {
  std::string text = R"({"version": 1, "experiment": "mean_width",
                         "sigma0_override": 2.5})";
  try {
    ExperimentConfig::from_json_text(text);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("$.sigma0_override") != std::string::npos);
  }

  std::string nested = R"({"version": 1, "experiment": "mean_width",
                           "family": {"id": "logistic", "b_hi": 1.0}})";
  try {
    ExperimentConfig::from_json_text(nested);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("$.family.b_hi") != std::string::npos);
  }
}

TEST_CASE("version field is required and checked") {
  CHECK_THROWS_AS(ExperimentConfig::from_json_text(R"({"experiment": "mean_width"})"),
                  ConfigError);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json_text(R"({"version": 2, "experiment": "mean_width"})"),
      ConfigError);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json_text(R"({"version": 1, "experiment": "no_such"})"),
      ConfigError);
}

TEST_CASE("same config and seed give a byte-identical report") {
  auto cfg = ExperimentConfig::from_json_text(kTinyMeanWidth);
  auto r1 = run_experiment(cfg);
  auto r2 = run_experiment(cfg);
  CHECK(report_json(r1) == report_json(r2));
}

TEST_CASE("mean_width table has the documented CSV columns") {
  auto cfg = ExperimentConfig::from_json_text(kTinyMeanWidth);
  auto rep = run_experiment(cfg);
  REQUIRE(!rep.tables.empty());
  const Table* mw = nullptr;
  for (const auto& t : rep.tables)
    if (t.name == "mean_width") mw = &t;
  REQUIRE(mw != nullptr);
  CHECK(mw->columns == std::vector<std::string>{"n", "kappa_over_n", "stderr", "optimizer"});
  auto csv = table_csv(*mw);
  CHECK(csv.substr(0, csv.find('\n')) == "n,kappa_over_n,stderr,optimizer");
}

TEST_CASE("emit_report writes report.json, table CSVs, and long.csv") {
  auto cfg = ExperimentConfig::from_json_text(kTinyMeanWidth);
  auto rep = run_experiment(cfg);
  auto dir = std::filesystem::temp_directory_path() / "ergofit_emit_test";
  std::filesystem::remove_all(dir);
  emit_report(rep, dir.string());
  CHECK(std::filesystem::exists(dir / "report.json"));
  CHECK(std::filesystem::exists(dir / "mean_width.csv"));
  CHECK(std::filesystem::exists(dir / "long.csv"));
  std::ifstream lf(dir / "long.csv");
  std::string header;
  std::getline(lf, header);
  CHECK(header == "x,y,series,seed");
  std::filesystem::remove_all(dir);
}

TEST_CASE("empty results emit header-only CSV and valid JSON with empty arrays") {
  RunReport rep;
  rep.config = ExperimentConfig::from_json_text(kTinyMeanWidth);
  rep.tables.push_back({"empty", {"a", "b"}, {}});
  auto csv = table_csv(rep.tables[0]);
  CHECK(csv == "a,b\n");
  auto j = report_json(rep);
  CHECK(j.find("\"verdicts\": []") != std::string::npos);

  auto dir = std::filesystem::temp_directory_path() / "ergofit_empty_test";
  std::filesystem::remove_all(dir);
  emit_report(rep, dir.string());
  std::ifstream lf(dir / "long.csv");
  std::string header, extra;
  std::getline(lf, header);
  CHECK(header == "x,y,series,seed");
  CHECK_FALSE(std::getline(lf, extra));
  std::filesystem::remove_all(dir);
}

TEST_CASE("unknown family id is a config error") {
  std::string text = R"({"version": 1, "experiment": "mean_width",
                         "horizons": [16], "family": {"id": "henon"}})";
  auto cfg = ExperimentConfig::from_json_text(text);
  CHECK_THROWS_AS(run_experiment(cfg), ConfigError);
}
