#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>

#include "qspr/experiment.hpp"

using namespace qspr;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config(const std::string& dir) {
  ExperimentConfig c;
  c.case_name = "kausaite2007";
  c.states = {{StateKind::TMC}, {StateKind::TMF}, {StateKind::TMSD, 4.5}};
  c.N = {10.0};
  c.nu = {100, 1000};
  c.m = {2};
  c.p = 6;
  c.seed = 42;
  c.output_dir = (fs::temp_directory_path() / dir).string();
  c.map.T = {0.2, 0.45, 0.8};
  c.map.N = {10.0, 1000.0};
  return c;
}

}  // namespace

TEST(Config, Validation) {
  auto c = small_config("qspr_cfg");
  EXPECT_NO_THROW(c.validate());
  auto bad = c;
  bad.p = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = c;
  bad.N.clear();
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = c;
  bad.states.clear();
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = c;
  bad.case_name = "custom";
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = c;
  bad.case_name = "nope";
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = c;
  bad.N = {1.0};  // below G - 1 for the TMSD entry
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Config, CustomCaseNeedsOverrides) {
  auto c = small_config("qspr_custom");
  c.case_name = "custom";
  const auto k = kausaite2007();
  c.stack = k.stack;
  c.kinetics = k.kinetics;
  c.angular_amplitude_deg = k.angular_amplitude_deg;
  c.grid = k.grid;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.resolve().stack.metal_thickness_nm, 50.0);
}

TEST(Config, JsonRoundTrip) {
  auto c = small_config("qspr_json");
  c.t_mid = 0.45;
  c.scenario_mode = ScenarioMode::Optimized;
  c.kinetics = KineticParameters{1e4, 8e-3, 3e-7, 1100.0};
  c.angular_amplitude_deg = 0.7;
  const auto back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(back.states, c.states);
  // A manifest is accepted in place of a config.
  const nlohmann::json manifest{{"config", to_json(c)}, {"version", "x"}};
  EXPECT_EQ(to_json(config_from_json(manifest)), to_json(c));
  EXPECT_THROW(config_from_json(nlohmann::json{{"states", {"TMX"}}}), std::invalid_argument);
  EXPECT_THROW(config_from_json(nlohmann::json{{"p", "many"}}), std::invalid_argument);
}

TEST(RunExperiment, WritesCompleteArtifacts) {
  const auto c = small_config("qspr_run_a");
  fs::remove_all(c.output_dir);
  const auto out = run_experiment(c);
  for (const char* f : {"sensorgram_ideal.csv", "sensorgram_sample.csv", "results.csv", "manifest.json",
                        "midpoint_map_TMF.csv", "midpoint_map_TMSD.csv"})
    EXPECT_TRUE(fs::exists(fs::path(c.output_dir) / f)) << f;
  EXPECT_FALSE(fs::exists(fs::path(c.output_dir) / "midpoint_map_TMC.csv"));

  // Every (state, sweep point, parameter) exactly once.
  std::map<std::tuple<std::string, long long, std::string>, int> seen;
  std::istringstream csv(slurp(fs::path(c.output_dir) / "results.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, kResultsHeader);
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    ASSERT_EQ(f.size(), 16u);
    ++seen[{f[1], std::stoll(f[4]), f[7]}];
  }
  EXPECT_EQ(rows, 3 * 2 * 3);
  EXPECT_EQ(seen.size(), 18u);
  for (const auto& [k, n] : seen) EXPECT_EQ(n, 1);
  for (const auto& r : out.rows)
    if (r.state == StateKind::TMC) EXPECT_EQ(r.R_k, 1.0);

  const auto manifest = nlohmann::json::parse(slurp(fs::path(c.output_dir) / "manifest.json"));
  EXPECT_EQ(manifest.at("results_schema_version"), kResultsSchemaVersion);
  EXPECT_EQ(manifest.at("seed"), 42);
  EXPECT_EQ(manifest.at("resolved").at("nu"), (std::vector<long long>{100, 1000}));
}

TEST(RunExperiment, Reproducible) {
  auto a = small_config("qspr_run_b1");
  auto b = small_config("qspr_run_b2");
  run_experiment(a);
  run_experiment(b, RunOptions{2});
  for (const char* f : {"results.csv", "sensorgram_ideal.csv", "sensorgram_sample.csv", "midpoint_map_TMF.csv"})
    EXPECT_EQ(slurp(fs::path(a.output_dir) / f), slurp(fs::path(b.output_dir) / f)) << f;

  // Re-running from the manifest reproduces the same outputs.
  auto c = load_config(fs::path(a.output_dir) / "manifest.json");
  c.output_dir = (fs::temp_directory_path() / "qspr_run_b3").string();
  run_experiment(c);
  EXPECT_EQ(slurp(fs::path(a.output_dir) / "results.csv"), slurp(fs::path(c.output_dir) / "results.csv"));
}

TEST(RunExperiment, TmfBeatsTmc) {
  auto c = small_config("qspr_run_c");
  c.states = {{StateKind::TMC}, {StateKind::TMF}};
  c.m = {10};
  c.p = 200;
  const auto out = run_experiment(c);
  std::map<std::tuple<long long, std::string>, double> tmc;
  for (const auto& r : out.rows)
    if (r.state == StateKind::TMC) tmc[{r.nu, r.parameter}] = r.precision;
  int compared = 0;
  for (const auto& r : out.rows)
    if (r.state == StateKind::TMF) {
      EXPECT_LT(r.precision, (tmc[{r.nu, r.parameter}])) << r.parameter << " nu=" << r.nu;
      ++compared;
    }
  EXPECT_EQ(compared, 6);
  EXPECT_TRUE(out.unreliable.empty());
}
