#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "tensegrity/pipeline.hpp"

using namespace tensegrity;
using nlohmann::json;

namespace {

const OutputFile& file(const std::vector<OutputFile>& files, const std::string& name) {
  for (const auto& f : files)
    if (f.name == name) return f;
  throw std::runtime_error("missing " + name);
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    rows.push_back(cells);
  }
  return rows;
}

void expect_hash_everywhere(const std::vector<OutputFile>& files, const std::string& hash) {
  for (const auto& f : files) {
    EXPECT_NE(f.content.find(hash), std::string::npos) << f.name;
  }
}

}  // namespace

TEST(Analyze, FilesAndHash) {
  const RunConfig c;
  const auto r = cmd_analyze(c);
  ASSERT_EQ(r.files.size(), 3u);
  expect_hash_everywhere(r.files, config_hash(c));
  EXPECT_NEAR(r.total_force, 266.175, 1e-9);
  const auto rows = csv_rows(file(r.files, "sweep.csv").content);
  EXPECT_EQ(rows.size(), 15u);  // header + 14 cases
  const auto members = csv_rows(file(r.files, "members.csv").content);
  EXPECT_EQ(members.size(), 1u + 14u * 30u);
}

TEST(Analyze, MarginsReproduceCheckComponents) {
  const RunConfig c;
  const auto r = cmd_analyze(c);
  const auto mat = c.materials();
  const auto direct = check_components(r.sweep.max_tension, r.sweep.max_compression, mat);
  const auto doc = json::parse(file(r.files, "summary.json").content);
  EXPECT_EQ(doc["verdict"]["string_yield"]["margin"].get<double>(), direct.string_yield.margin);
  EXPECT_EQ(doc["verdict"]["rod_yield"]["margin"].get<double>(), direct.rod_yield.margin);
  EXPECT_EQ(doc["verdict"]["rod_buckling"]["margin"].get<double>(), direct.rod_buckling.margin);
  EXPECT_EQ(doc["verdict"]["passed"].get<bool>(), direct.passed());

  const auto rows = csv_rows(file(r.files, "sweep.csv").content);
  for (size_t i = 1; i < rows.size(); ++i) {
    const auto& sol = r.sweep.cases[i - 1].solution;
    const auto v = check_components(sol.max_tension, sol.max_compression, mat);
    EXPECT_EQ(std::strtod(rows[i][8].c_str(), nullptr), v.string_yield.margin);
    EXPECT_EQ(std::strtod(rows[i][9].c_str(), nullptr), v.rod_yield.margin);
    EXPECT_EQ(std::strtod(rows[i][10].c_str(), nullptr), v.rod_buckling.margin);
    EXPECT_EQ(std::strtod(rows[i][6].c_str(), nullptr), sol.max_tension);
  }
}

TEST(Analyze, WeakStringFails) {
  RunConfig c;
  c.string.yield_strength = 1e6;
  const auto r = cmd_analyze(c);
  EXPECT_FALSE(r.verdict.passed());
  EXPECT_FALSE(r.verdict.string_yield.passed);
  EXPECT_LT(r.verdict.string_yield.margin, 0.01);
}

TEST(Analyze, StrongDesignPasses) {
  RunConfig c;
  c.impact.force = 20.0;
  const auto r = cmd_analyze(c);
  EXPECT_TRUE(r.verdict.passed());
  const auto doc = json::parse(file(r.files, "summary.json").content);
  EXPECT_EQ(doc["force_source"], "configured");
}

TEST(Plan, FilesAndCost) {
  const RunConfig c;
  const auto r = cmd_plan(c, 20);
  expect_hash_everywhere(r.files, config_hash(c));
  const std::string& text = file(r.files, "plan_F20.txt").content;
  EXPECT_NE(text.find("faces F20 F16 F10 F4 F2 F1"), std::string::npos);
  EXPECT_NE(text.find("steps 5"), std::string::npos);
  const auto one = cmd_plan(c, 1);
  EXPECT_TRUE(one.plan.steps.empty());
  EXPECT_NE(file(one.files, "plan_F1.txt").content.find("steps 0"), std::string::npos);
  for (FaceId f = 1; f <= kFaceCount; ++f) EXPECT_NO_THROW(cmd_plan(c, f));
}

TEST(Plan, DisconnectedConfigErrors) {
  RunConfig c;
  c.planning.special_moves = std::vector<SpecialMove>{};
  try {
    cmd_plan(c, 20);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DisconnectedGraph);
  }
}

TEST(Simulate, ScenarioNames) {
  for (auto s : {Scenario::Reorient, Scenario::FlightStep, Scenario::WallImpact, Scenario::MonteCarlo}) {
    EXPECT_EQ(parse_scenario(to_string(s)), s);
  }
  EXPECT_THROW(parse_scenario("hover"), Error);
}

TEST(Simulate, ReorientFromTwenty) {
  const RunConfig c;
  const auto r = cmd_simulate(c, Scenario::Reorient, 20);
  ASSERT_TRUE(r.reorientation);
  EXPECT_TRUE(r.ok);
  expect_hash_everywhere(r.files, config_hash(c));
  const auto doc = json::parse(file(r.files, "reorient_F20_summary.json").content);
  EXPECT_TRUE(doc["reached"].get<bool>());
  EXPECT_EQ(doc["contacts"].back().get<int>(), 1);
  std::istringstream events(file(r.files, "reorient_F20_events.jsonl").content);
  std::string line;
  int n = 0;
  while (std::getline(events, line)) {
    EXPECT_NO_THROW(json::parse(line));
    ++n;
  }
  EXPECT_GT(n, 5);
}

TEST(Simulate, FlightStepEnvelope) {
  const RunConfig c;
  const auto r = cmd_simulate(c, Scenario::FlightStep, 20);
  EXPECT_TRUE(r.ok);
  ASSERT_TRUE(r.damping_point_mass);
  EXPECT_NEAR(*r.damping_point_mass, c.gains.zeta_p, 0.1 * c.gains.zeta_p);
  const auto doc = json::parse(file(r.files, "flight_step_summary.json").content);
  EXPECT_TRUE(doc["within_envelope"].get<bool>());
}

TEST(Simulate, WallImpactEmitsForceAndVerdict) {
  const RunConfig c;
  const auto r = cmd_simulate(c, Scenario::WallImpact, 20);
  ASSERT_TRUE(r.wall_impact);
  const auto doc = json::parse(file(r.files, "wall_impact.json").content);
  EXPECT_NEAR(doc["force_N"].get<double>(), 266.175, 1e-9);
  EXPECT_EQ(doc["verdict"]["passed"].get<bool>(), r.wall_impact->verdict.passed());
  EXPECT_EQ(r.ok, r.wall_impact->verdict.passed());
}

TEST(Simulate, DeterministicOutputs) {
  RunConfig c;
  c.monte_carlo_trials = 5;
  for (auto s : {Scenario::Reorient, Scenario::MonteCarlo, Scenario::FlightStep, Scenario::WallImpact}) {
    const auto a = cmd_simulate(c, s, 17);
    const auto b = cmd_simulate(c, s, 17);
    ASSERT_EQ(a.files.size(), b.files.size());
    for (size_t i = 0; i < a.files.size(); ++i) {
      EXPECT_EQ(a.files[i].name, b.files[i].name);
      EXPECT_TRUE(a.files[i].content == b.files[i].content) << a.files[i].name;
    }
  }
}

TEST(Report, FilesAndConsistency) {
  const RunConfig c;
  const auto files = cmd_report(c);
  ASSERT_EQ(files.size(), 6u);
  expect_hash_everywhere(files, config_hash(c));
  const auto cons = json::parse(file(files, "consistency.json").content);
  EXPECT_NEAR(cons["thrust_to_weight"].get<double>(), 3.44, 0.01);
  EXPECT_NEAR(cons["frame_mass_fraction"].get<double>(), 0.198, 0.001);
  EXPECT_EQ(cons["pruned_edges"].size(), 10u);
  // The written config reloads to the same hash.
  EXPECT_EQ(config_hash(parse_config(file(files, "config.json").content)), config_hash(c));
  const auto faces = csv_rows(file(files, "faces.csv").content);
  EXPECT_EQ(faces.size(), 21u);
  const std::string& plans = file(files, "plans.txt").content;
  EXPECT_NE(plans.find("F20: F20 F16 F10 F4 F2 F1"), std::string::npos);
}

TEST(Outputs, WriteAndFail) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "tg_pipeline_test";
  fs::remove_all(dir);
  write_outputs(dir.string(), {{"a.txt", "hello\n"}});
  std::ifstream in(dir / "a.txt");
  std::string s;
  std::getline(in, s);
  EXPECT_EQ(s, "hello");
  try {
    write_outputs((dir / "a.txt" / "sub").string(), {{"b.txt", "x"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
  fs::remove_all(dir);
}
