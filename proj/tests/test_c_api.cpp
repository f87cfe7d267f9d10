#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>

#include "tensegrity/tensegrity.h"

namespace {

std::string temp_dir(const char* name) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(p);
  return p.string();
}

struct SessionGuard {
  tg_session* s = nullptr;
  ~SessionGuard() { tg_session_destroy(s); }
};

}  // namespace

TEST(CApi, VersionAndStatusStrings) {
  EXPECT_STRNE(tg_version(), "");
  EXPECT_STREQ(tg_status_string(TG_OK), "ok");
  EXPECT_STRNE(tg_status_string(TG_CONFIG), "unknown status");
  EXPECT_STREQ(tg_status_string(static_cast<tg_status>(999)), "unknown status");
}

TEST(CApi, ModelQueries) {
  tg_model* m = nullptr;
  ASSERT_EQ(tg_model_create(0.2, &m), TG_OK);
  double p[3];
  ASSERT_EQ(tg_model_node(m, 0, p), TG_OK);
  EXPECT_DOUBLE_EQ(p[0], 0.1);
  int nodes[3];
  ASSERT_EQ(tg_model_face_nodes(m, 1, nodes), TG_OK);
  EXPECT_EQ(nodes[0], 7);
  double n[3];
  ASSERT_EQ(tg_model_face_normal(m, 1, n), TG_OK);
  EXPECT_NEAR(n[2], 2.0 / std::sqrt(5.0), 1e-12);
  int strings = 0;
  ASSERT_EQ(tg_model_face_strings(m, 3, &strings), TG_OK);
  EXPECT_EQ(strings, 3);
  int face = 0;
  ASSERT_EQ(tg_identify_face(m, 0.0, std::atan2(1.0, 2.0), &face), TG_OK);
  EXPECT_EQ(face, 1);

  EXPECT_EQ(tg_model_face_nodes(m, 21, nodes), TG_OUT_OF_RANGE);
  EXPECT_NE(std::string(tg_last_error()).find("21"), std::string::npos);
  EXPECT_EQ(tg_model_node(m, 0, nullptr), TG_NULL_POINTER);
  tg_model_destroy(m);

  EXPECT_EQ(tg_model_create(-1.0, &m), TG_INVALID_ARGUMENT);
  EXPECT_EQ(m, nullptr);
  tg_model_destroy(nullptr);
}

TEST(CApi, SessionConfigAndHash) {
  SessionGuard g;
  ASSERT_EQ(tg_session_create("{\"seed\": 5}", &g.s), TG_OK);
  size_t needed = 0;
  ASSERT_EQ(tg_session_config_hash(g.s, nullptr, 0, &needed), TG_OK);
  EXPECT_EQ(needed, 17u);
  char small[4];
  EXPECT_EQ(tg_session_config_hash(g.s, small, sizeof small, &needed), TG_BUFFER_TOO_SMALL);
  char hash[17];
  ASSERT_EQ(tg_session_config_hash(g.s, hash, sizeof hash, nullptr), TG_OK);
  EXPECT_EQ(std::strlen(hash), 16u);

  ASSERT_EQ(tg_session_set_seed(g.s, 6), TG_OK);
  char hash2[17];
  tg_session_config_hash(g.s, hash2, sizeof hash2, nullptr);
  EXPECT_STRNE(hash, hash2);

  ASSERT_EQ(tg_session_config_json(g.s, nullptr, 0, &needed), TG_OK);
  std::string json(needed, '\0');
  ASSERT_EQ(tg_session_config_json(g.s, json.data(), needed, nullptr), TG_OK);
  EXPECT_NE(json.find("\"seed\": 6"), std::string::npos);

  EXPECT_EQ(tg_session_set_output_dir(g.s, ""), TG_INVALID_ARGUMENT);
  tg_session* bad = nullptr;
  EXPECT_EQ(tg_session_create("{\"nope\": 1}", &bad), TG_CONFIG);
  EXPECT_EQ(bad, nullptr);
  EXPECT_EQ(tg_session_create_from_file("/nonexistent.json", &bad), TG_IO);
}

TEST(CApi, Commands) {
  SessionGuard g;
  ASSERT_EQ(tg_session_create_default(&g.s), TG_OK);
  const std::string dir = temp_dir("tg_capi_test");
  ASSERT_EQ(tg_session_set_output_dir(g.s, dir.c_str()), TG_OK);

  tg_analysis a{};
  ASSERT_EQ(tg_analyze(g.s, &a), TG_OK);
  EXPECT_EQ(a.cases, 14);
  EXPECT_NEAR(a.total_force, 266.175, 1e-9);
  EXPECT_TRUE(std::filesystem::exists(dir + "/sweep.csv"));

  tg_plan_summary p{};
  ASSERT_EQ(tg_plan(g.s, 20, &p), TG_OK);
  EXPECT_EQ(p.steps, 5);
  EXPECT_EQ(p.face_count, 6);
  EXPECT_EQ(p.faces[5], 1);
  EXPECT_EQ(tg_plan(g.s, 0, &p), TG_OUT_OF_RANGE);

  tg_scenario sc;
  ASSERT_EQ(tg_scenario_from_name("flight-step", &sc), TG_OK);
  EXPECT_EQ(sc, TG_SCENARIO_FLIGHT_STEP);
  EXPECT_EQ(tg_scenario_from_name("nope", &sc), TG_INVALID_ARGUMENT);

  tg_sim_summary s{};
  ASSERT_EQ(tg_simulate(g.s, TG_SCENARIO_REORIENT, 20, &s), TG_OK);
  EXPECT_TRUE(s.reached);
  EXPECT_TRUE(s.followed_plan);
  EXPECT_EQ(s.max_thrust_while_cut, 0.0);
  ASSERT_EQ(tg_simulate(g.s, TG_SCENARIO_WALL_IMPACT, 20, &s), TG_OK);
  EXPECT_NEAR(s.impact_force, 266.175, 1e-9);
  EXPECT_TRUE(std::isnan(s.damping));
  EXPECT_EQ(tg_simulate(g.s, static_cast<tg_scenario>(9), 20, &s), TG_INVALID_ARGUMENT);

  int n = 0;
  ASSERT_EQ(tg_report(g.s, &n), TG_OK);
  EXPECT_EQ(n, 6);

  double f = 0.0;
  ASSERT_EQ(tg_estimate_impact_force(0.252, 6.5, 0.02, &f), TG_OK);
  EXPECT_NEAR(f, 266.175, 1e-9);
  EXPECT_EQ(tg_estimate_impact_force(0.252, 6.5, 0.0, &f), TG_INVALID_ARGUMENT);
  EXPECT_STRNE(tg_last_error(), "");
  std::filesystem::remove_all(dir);
}
