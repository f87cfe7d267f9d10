// Command-line front end. Talks to the library only through the C API.
//
// Exit codes: 0 success, 2 a design check (or scenario check) failed,
// 1 any error.

#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "tensegrity/tensegrity.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitCheckFailed = 2;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON run configuration (defaults when omitted)");
  cmd->add_option("--seed", c.seed, "Random seed (overrides the config)");
  cmd->add_option("--out", c.out, "Output directory (overrides the config)");
}

int report_error(tg_status st) {
  std::fprintf(stderr, "error: %s: %s\n", tg_status_string(st), tg_last_error());
  return kExitError;
}

class Session {
 public:
  ~Session() { tg_session_destroy(s_); }
  tg_status open(const Common& c) {
    tg_status st = c.config.empty() ? tg_session_create_default(&s_)
                                    : tg_session_create_from_file(c.config.c_str(), &s_);
    if (st != TG_OK) return st;
    if (c.seed && (st = tg_session_set_seed(s_, *c.seed)) != TG_OK) return st;
    if (!c.out.empty() && (st = tg_session_set_output_dir(s_, c.out.c_str())) != TG_OK) return st;
    return TG_OK;
  }
  tg_session* get() const { return s_; }
  std::string hash() const {
    char buf[32] = {0};
    tg_session_config_hash(s_, buf, sizeof buf, nullptr);
    return buf;
  }
  std::string out_dir() const {
    size_t n = 0;
    tg_session_output_dir(s_, nullptr, 0, &n);
    std::string s(n, '\0');
    tg_session_output_dir(s_, s.data(), n, &n);
    s.resize(n ? n - 1 : 0);
    return s;
  }

 private:
  tg_session* s_ = nullptr;
};

const char* pass_fail(int passed) { return passed ? "pass" : "FAIL"; }

void print_margins(const tg_margins& m) {
  std::printf("  string yield  margin %.4g  %s\n", m.string_yield, pass_fail(m.string_passed));
  std::printf("  rod yield     margin %.4g  %s\n", m.rod_yield, pass_fail(m.rod_yield_passed));
  std::printf("  rod buckling  margin %.4g  %s\n", m.rod_buckling, pass_fail(m.rod_buckling_passed));
}

int run_analyze(const Common& c) {
  Session s;
  tg_status st = s.open(c);
  if (st != TG_OK) return report_error(st);
  tg_analysis a{};
  if ((st = tg_analyze(s.get(), &a)) != TG_OK) return report_error(st);
  std::printf("config %s\n", s.hash().c_str());
  std::printf("F_max %.4f N, %d cases, T_max %.4f N, C_max %.4f N\n", a.total_force, a.cases,
              a.max_tension, a.max_compression);
  print_margins(a.margins);
  std::printf("design %s; wrote sweep.csv, members.csv, summary.json to %s\n", a.passed ? "passes" : "FAILS",
              s.out_dir().c_str());
  return a.passed ? kExitOk : kExitCheckFailed;
}

int run_plan(const Common& c, int start) {
  Session s;
  tg_status st = s.open(c);
  if (st != TG_OK) return report_error(st);
  tg_plan_summary p{};
  if ((st = tg_plan(s.get(), start, &p)) != TG_OK) return report_error(st);
  std::printf("config %s\n", s.hash().c_str());
  std::printf("F%d:", p.start);
  for (int i = 0; i < p.face_count && i < 32; ++i) std::printf(" F%d", p.faces[i]);
  std::printf("  (%d steps, cost %.4f rad)\n", p.steps, p.cost);
  return kExitOk;
}

int run_simulate(const Common& c, const std::string& scenario_name, int start) {
  tg_scenario scenario;
  tg_status st = tg_scenario_from_name(scenario_name.c_str(), &scenario);
  if (st != TG_OK) return report_error(st);
  Session s;
  if ((st = s.open(c)) != TG_OK) return report_error(st);
  tg_sim_summary r{};
  if ((st = tg_simulate(s.get(), scenario, start, &r)) != TG_OK) return report_error(st);
  std::printf("config %s\n", s.hash().c_str());
  switch (scenario) {
    case TG_SCENARIO_REORIENT:
      std::printf("start F%d: %s in %.3f s, %s plan, %d replans, max thrust while cut %.3g N\n",
                  start, r.reached ? "reached F1" : "did not reach F1", r.time,
                  r.followed_plan ? "followed" : "deviated from", r.replans,
                  r.max_thrust_while_cut);
      break;
    case TG_SCENARIO_MONTE_CARLO:
      std::printf("%d / %d trials reached F1\n", r.trials_reached, r.trials);
      break;
    case TG_SCENARIO_FLIGHT_STEP:
      std::printf("damping estimate %.4f (point mass %.4f)\n", r.damping, r.damping_point_mass);
      break;
    case TG_SCENARIO_WALL_IMPACT:
      std::printf("F_max %.4f N\n", r.impact_force);
      print_margins(r.margins);
      break;
  }
  std::printf("check %s; outputs in %s\n", r.ok ? "passes" : "FAILS", s.out_dir().c_str());
  return r.ok ? kExitOk : kExitCheckFailed;
}

int run_report(const Common& c) {
  Session s;
  tg_status st = s.open(c);
  if (st != TG_OK) return report_error(st);
  int n = 0;
  if ((st = tg_report(s.get(), &n)) != TG_OK) return report_error(st);
  std::printf("config %s\nwrote %d files to %s\n", s.hash().c_str(), n, s.out_dir().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensegrity aerial vehicle design and reorientation toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tg_version()));

  Common common;
  int start = 20;
  std::string scenario = "reorient";

  auto* analyze = app.add_subcommand("analyze", "Stress sweep and component checks");
  add_common(analyze, common);

  auto* plan = app.add_subcommand("plan", "Reorientation path to F1");
  add_common(plan, common);
  plan->add_option("--start-face", start, "Start face, 1..20")->check(CLI::Range(1, 20));

  auto* simulate = app.add_subcommand("simulate", "Run a simulation scenario");
  add_common(simulate, common);
  simulate->add_option("--start-face", start, "Start face for reorient, 1..20")
      ->check(CLI::Range(1, 20));
  simulate->add_option("--scenario", scenario, "reorient | flight-step | wall-impact | monte-carlo");

  auto* report = app.add_subcommand("report", "Geometry, graph, plans and consistency tables");
  add_common(report, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  if (*analyze) return run_analyze(common);
  if (*plan) return run_plan(common, start);
  if (*simulate) return run_simulate(common, scenario, start);
  if (*report) return run_report(common);
  return kExitError;
}
