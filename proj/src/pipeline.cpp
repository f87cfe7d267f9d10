#include "tensegrity/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>

namespace tensegrity {

namespace {

using nlohmann::json;

// Shortest representation that reads back to the same double.
std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, end);
}

std::string join(const std::vector<int>& v, const char* sep) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(v[i]);
  }
  return out;
}

// 0-based member indices as the 1-based names used in members.csv.
std::string member_names(const char* prefix, const std::vector<int>& idx) {
  std::string out;
  for (int i : idx) out += (out.empty() ? "" : " ") + (prefix + std::to_string(i + 1));
  return out;
}

std::string face_name(FaceId f) { return "F" + std::to_string(f); }

// Infinite margins have no JSON number; they are written as null.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json criterion_json(const CriterionResult& c) {
  return {{"demand_Pa", c.demand},
          {"limit_Pa", c.limit},
          {"margin", finite_or_null(c.margin)},
          {"passed", c.passed}};
}

json verdict_json(const DesignVerdict& v) {
  return {{"string_yield", criterion_json(v.string_yield)},
          {"rod_yield", criterion_json(v.rod_yield)},
          {"rod_buckling", criterion_json(v.rod_buckling)},
          {"buckling_stress_Pa", v.buckling_stress},
          {"passed", v.passed()}};
}

std::string json_file(json doc, const std::string& hash) {
  doc["config_hash"] = hash;
  return doc.dump(2) + "\n";
}

const char* kind_name(FaceKind k) {
  return k == FaceKind::ThreeString ? "three_string" : "two_string";
}

std::string sweep_csv(const SweepReport& report, const MaterialSpec& materials,
                      const std::string& hash) {
  std::string out = "# config_hash=" + hash + "\n";
  out +=
      "case,face_kind,loaded_face,grounded_face,loaded_nodes,total_force_N,max_tension_N,"
      "max_compression_N,string_margin,rod_yield_margin,rod_buckling_margin,max_residual_N,"
      "slack_strings\n";
  for (const auto& c : report.cases) {
    const auto& s = c.solution;
    const auto v = check_components(s.max_tension, s.max_compression, materials);
    out += std::to_string(c.id) + "," + kind_name(c.kind) + "," + std::to_string(c.load.loaded_face) +
           "," + std::to_string(c.load.grounded_face) + "," + join(c.load.loaded_nodes, " ") + "," +
           num(c.load.total_force) + "," + num(s.max_tension) + "," + num(s.max_compression) + "," +
           num(v.string_yield.margin) + "," + num(v.rod_yield.margin) + "," +
           num(v.rod_buckling.margin) + "," + num(s.max_residual) + "," +
           member_names("S", s.slack_strings) + "\n";
  }
  return out;
}

std::string members_csv(const TensegrityModel& model, const SweepReport& report,
                        const std::string& hash) {
  std::string out = "# config_hash=" + hash + "\n";
  out += "case,member,type,node_a,node_b,force_N\n";
  for (const auto& c : report.cases) {
    for (int s = 0; s < kStringCount; ++s) {
      const auto [a, b] = model.strings()[s];
      out += std::to_string(c.id) + ",S" + std::to_string(s + 1) + ",string," + std::to_string(a) +
             "," + std::to_string(b) + "," + num(c.solution.tensions[s]) + "\n";
    }
    for (int r = 0; r < kRodCount; ++r) {
      const auto [a, b] = model.rods()[r];
      // Rods report signed axial force, negative in compression.
      out += std::to_string(c.id) + ",R" + std::to_string(r + 1) + ",rod," + std::to_string(a) + "," +
             std::to_string(b) + "," + num(-c.solution.compressions[r]) + "\n";
    }
  }
  return out;
}

json sweep_summary(const SweepReport& report) {
  return {{"total_force_N", report.total_force},
          {"three_string_face", report.three_string_face},
          {"two_string_face", report.two_string_face},
          {"cases", report.cases.size()},
          {"max_tension_N", report.max_tension},
          {"max_tension_case", report.max_tension_case},
          {"max_compression_N", report.max_compression},
          {"max_compression_case", report.max_compression_case}};
}

std::string move_line(const Move& m) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "F%d -> F%d %s pivot %s angle_deg %.4f weight %.6f", m.from, m.to,
                m.kind == MoveKind::Edge ? "edge" : "node", join(m.pivot_nodes, " ").c_str(),
                m.angle * 180.0 / std::numbers::pi, m.weight);
  return buf;
}

std::string plan_text(const ReorientationPlan& plan, const std::string& hash) {
  std::string out = "# config_hash=" + hash + "\n";
  out += "start " + face_name(plan.start) + "\n";
  out += "goal " + face_name(kGoalFace) + "\n";
  out += "cost_rad " + num(plan.cost) + "\n";
  out += "steps " + std::to_string(plan.steps.size()) + "\n";
  for (size_t i = 0; i < plan.steps.size(); ++i) {
    out += std::to_string(i + 1) + " " + move_line(plan.steps[i]) + "\n";
  }
  std::string faces;
  for (FaceId f : plan.faces()) faces += (faces.empty() ? "" : " ") + face_name(f);
  out += "faces " + faces + "\n";
  return out;
}

std::string graph_dot(const TensegrityModel& model, const ResolvedGraph& g, const std::string& hash) {
  std::string out = "// config_hash=" + hash + "\n";
  out += "graph faces {\n";
  for (FaceId f = 1; f <= kFaceCount; ++f) {
    out += "  " + face_name(f) + " [shape=" + (f == g.graph.goal ? "doublecircle" : "circle") +
           ", kind=" + kind_name(model.face_kind(f)) + "];\n";
  }
  char buf[160];
  for (const auto& m : g.graph.edges) {
    if (m.from > m.to) continue;
    std::snprintf(buf, sizeof buf, "  F%d -- F%d [label=\"%.1f\"];\n", m.from, m.to,
                  m.angle * 180.0 / std::numbers::pi);
    out += buf;
  }
  for (const auto& [a, b] : g.pruned) {
    std::snprintf(buf, sizeof buf, "  F%d -- F%d [style=dashed, color=gray, label=\"pruned\"];\n",
                  std::min(a, b), std::max(a, b));
    out += buf;
  }
  for (const auto& m : g.graph.specials) {
    std::snprintf(buf, sizeof buf, "  F%d -- F%d [dir=forward, color=red, label=\"node %.1f\"];\n",
                  m.from, m.to, m.angle * 180.0 / std::numbers::pi);
    out += buf;
  }
  out += "}\n";
  return out;
}

std::string trajectory_csv(const std::vector<TrajectoryRow>& rows, const std::string& hash) {
  std::string out = "# config_hash=" + hash + "\n";
  out +=
      "t_s,x_m,y_m,z_m,yaw_rad,pitch_rad,roll_rad,wx_rad_s,wy_rad_s,wz_rad_s,est_yaw_rad,"
      "est_pitch_rad,est_roll_rad,contact,identified,phase,command,target,f1_N,f2_N,f3_N,f4_N\n";
  for (const auto& r : rows) {
    out += num(r.t) + "," + num(r.d.x()) + "," + num(r.d.y()) + "," + num(r.d.z()) + "," +
           num(r.euler.x()) + "," + num(r.euler.y()) + "," + num(r.euler.z()) + "," +
           num(r.omega.x()) + "," + num(r.omega.y()) + "," + num(r.omega.z()) + "," +
           num(r.estimate_euler.x()) + "," + num(r.estimate_euler.y()) + "," +
           num(r.estimate_euler.z()) + "," + std::to_string(r.contact) + "," +
           std::to_string(r.identified) + "," + to_string(r.phase) + "," + to_string(r.command) +
           "," + std::to_string(r.target) + "," + num(r.thrusts[0]) + "," + num(r.thrusts[1]) + "," +
           num(r.thrusts[2]) + "," + num(r.thrusts[3]) + "\n";
  }
  return out;
}

std::string events_jsonl(const std::vector<SimEvent>& events, const std::string& hash) {
  std::string out = json{{"kind", "header"}, {"config_hash", hash}}.dump() + "\n";
  for (const auto& e : events) {
    out += json{{"t", e.t},
                {"kind", e.kind},
                {"from", e.from},
                {"to", e.to},
                {"total_thrust", e.total_thrust},
                {"max_abs_thrust", e.max_abs_thrust}}
               .dump() +
           "\n";
  }
  return out;
}

std::string flight_csv(const std::vector<FlightSample>& full, const std::vector<FlightSample>& pm,
                       const std::string& hash) {
  std::string out = "# config_hash=" + hash + "\n";
  out +=
      "t_s,x_m,y_m,z_m,vx_m_s,vy_m_s,vz_m_s,yaw_rad,pitch_rad,roll_rad,f1_N,f2_N,f3_N,f4_N,"
      "point_mass_x_m\n";
  for (size_t i = 0; i < full.size(); ++i) {
    const auto& s = full[i];
    out += num(s.t) + "," + num(s.d.x()) + "," + num(s.d.y()) + "," + num(s.d.z()) + "," +
           num(s.d_dot.x()) + "," + num(s.d_dot.y()) + "," + num(s.d_dot.z()) + "," +
           num(s.euler.x()) + "," + num(s.euler.y()) + "," + num(s.euler.z()) + "," +
           num(s.thrusts[0]) + "," + num(s.thrusts[1]) + "," + num(s.thrusts[2]) + "," +
           num(s.thrusts[3]) + "," + (i < pm.size() ? num(pm[i].d.x()) : std::string()) + "\n";
  }
  return out;
}

// Dominant axis of the initial offset; the step response is read along it.
int step_axis(const Vec3& offset) {
  int axis = 0;
  offset.cwiseAbs().maxCoeff(&axis);
  return axis;
}

std::vector<double> along(const std::vector<FlightSample>& samples, int axis) {
  std::vector<double> x;
  x.reserve(samples.size());
  for (const auto& s : samples) x.push_back(s.d[axis]);
  return x;
}

}  // namespace

void write_outputs(const std::string& dir, const std::vector<OutputFile>& files) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::Io, "cannot create " + dir + ": " + ec.message());
  for (const auto& f : files) {
    const fs::path path = fs::path(dir) / f.name;
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::Io, "cannot write " + path.string());
    out << f.content;
    if (!out) fail(ErrorCode::Io, "write failed for " + path.string());
  }
}

AnalyzeResult cmd_analyze(const RunConfig& config) {
  config.validate();
  const auto model = build_icosahedron(config.rod_length);
  const auto materials = config.materials();
  const std::string hash = config_hash(config);

  AnalyzeResult r;
  r.total_force = config.impact.peak_force();
  r.sweep = sweep(model, r.total_force, materials);
  r.verdict = check_components(r.sweep.max_tension, r.sweep.max_compression, materials);

  json summary = sweep_summary(r.sweep);
  summary["force_source"] = config.impact.force ? "configured" : "impact_estimate";
  summary["verdict"] = verdict_json(r.verdict);
  r.files.push_back({"sweep.csv", sweep_csv(r.sweep, materials, hash)});
  r.files.push_back({"members.csv", members_csv(model, r.sweep, hash)});
  r.files.push_back({"summary.json", json_file(summary, hash)});
  return r;
}

PlanResult cmd_plan(const RunConfig& config, FaceId start) {
  config.validate();
  const auto model = build_icosahedron(config.rod_length);
  const std::string hash = config_hash(config);
  PlanResult r;
  r.graph = resolve_graph(model, config);
  r.plan = plan_path(r.graph.graph, start);
  r.files.push_back({"plan_F" + std::to_string(start) + ".txt", plan_text(r.plan, hash)});
  r.files.push_back({"graph.dot", graph_dot(model, r.graph, hash)});
  return r;
}

Scenario parse_scenario(const std::string& name) {
  if (name == "reorient") return Scenario::Reorient;
  if (name == "flight-step") return Scenario::FlightStep;
  if (name == "wall-impact") return Scenario::WallImpact;
  if (name == "monte-carlo") return Scenario::MonteCarlo;
  fail(ErrorCode::InvalidArgument, "unknown scenario '" + name + "'");
}

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::Reorient: return "reorient";
    case Scenario::FlightStep: return "flight-step";
    case Scenario::WallImpact: return "wall-impact";
    case Scenario::MonteCarlo: return "monte-carlo";
  }
  return "?";
}

SimulateResult cmd_simulate(const RunConfig& config, Scenario scenario, FaceId start) {
  config.validate();
  const auto model = build_icosahedron(config.rod_length);
  const std::string hash = config_hash(config);
  SimulateResult r;
  r.scenario = scenario;

  switch (scenario) {
    case Scenario::Reorient: {
      const auto g = resolve_graph(model, config);
      auto res = run_reorientation(model, config.vehicle, config.gains, g.graph, start,
                                   config.simulation);
      const auto planned = res.initial_plan.faces();
      json summary = {{"start", res.start},
                      {"seed", config.simulation.seed},
                      {"reached", res.reached},
                      {"timed_out", res.timed_out},
                      {"time_s", res.time},
                      {"contacts", res.contacts},
                      {"planned_faces", planned},
                      {"followed_plan", res.contacts == planned},
                      {"planned_cost_rad", res.initial_plan.cost},
                      {"replans", res.replans},
                      {"max_thrust_while_cut_N", res.max_thrust_while_cut}};
      const std::string stem = "reorient_F" + std::to_string(start);
      r.files.push_back({stem + "_trajectory.csv", trajectory_csv(res.trajectory, hash)});
      r.files.push_back({stem + "_events.jsonl", events_jsonl(res.events, hash)});
      r.files.push_back({stem + "_summary.json", json_file(summary, hash)});
      r.ok = res.reached;
      r.reorientation = std::move(res);
      break;
    }
    case Scenario::MonteCarlo: {
      const auto g = resolve_graph(model, config);
      auto mc = monte_carlo(model, config.vehicle, config.gains, g.graph, config.monte_carlo_trials,
                            config.simulation.seed, config.simulation);
      std::string csv = "# config_hash=" + hash + "\ntrial,seed,start,reached,time_s\n";
      for (int i = 0; i < mc.trials; ++i) {
        csv += std::to_string(i) + "," + std::to_string(mc.seeds[i]) + "," +
               std::to_string(mc.starts[i]) + "," + (mc.success[i] ? "1" : "0") + "," +
               num(mc.times[i]) + "\n";
      }
      json summary = {{"trials", mc.trials},
                      {"reached", mc.reached},
                      {"base_seed", config.simulation.seed},
                      {"gyro_sigma", config.simulation.noise.gyro_sigma},
                      {"accel_sigma", config.simulation.noise.accel_sigma}};
      r.files.push_back({"monte_carlo.csv", csv});
      r.files.push_back({"monte_carlo_summary.json", json_file(summary, hash)});
      r.ok = 100 * mc.reached >= 95 * mc.trials;
      r.monte_carlo = std::move(mc);
      break;
    }
    case Scenario::FlightStep: {
      auto opts = config.flight;
      opts.point_mass = false;
      r.flight = run_flight_step(config.vehicle, config.gains, opts);
      opts.point_mass = true;
      r.flight_point_mass = run_flight_step(config.vehicle, config.gains, opts);
      const int axis = step_axis(opts.initial_offset);
      r.damping = damping_from_extrema(along(r.flight, axis));
      r.damping_point_mass = damping_from_extrema(along(r.flight_point_mass, axis));
      const double zeta = config.gains.zeta_p;
      std::optional<double> rel;
      if (r.damping_point_mass) rel = std::abs(*r.damping_point_mass - zeta) / zeta;
      r.ok = rel && *rel <= 0.10;
      auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
      json summary = {{"zeta_p", zeta},
                      {"omega_p", config.gains.omega_p},
                      {"axis", axis},
                      {"initial_offset_m", {opts.initial_offset.x(), opts.initial_offset.y(),
                                            opts.initial_offset.z()}},
                      {"damping_estimate", opt(r.damping)},
                      {"damping_estimate_point_mass", opt(r.damping_point_mass)},
                      {"relative_error_point_mass", opt(rel)},
                      {"within_envelope", r.ok},
                      {"final_error_m", r.flight.empty() ? 0.0 : r.flight.back().d.norm()}};
      r.files.push_back({"flight_step.csv", flight_csv(r.flight, r.flight_point_mass, hash)});
      r.files.push_back({"flight_step_summary.json", json_file(summary, hash)});
      break;
    }
    case Scenario::WallImpact: {
      const auto materials = config.materials();
      auto w = simulate_wall_impact(model, materials, config.impact.mass, config.impact.speed,
                                    config.impact.stopping_distance);
      json doc = {{"mass_kg", config.impact.mass},
                  {"speed_m_s", w.speed},
                  {"stopping_distance_m", w.stopping_distance},
                  {"force_N", w.force},
                  {"verdict", verdict_json(w.verdict)}};
      if (w.sweep) {
        doc["sweep"] = sweep_summary(*w.sweep);
        r.files.push_back({"wall_impact_sweep.csv", sweep_csv(*w.sweep, materials, hash)});
      }
      r.files.push_back({"wall_impact.json", json_file(doc, hash)});
      r.ok = w.verdict.passed();
      r.wall_impact = std::move(w);
      break;
    }
  }
  return r;
}

std::vector<OutputFile> cmd_report(const RunConfig& config) {
  config.validate();
  const auto model = build_icosahedron(config.rod_length);
  const std::string hash = config_hash(config);
  const auto materials = config.materials();
  std::vector<OutputFile> files;

  files.push_back({"geometry.json", json_file(json::parse(model_to_json(model)), hash)});

  std::string faces = "# config_hash=" + hash + "\n";
  faces +=
      "face,kind,node_a,node_b,node_c,normal_x,normal_y,normal_z,pitch_deg,roll_deg,antipodal,"
      "load_ground\n";
  for (FaceId f = 1; f <= kFaceCount; ++f) {
    const auto n = model.face_nodes(f);
    const Vec3 v = model.face_inward_normal(f);
    const auto tilt = face_tilt(model, f);
    faces += std::to_string(f) + "," + kind_name(model.face_kind(f)) + "," + std::to_string(n[0]) +
             "," + std::to_string(n[1]) + "," + std::to_string(n[2]) + "," + num(v.x()) + "," +
             num(v.y()) + "," + num(v.z()) + "," + num(tilt.pitch * 180.0 / std::numbers::pi) + "," +
             num(tilt.roll * 180.0 / std::numbers::pi) + "," +
             std::to_string(model.antipodal_face(f)) + "," +
             std::to_string(default_grounded_face(model, f)) + "\n";
  }
  files.push_back({"faces.csv", faces});

  const auto g = resolve_graph(model, config);
  files.push_back({"graph.dot", graph_dot(model, g, hash)});

  std::string plans = "# config_hash=" + hash + "\n";
  for (FaceId f = 1; f <= kFaceCount; ++f) {
    const auto p = plan_path(g.graph, f);
    std::string seq;
    for (FaceId x : p.faces()) seq += (seq.empty() ? "" : " ") + face_name(x);
    char buf[64];
    std::snprintf(buf, sizeof buf, " cost_rad %.6f steps %zu", p.cost, p.steps.size());
    plans += face_name(f) + ": " + seq + buf + "\n";
  }
  files.push_back({"plans.txt", plans});

  const auto& v = config.vehicle;
  json pruned = json::array();
  for (const auto& [a, b] : g.pruned) pruned.push_back({a, b});
  json specials = json::array();
  for (const auto& m : g.graph.specials) {
    specials.push_back({{"from", m.from}, {"to", m.to}, {"angle_rad", m.angle}, {"weight", m.weight}});
  }
  json consistency = {
      {"vehicle_mass_kg", v.mass},
      {"max_total_thrust_N", v.max_total_thrust()},
      {"thrust_to_weight", v.thrust_to_weight()},
      {"frame_mass_kg", v.frame_mass},
      {"frame_mass_fraction", v.frame_mass_fraction()},
      {"rod_length_m", model.rod_length()},
      {"string_length_m", model.string_length()},
      {"string_area_m2", materials.string_area},
      {"rod_area_m2", materials.rod_area},
      {"rod_second_moment_m4", materials.rod_second_moment},
      {"rod_buckling_stress_Pa",
       euler_buckling_stress(materials.rod_modulus, materials.rod_second_moment, materials.rod_area,
                             materials.rod_length)},
      {"impact_force_N", config.impact.peak_force()},
      {"yaw_torque_envelope_Nm", yaw_torque_envelope(v)},
      {"pruned_edges", pruned},
      {"special_moves", specials}};
  files.push_back({"consistency.json", json_file(consistency, hash)});

  json cfg = json::parse(config_to_json(config, 2, false));
  files.push_back({"config.json", json_file(cfg, hash)});
  return files;
}

}  // namespace tensegrity
