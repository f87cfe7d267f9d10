#include "tensegrity/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace tensegrity {

using nlohmann::json;

namespace {

// Reads known keys from one JSON object and rejects the rest.
class Section {
 public:
  Section(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(ErrorCode::Config, path_ + " must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    try {
      out = obj_.at(key).get<T>();
    } catch (const json::exception& e) {
      fail(ErrorCode::Config, where(key) + ": " + e.what());
    }
  }

  void read(const char* key, Vec3& out) {
    std::vector<double> v;
    read(key, v);
    if (!obj_.contains(key)) return;
    if (v.size() != 3) fail(ErrorCode::Config, where(key) + " must have 3 entries");
    out = Vec3(v[0], v[1], v[2]);
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return obj_.contains(key) ? &obj_.at(key) : nullptr;
  }

  std::string where(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.count(key)) fail(ErrorCode::Config, "unknown key " + path_ + "." + key);
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

json vec(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

void read_vehicle(const json& j, VehicleParams& v) {
  Section s(j, "vehicle");
  s.read("mass", v.mass);
  s.read("kappa", v.kappa);
  s.read("thrust_min", v.thrust_min);
  s.read("thrust_max", v.thrust_max);
  s.read("frame_mass", v.frame_mass);
  if (const json* inertia = s.child("inertia")) {
    std::vector<std::vector<double>> rows;
    try {
      rows = inertia->get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
      fail(ErrorCode::Config, std::string("vehicle.inertia: ") + e.what());
    }
    if (rows.size() != 3) fail(ErrorCode::Config, "vehicle.inertia must be 3x3");
    for (int r = 0; r < 3; ++r) {
      if (rows[r].size() != 3) fail(ErrorCode::Config, "vehicle.inertia must be 3x3");
      for (int c = 0; c < 3; ++c) v.inertia(r, c) = rows[r][c];
    }
  }
  if (const json* props = s.child("prop_positions")) {
    std::vector<std::vector<double>> rows;
    try {
      rows = props->get<std::vector<std::vector<double>>>();
    } catch (const json::exception& e) {
      fail(ErrorCode::Config, std::string("vehicle.prop_positions: ") + e.what());
    }
    if (rows.size() != 4) fail(ErrorCode::Config, "vehicle.prop_positions needs 4 entries");
    for (int i = 0; i < 4; ++i) {
      if (rows[i].size() != 3) fail(ErrorCode::Config, "vehicle.prop_positions entries are [x, y, z]");
      v.prop_positions[i] = Vec3(rows[i][0], rows[i][1], rows[i][2]);
    }
  }
  if (s.child("spin")) {
    std::vector<int> spin;
    s.read("spin", spin);
    if (spin.size() != 4) fail(ErrorCode::Config, "vehicle.spin needs 4 entries");
    std::copy(spin.begin(), spin.end(), v.spin.begin());
  }
  s.finish();
}

void read_planning(const json& j, PlanningConfig& p) {
  Section s(j, "planning");
  s.read("yaw_margin", p.yaw_margin);
  if (const json* pruned = s.child("pruned_edges")) {
    if (pruned->is_string()) {
      if (pruned->get<std::string>() != "auto") {
        fail(ErrorCode::Config, "planning.pruned_edges must be \"auto\" or a list of face pairs");
      }
      p.pruned_edges.reset();
    } else {
      std::vector<std::pair<FaceId, FaceId>> edges;
      try {
        for (const auto& e : pruned->get<std::vector<std::vector<int>>>()) {
          if (e.size() != 2) fail(ErrorCode::Config, "planning.pruned_edges entries are [a, b]");
          edges.emplace_back(e[0], e[1]);
        }
      } catch (const json::exception& e) {
        fail(ErrorCode::Config, std::string("planning.pruned_edges: ") + e.what());
      }
      p.pruned_edges = edges;
    }
  }
  if (const json* specials = s.child("special_moves")) {
    if (specials->is_string()) {
      if (specials->get<std::string>() != "auto") {
        fail(ErrorCode::Config, "planning.special_moves must be \"auto\" or a list");
      }
      p.special_moves.reset();
    } else {
      if (!specials->is_array()) fail(ErrorCode::Config, "planning.special_moves must be a list");
      std::vector<SpecialMove> moves;
      for (const auto& m : *specials) {
        Section ms(m, "planning.special_moves[]");
        SpecialMove sm;
        ms.read("from", sm.from);
        ms.read("to", sm.to);
        if (ms.child("weight")) {
          double w = 0.0;
          ms.read("weight", w);
          sm.weight = w;
        }
        ms.finish();
        moves.push_back(sm);
      }
      p.special_moves = moves;
    }
  }
  s.finish();
}

}  // namespace

ReorientationOptions RunConfig::default_simulation() {
  ReorientationOptions o;
  o.noise.gyro_sigma = 0.02;
  o.noise.accel_sigma = 0.2;
  return o;
}

double ImpactParams::peak_force() const {
  return force ? *force : estimate_impact_force(mass, speed, stopping_distance);
}

MaterialSpec RunConfig::materials() const {
  MaterialSpec m;
  m.string_yield_strength = string.yield_strength;
  m.string_modulus = string.modulus;
  m.string_area = solid_round_area(string.diameter);
  m.rod_yield_strength = rod.yield_strength;
  m.rod_modulus = rod.modulus;
  m.rod_area = tube_area(rod.outer_diameter, rod.inner_diameter);
  m.rod_second_moment = tube_second_moment(rod.outer_diameter, rod.inner_diameter);
  m.rod_length = rod_length;
  m.eta_string = safety.string;
  m.eta_rod_yield = safety.rod_yield;
  m.eta_rod_buckling = safety.rod_buckling;
  return m;
}

void RunConfig::validate() const {
  if (schema_version != kSchemaVersion) {
    fail(ErrorCode::Config, "unsupported schema_version " + std::to_string(schema_version));
  }
  if (!(rod_length > 0.0)) fail(ErrorCode::Config, "rod_length must be positive");
  if (!(string.diameter > 0.0)) fail(ErrorCode::Config, "string diameter must be positive");
  if (!(rod.inner_diameter >= 0.0 && rod.outer_diameter > rod.inner_diameter)) {
    fail(ErrorCode::Config, "rod diameters need 0 <= inner < outer");
  }
  if (!(impact.mass > 0.0 && impact.speed >= 0.0 && impact.stopping_distance > 0.0)) {
    fail(ErrorCode::Config, "impact needs mass > 0, speed >= 0, stopping_distance > 0");
  }
  if (impact.force && !(*impact.force > 0.0 && std::isfinite(*impact.force))) {
    fail(ErrorCode::Config, "impact.force must be positive");
  }
  if (monte_carlo_trials < 0) fail(ErrorCode::Config, "monte_carlo_trials must be nonnegative");
  if (!(flight.duration > 0.0) || !flight.initial_offset.allFinite()) {
    fail(ErrorCode::Config, "flight duration must be positive");
  }
  if (!(planning.yaw_margin > 0.0)) fail(ErrorCode::Config, "yaw_margin must be positive");
  if (output_dir.empty()) fail(ErrorCode::Config, "output_dir must not be empty");
  try {
    materials().validate();
    gains.validate();
    vehicle.validate();
    simulation.validate();
  } catch (const Error& e) {
    fail(ErrorCode::Config, e.what());
  }
}

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  Section root(doc, "config");
  root.read("schema_version", c.schema_version);
  if (c.schema_version != kSchemaVersion) {
    fail(ErrorCode::Config, "unsupported schema_version " + std::to_string(c.schema_version));
  }
  if (const json* j = root.child("geometry")) {
    Section s(*j, "geometry");
    s.read("rod_length", c.rod_length);
    s.finish();
  }
  if (const json* j = root.child("materials")) {
    Section s(*j, "materials");
    if (const json* sj = s.child("string")) {
      Section ss(*sj, "materials.string");
      ss.read("diameter", c.string.diameter);
      ss.read("modulus", c.string.modulus);
      ss.read("yield_strength", c.string.yield_strength);
      ss.finish();
    }
    if (const json* rj = s.child("rod")) {
      Section rs(*rj, "materials.rod");
      rs.read("outer_diameter", c.rod.outer_diameter);
      rs.read("inner_diameter", c.rod.inner_diameter);
      rs.read("modulus", c.rod.modulus);
      rs.read("yield_strength", c.rod.yield_strength);
      rs.finish();
    }
    s.finish();
  }
  if (const json* j = root.child("safety_factors")) {
    Section s(*j, "safety_factors");
    s.read("string", c.safety.string);
    s.read("rod_yield", c.safety.rod_yield);
    s.read("rod_buckling", c.safety.rod_buckling);
    s.finish();
  }
  if (const json* j = root.child("impact")) {
    Section s(*j, "impact");
    s.read("mass", c.impact.mass);
    s.read("speed", c.impact.speed);
    s.read("stopping_distance", c.impact.stopping_distance);
    if (const json* f = s.child("force"); f && !f->is_null()) {
      double force = 0.0;
      s.read("force", force);
      c.impact.force = force;
    }
    s.finish();
  }
  if (const json* j = root.child("controller")) {
    Section s(*j, "controller");
    s.read("zeta_p", c.gains.zeta_p);
    s.read("omega_p", c.gains.omega_p);
    s.read("tau_att", c.gains.tau_att);
    s.read("tau_rate", c.gains.tau_rate);
    s.read("filter_alpha", c.simulation.filter_alpha);
    s.finish();
  }
  if (const json* j = root.child("vehicle")) read_vehicle(*j, c.vehicle);
  if (const json* j = root.child("simulation")) {
    Section s(*j, "simulation");
    auto& o = c.simulation;
    s.read("dt", o.dt);
    s.read("control_dt", o.control_dt);
    s.read("timeout", o.timeout);
    s.read("initial_yaw", o.initial_yaw);
    s.read("restitution", o.restitution);
    s.read("debounce_steps", o.machine.debounce_steps);
    s.read("settle_rate", o.machine.settle_rate);
    s.read("settle_steps", o.machine.settle_steps);
    s.read("rotate_timeout_steps", o.machine.rotate_timeout_steps);
    s.read("monte_carlo_trials", c.monte_carlo_trials);
    s.read("flight_duration", c.flight.duration);
    s.read("flight_initial_offset", c.flight.initial_offset);
    s.finish();
  }
  if (const json* j = root.child("noise")) {
    Section s(*j, "noise");
    s.read("gyro_sigma", c.simulation.noise.gyro_sigma);
    s.read("accel_sigma", c.simulation.noise.accel_sigma);
    s.read("gyro_bias", c.simulation.noise.gyro_bias);
    s.finish();
  }
  root.read("seed", c.simulation.seed);
  if (const json* j = root.child("planning")) read_planning(*j, c.planning);
  root.child("config_hash");  // written by reports; informational only
  root.read("output_dir", c.output_dir);
  root.finish();
  c.flight.dt = c.simulation.dt;
  c.flight.control_dt = c.simulation.control_dt;
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string config_to_json(const RunConfig& c, int indent, bool include_output_dir) {
  json doc;
  doc["schema_version"] = c.schema_version;
  doc["geometry"] = {{"rod_length", c.rod_length}};
  doc["materials"] = {
      {"string",
       {{"diameter", c.string.diameter},
        {"modulus", c.string.modulus},
        {"yield_strength", c.string.yield_strength}}},
      {"rod",
       {{"outer_diameter", c.rod.outer_diameter},
        {"inner_diameter", c.rod.inner_diameter},
        {"modulus", c.rod.modulus},
        {"yield_strength", c.rod.yield_strength}}}};
  doc["safety_factors"] = {{"string", c.safety.string},
                           {"rod_yield", c.safety.rod_yield},
                           {"rod_buckling", c.safety.rod_buckling}};
  doc["impact"] = {{"mass", c.impact.mass},
                   {"speed", c.impact.speed},
                   {"stopping_distance", c.impact.stopping_distance},
                   {"force", c.impact.force ? json(*c.impact.force) : json(nullptr)}};
  doc["controller"] = {{"zeta_p", c.gains.zeta_p},
                       {"omega_p", c.gains.omega_p},
                       {"tau_att", c.gains.tau_att},
                       {"tau_rate", c.gains.tau_rate},
                       {"filter_alpha", c.simulation.filter_alpha}};
  json inertia = json::array();
  for (int r = 0; r < 3; ++r) {
    inertia.push_back({c.vehicle.inertia(r, 0), c.vehicle.inertia(r, 1), c.vehicle.inertia(r, 2)});
  }
  json props = json::array();
  for (const auto& p : c.vehicle.prop_positions) props.push_back(vec(p));
  doc["vehicle"] = {{"mass", c.vehicle.mass},
                    {"inertia", inertia},
                    {"prop_positions", props},
                    {"spin", c.vehicle.spin},
                    {"kappa", c.vehicle.kappa},
                    {"thrust_min", c.vehicle.thrust_min},
                    {"thrust_max", c.vehicle.thrust_max},
                    {"frame_mass", c.vehicle.frame_mass}};
  const auto& o = c.simulation;
  doc["simulation"] = {{"dt", o.dt},
                       {"control_dt", o.control_dt},
                       {"timeout", o.timeout},
                       {"initial_yaw", o.initial_yaw},
                       {"restitution", o.restitution},
                       {"debounce_steps", o.machine.debounce_steps},
                       {"settle_rate", o.machine.settle_rate},
                       {"settle_steps", o.machine.settle_steps},
                       {"rotate_timeout_steps", o.machine.rotate_timeout_steps},
                       {"monte_carlo_trials", c.monte_carlo_trials},
                       {"flight_duration", c.flight.duration},
                       {"flight_initial_offset", vec(c.flight.initial_offset)}};
  doc["noise"] = {{"gyro_sigma", o.noise.gyro_sigma},
                  {"accel_sigma", o.noise.accel_sigma},
                  {"gyro_bias", vec(o.noise.gyro_bias)}};
  doc["seed"] = o.seed;
  json planning;
  planning["yaw_margin"] = c.planning.yaw_margin;
  if (c.planning.pruned_edges) {
    json edges = json::array();
    for (const auto& [a, b] : *c.planning.pruned_edges) edges.push_back({a, b});
    planning["pruned_edges"] = edges;
  } else {
    planning["pruned_edges"] = "auto";
  }
  if (c.planning.special_moves) {
    json moves = json::array();
    for (const auto& m : *c.planning.special_moves) {
      json e = {{"from", m.from}, {"to", m.to}};
      if (m.weight) e["weight"] = *m.weight;
      moves.push_back(e);
    }
    planning["special_moves"] = moves;
  } else {
    planning["special_moves"] = "auto";
  }
  doc["planning"] = planning;
  if (include_output_dir) doc["output_dir"] = c.output_dir;
  return doc.dump(indent);
}

std::string config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config_to_json(config, -1, false)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ResolvedGraph resolve_graph(const TensegrityModel& model, const RunConfig& config) {
  ResolvedGraph r;
  r.pruned = config.planning.pruned_edges
                 ? *config.planning.pruned_edges
                 : torque_infeasible_edges(model, config.vehicle, config.planning.yaw_margin);
  r.specials = config.planning.special_moves
                   ? *config.planning.special_moves
                   : suggest_node_pivots(model, r.pruned, config.vehicle, config.planning.yaw_margin);
  r.graph = build_face_graph(model, r.pruned, r.specials);
  return r;
}

}  // namespace tensegrity
