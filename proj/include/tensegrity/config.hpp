#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tensegrity/control.hpp"
#include "tensegrity/reorient.hpp"
#include "tensegrity/sim.hpp"
#include "tensegrity/stress.hpp"

namespace tensegrity {

inline constexpr int kSchemaVersion = 1;

struct StringSection {
  double diameter = 0.4e-3;       // m, solid round
  double modulus = 60e9;          // Pa
  double yield_strength = 1.5e9;  // Pa
};

struct RodSection {
  double outer_diameter = 6e-3;   // m
  double inner_diameter = 4e-3;   // m
  double modulus = 70e9;          // Pa
  double yield_strength = 600e6;  // Pa
};

struct SafetyFactors {
  double string = 2.0;
  double rod_yield = 2.0;
  double rod_buckling = 2.0;
};

struct ImpactParams {
  double mass = 0.252;              // kg
  double speed = 6.5;               // m/s
  double stopping_distance = 0.02;  // m
  std::optional<double> force;      // N; overrides the estimate when set

  /// `force` if set, else estimate_impact_force(mass, speed, stopping_distance).
  double peak_force() const;
};

struct PlanningConfig {
  // nullopt means "auto": derived from the yaw-torque predicate.
  std::optional<std::vector<std::pair<FaceId, FaceId>>> pruned_edges;
  std::optional<std::vector<SpecialMove>> special_moves;
  double yaw_margin = 1.0;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  double rod_length = 0.20;  // m
  StringSection string;
  RodSection rod;
  SafetyFactors safety;
  ImpactParams impact;
  ControllerGains gains;
  VehicleParams vehicle;
  ReorientationOptions simulation = default_simulation();
  int monte_carlo_trials = 100;
  FlightStepOptions flight;
  PlanningConfig planning;
  std::string output_dir = "out";

  MaterialSpec materials() const;
  /// Throws Config (wrapping the underlying message) on any invalid value.
  void validate() const;

  static ReorientationOptions default_simulation();
};

/// Missing fields take their defaults; unknown keys and wrong types throw
/// Config, as does a schema_version other than kSchemaVersion. A top-level
/// "config_hash" key is accepted and ignored.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Every field, keys sorted, fixed number formatting.
std::string config_to_json(const RunConfig& config, int indent = 2, bool include_output_dir = true);
/// FNV-1a 64 over the compact canonical dump without output_dir, as 16 hex
/// digits, so the same run written to two directories carries one hash.
std::string config_hash(const RunConfig& config);

/// Pruned edges and special moves resolved from the planning section.
struct ResolvedGraph {
  std::vector<std::pair<FaceId, FaceId>> pruned;
  std::vector<SpecialMove> specials;
  FaceGraph graph;
};
ResolvedGraph resolve_graph(const TensegrityModel& model, const RunConfig& config);

}  // namespace tensegrity
