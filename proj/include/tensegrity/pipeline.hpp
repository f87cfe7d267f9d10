#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tensegrity/config.hpp"

namespace tensegrity {

/// A rendered output file, named relative to the output directory.
struct OutputFile {
  std::string name;
  std::string content;
};

/// Writes every file under `dir`, creating it if needed. Throws Io.
void write_outputs(const std::string& dir, const std::vector<OutputFile>& files);

struct AnalyzeResult {
  double total_force = 0.0;
  SweepReport sweep;
  DesignVerdict verdict;
  std::vector<OutputFile> files;  // sweep.csv, members.csv, summary.json
};

/// Stress sweep at the configured peak force and the component checks.
AnalyzeResult cmd_analyze(const RunConfig& config);

struct PlanResult {
  ResolvedGraph graph;
  ReorientationPlan plan;
  std::vector<OutputFile> files;  // plan_F<k>.txt, graph.dot
};

/// Throws DisconnectedGraph or NoPath from the planner.
PlanResult cmd_plan(const RunConfig& config, FaceId start);

enum class Scenario { Reorient, FlightStep, WallImpact, MonteCarlo };

/// "reorient", "flight-step", "wall-impact", "monte-carlo"; throws
/// InvalidArgument otherwise.
Scenario parse_scenario(const std::string& name);
const char* to_string(Scenario s);

struct SimulateResult {
  Scenario scenario = Scenario::Reorient;
  std::optional<ReorientationResult> reorientation;
  std::optional<MonteCarloSummary> monte_carlo;
  std::vector<FlightSample> flight;
  std::vector<FlightSample> flight_point_mass;
  std::optional<double> damping;             // full model
  std::optional<double> damping_point_mass;  // attitude following instantly
  std::optional<WallImpactResult> wall_impact;
  /// Reorient: goal reached. Monte carlo: at least 95% reached. Flight
  /// step: point-mass damping within 10% of zeta_p. Wall impact: design
  /// verdict passed.
  bool ok = false;
  std::vector<OutputFile> files;
};

SimulateResult cmd_simulate(const RunConfig& config, Scenario scenario, FaceId start);

/// geometry.json, faces.csv, graph.dot, plans.txt, consistency.json,
/// config.json.
std::vector<OutputFile> cmd_report(const RunConfig& config);

}  // namespace tensegrity
