#pragma once

#include <array>
#include <string>
#include <vector>

#include "tensegrity/geometry.hpp"
#include "tensegrity/qp.hpp"

namespace tensegrity {

/// Member properties and design allowables. Pa, m^2, m^4, m.
struct MaterialSpec {
  double string_yield_strength = 0.0;
  double string_modulus = 0.0;
  double string_area = 0.0;
  double rod_yield_strength = 0.0;
  double rod_modulus = 0.0;
  double rod_area = 0.0;
  double rod_second_moment = 0.0;
  double rod_length = 0.0;
  double eta_string = 1.0;
  double eta_rod_yield = 1.0;
  double eta_rod_buckling = 1.0;

  /// Throws InvalidArgument unless every property is positive and every
  /// safety factor is at least 1.
  void validate() const;
};

double tube_area(double outer_diameter, double inner_diameter);
double tube_second_moment(double outer_diameter, double inner_diameter);
double solid_round_area(double diameter);
/// Euler critical stress pi^2 E I / (A L^2) for a pinned-pinned column.
double euler_buckling_stress(double modulus, double second_moment, double area, double length);

struct LoadCase {
  FaceId grounded_face = 0;
  FaceId loaded_face = 0;
  std::vector<int> loaded_nodes;  // subset of the loaded face's nodes
  double total_force = 0.0;       // N, split evenly, directed toward the ground
};

/// True when pinning the three nodes of `grounded_face` makes the
/// equilibrium matrix full rank. False for the three-string faces.
bool supports_restrain(const TensegrityModel& model, FaceId grounded_face);

/// The antipodal face when it restrains the structure, otherwise the
/// restraining face whose inward normal is most opposite (lowest id on ties).
FaceId default_grounded_face(const TensegrityModel& model, FaceId loaded_face);

/// Load case on `loaded_face` grounded on default_grounded_face().
LoadCase make_load_case(const TensegrityModel& model, FaceId loaded_face,
                        std::vector<int> loaded_nodes, double total_force);

/// Variable layout of the assembled problem: [T (strings), C (rods),
/// reaction xyz at each grounded node].
struct StressProblem {
  QpProblem qp;
  std::array<int, 3> grounded_nodes{};
  int string_offset = 0;
  int rod_offset = kStringCount;
  int reaction_offset = kStringCount + kRodCount;
};

/// Nodal equilibrium (3 rows per node) with string tensions constrained
/// nonnegative and complementary energy
/// sum 1/2 L_r/(E_r A_r) C^2 + sum 1/2 L_s/(E_s A_s) T^2. Gravity is omitted.
/// Throws InvalidArgument for a malformed load case.
StressProblem assemble(const TensegrityModel& model, const LoadCase& load,
                       const MaterialSpec& materials);

struct StressSolution {
  std::vector<double> tensions;      // per string, N, >= 0
  std::vector<double> compressions;  // per rod, N, positive in compression
  std::array<int, 3> grounded_nodes{};
  std::array<Vec3, 3> reactions{};
  double strain_energy = 0.0;        // J
  std::array<double, kNodeCount> node_residuals{};  // |sum of forces|_inf, N
  double max_residual = 0.0;
  double max_tension = 0.0;
  double max_compression = 0.0;  // largest rod compression, 0 if none
  std::vector<int> slack_strings;  // strings held at zero tension
  bool regularized = false;
};

StressSolution solve_case(const TensegrityModel& model, const LoadCase& load,
                          const MaterialSpec& materials, double tol = kDefaultQpTolerance);

/// Net force on each node for given member forces and external loads.
std::array<Vec3, kNodeCount> nodal_force_balance(const TensegrityModel& model,
                                                 const std::vector<double>& tensions,
                                                 const std::vector<double>& compressions,
                                                 const std::array<Vec3, kNodeCount>& external);

struct SweepCase {
  int id = 0;
  FaceKind kind = FaceKind::ThreeString;
  LoadCase load;
  StressSolution solution;
};

struct SweepReport {
  double total_force = 0.0;
  FaceId three_string_face = 0;
  FaceId two_string_face = 0;
  std::vector<SweepCase> cases;
  double max_tension = 0.0;
  double max_compression = 0.0;
  int max_tension_case = 0;
  int max_compression_case = 0;
};

/// Every 1-, 2- and 3-node split on one three-string and one two-string
/// top face (lowest-numbered of each kind unless given), grounded on
/// default_grounded_face(). Throws InvalidArgument unless total_force > 0.
SweepReport sweep(const TensegrityModel& model, double total_force, const MaterialSpec& materials,
                  FaceId three_string_face = 0, FaceId two_string_face = 0);

struct CriterionResult {
  std::string name;
  double demand = 0.0;  // factored stress, Pa
  double limit = 0.0;   // allowable stress, Pa
  double margin = 0.0;  // limit / demand (infinite when demand is zero)
  bool passed = false;  // demand < limit, strictly
};

struct DesignVerdict {
  CriterionResult string_yield;
  CriterionResult rod_yield;
  CriterionResult rod_buckling;
  double buckling_stress = 0.0;
  bool passed() const { return string_yield.passed && rod_yield.passed && rod_buckling.passed; }
};

/// eta_s T/A_s < sigma_ys, eta_r1 C/A_r < sigma_yr, eta_r2 C/A_r < sigma_br.
DesignVerdict check_components(double max_tension, double max_compression,
                               const MaterialSpec& materials);

/// Constant-deceleration estimate m v^2 / (2 d). This is a modelling
/// stand-in for a measured peak impact force. Throws InvalidArgument for
/// nonpositive mass or stopping distance, or negative speed.
double estimate_impact_force(double mass, double speed, double stopping_distance);

}  // namespace tensegrity
