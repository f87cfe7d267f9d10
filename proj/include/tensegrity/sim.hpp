#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tensegrity/control.hpp"
#include "tensegrity/geometry.hpp"
#include "tensegrity/reorient.hpp"
#include "tensegrity/stress.hpp"

namespace tensegrity {

inline constexpr double kMaxTimestep = 0.01;  // s

/// Active ground pivot. The body turns by `theta` about the body-frame
/// `axis` through the body-frame point `point` (a contact node), starting
/// from the resting attitude `base`. theta = 0 is resting on `from`,
/// theta = `landing_angle` is resting on `to`.
struct Pivot {
  MoveKind kind = MoveKind::Edge;
  FaceId from = 0;
  FaceId to = 0;
  std::vector<int> nodes;
  Vec3 axis = Vec3::UnitX();
  Vec3 point = Vec3::Zero();
  Rotation base;
  Vec3 anchor = Vec3::Zero();  // Earth-frame position of `point`, fixed while pivoting
  double landing_angle = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;
  double theta_ddot = 0.0;
};

struct VehicleState {
  Vec3 d = Vec3::Zero();      // CoM position, m, Earth
  Vec3 d_dot = Vec3::Zero();  // m/s, Earth
  Vec3 d_ddot = Vec3::Zero(); // last CoM acceleration, m/s^2, Earth (for the IMU)
  Rotation R;                 // body -> Earth
  Vec3 omega = Vec3::Zero();  // rad/s, body
  FaceId face = 0;            // ground contact face; 0 in flight
  std::optional<Pivot> pivot;
};

/// Resting on `face` with its inward normal up, rotated by `yaw` about Earth z.
VehicleState resting_state(const TensegrityModel& model, FaceId face, double yaw = 0.0);

struct HingeModel {
  Vec3 axis = Vec3::UnitX();   // Earth frame
  Vec3 point = Vec3::Zero();   // Earth frame, on the axis
  double inertia = 0.0;        // kg m^2 about the axis
  double com_offset = 0.0;     // m, CoM distance from the axis
};

/// Hinge parameters for the state's active pivot. Throws InvalidArgument
/// when the state is not pivoting.
HingeModel hinge_model(const VehicleParams& vehicle, const VehicleState& state);

/// Start a pivot from a resting state. `move` must leave the state's face.
Pivot begin_pivot(const TensegrityModel& model, const VehicleState& state, const Move& move);

/// Net propeller force (along body z) and torque about the CoM, body frame.
struct Wrench {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
};
Wrench propeller_wrench(const VehicleParams& vehicle, const std::array<double, 4>& thrusts);

struct HingeOptions {
  double restitution = 0.0;
  bool contacts_enabled = true;  // false: free pendulum, no landings
  /// Node pivots the vehicle may tip about, in addition to the face edges.
  std::vector<Move> node_pivots;
};

/// One step of the perfect-hinge ground model. At rest, the vehicle starts
/// tipping about the candidate pivot with the largest positive net moment.
/// While pivoting, I theta'' = u . tau_pivot - m g (moment arm), integrated
/// with velocity Verlet. Reaching the landing angle (or returning to zero)
/// is an inelastic contact. Throws ExcessiveTimestep unless dt is in (0, 0.01].
VehicleState step_hinge(const TensegrityModel& model, const VehicleParams& vehicle,
                        const VehicleState& state, const Wrench& wrench, double dt,
                        const HingeOptions& options = {});

/// Gravity moment about the pivot axis opposing positive theta, N m.
double hinge_gravity_moment(const VehicleParams& vehicle, const Pivot& pivot, double theta);
/// Applied moment about the pivot axis, N m.
double hinge_applied_moment(const Pivot& pivot, const Wrench& wrench);

/// Free-flight rigid body: semi-implicit Euler with an exponential-map
/// attitude update. Throws ExcessiveTimestep unless dt is in (0, 0.01].
VehicleState step_flight(const VehicleParams& vehicle, const VehicleState& state,
                         const std::array<double, 4>& thrusts, double dt);

double kinetic_energy(const VehicleParams& vehicle, const VehicleState& state);
double potential_energy(const VehicleParams& vehicle, const VehicleState& state);

struct NoiseConfig {
  double gyro_sigma = 0.0;            // rad/s, per axis
  double accel_sigma = 0.0;           // m/s^2, per axis
  Vec3 gyro_bias = Vec3::Zero();      // rad/s
  void validate() const;
};

struct ImuSample {
  Vec3 gyro = Vec3::Zero();
  Vec3 accel = Vec3::Zero();  // specific force, body
};

/// Noise-free IMU reading of a state.
ImuSample ideal_imu(const VehicleState& state);

struct ReorientationOptions {
  double dt = 1e-3;           // dynamics step, s
  double control_dt = 2e-3;   // controller step, s; a multiple of dt
  double filter_alpha = 0.98;
  double timeout = 60.0;      // simulated seconds
  double initial_yaw = 0.0;   // rad
  double restitution = 0.0;
  NoiseConfig noise;
  std::uint64_t seed = 1;
  StateMachineConfig machine;
  bool record_trajectory = true;
  void validate() const;
};

struct TrajectoryRow {
  double t = 0.0;
  Vec3 d = Vec3::Zero();
  Vec3 euler = Vec3::Zero();           // true yaw, pitch, roll
  Vec3 omega = Vec3::Zero();
  Vec3 estimate_euler = Vec3::Zero();  // estimated yaw, pitch, roll
  FaceId contact = 0;
  FaceId identified = 0;
  Phase phase = Phase::Identify;
  CommandKind command = CommandKind::CutThrust;
  FaceId target = 0;
  std::array<double, 4> thrusts{};
};

struct SimEvent {
  double t = 0.0;
  std::string kind;  // start, rotate, replan, cut_thrust, contact, done, timeout
  FaceId from = 0;
  FaceId to = 0;
  double total_thrust = 0.0;
  double max_abs_thrust = 0.0;
};

struct ReorientationResult {
  FaceId start = 0;
  bool reached = false;
  bool timed_out = false;
  double time = 0.0;
  std::vector<FaceId> contacts;  // start, then every landing face
  ReorientationPlan initial_plan;
  int replans = 0;
  /// Largest |thrust| commanded on any controller step that followed a
  /// CutThrust and preceded the next Rotate; zero when thrust is cut.
  double max_thrust_while_cut = 0.0;
  bool thrust_ever_commanded = false;
  std::vector<TrajectoryRow> trajectory;
  std::vector<SimEvent> events;
};

/// Closed loop on the hinge model: IMU -> complementary filter ->
/// identification and state machine -> attitude loop with zero total thrust
/// -> mixer -> hinge dynamics. Stops when the machine reports the goal or
/// at the timeout (flagged, not thrown).
ReorientationResult run_reorientation(const TensegrityModel& model, const VehicleParams& vehicle,
                                      const ControllerGains& gains, const FaceGraph& graph,
                                      FaceId start, const ReorientationOptions& options);

struct MonteCarloSummary {
  int trials = 0;
  int reached = 0;
  std::vector<FaceId> starts;
  std::vector<std::uint64_t> seeds;
  std::vector<bool> success;
  std::vector<double> times;
};

/// `trials` runs with seeds base_seed, base_seed + 1, ...; each seed draws a
/// start face in 2..20 and an initial yaw.
MonteCarloSummary monte_carlo(const TensegrityModel& model, const VehicleParams& vehicle,
                              const ControllerGains& gains, const FaceGraph& graph, int trials,
                              std::uint64_t base_seed, const ReorientationOptions& options);

struct FlightStepOptions {
  double dt = 1e-3;
  double control_dt = 2e-3;
  double duration = 8.0;
  Vec3 initial_offset = Vec3(1.0, 0.0, 0.0);  // start position minus setpoint, m
  bool point_mass = false;  // attitude follows the command instantly
};

struct FlightSample {
  double t = 0.0;
  Vec3 d = Vec3::Zero();
  Vec3 d_dot = Vec3::Zero();
  Vec3 euler = Vec3::Zero();
  std::array<double, 4> thrusts{};
};

/// Cascaded controller (position, attitude, mixer) on the flight model with
/// ground-truth state, stepping toward the origin from `initial_offset`.
std::vector<FlightSample> run_flight_step(const VehicleParams& vehicle, const ControllerGains& gains,
                                          const FlightStepOptions& options);

/// Damping ratio from the decay of successive extrema of a free response,
/// counting the initial value as the first extremum: consecutive extrema
/// shrink by exp(-pi zeta / sqrt(1 - zeta^2)). Pairs smaller than `floor`
/// times the initial magnitude are ignored; nullopt without a usable pair.
std::optional<double> damping_from_extrema(const std::vector<double>& signal, double floor = 1e-3);

struct WallImpactResult {
  double speed = 0.0;
  double stopping_distance = 0.0;
  double force = 0.0;
  std::optional<SweepReport> sweep;  // absent when the force is zero
  DesignVerdict verdict;
};

/// estimate_impact_force -> sweep -> check_components.
WallImpactResult simulate_wall_impact(const TensegrityModel& model, const MaterialSpec& materials,
                                      double mass, double speed, double stopping_distance);

}  // namespace tensegrity
