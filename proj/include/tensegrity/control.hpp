#pragma once

#include <Eigen/Core>
#include <array>

#include "tensegrity/common.hpp"
#include "tensegrity/rotation.hpp"

namespace tensegrity {

struct ControllerGains {
  double zeta_p = 0.7;    // position loop damping ratio
  double omega_p = 2.0;   // position loop natural frequency, rad/s
  double tau_att = 0.1;   // attitude error -> rate time constant, s
  double tau_rate = 0.025;  // rate loop time constant, s
  void validate() const;
};

/// Quadrotor parameters. Propeller i produces thrust f_i along body +z at
/// `prop_positions[i]` and a reaction torque kappa * spin[i] * f_i about +z.
struct VehicleParams {
  double mass = 0.252;
  Mat3 inertia = Vec3(6.5e-4, 6.5e-4, 1.1e-3).asDiagonal();
  std::array<Vec3, 4> prop_positions = {Vec3(0.05, 0.05, 0.0), Vec3(-0.05, 0.05, 0.0),
                                        Vec3(-0.05, -0.05, 0.0), Vec3(0.05, -0.05, 0.0)};
  std::array<int, 4> spin = {1, -1, 1, -1};
  double kappa = 0.0055;  // m
  double thrust_min = -2.125;  // N; negative when propellers reverse
  double thrust_max = 2.125;   // N
  double frame_mass = 0.050;   // kg, tensegrity shell alone
  void validate() const;
  double max_total_thrust() const { return 4.0 * thrust_max; }
  double thrust_to_weight() const { return max_total_thrust() / (mass * kGravity); }
  double frame_mass_fraction() const { return frame_mass / mass; }
};

struct Setpoint {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double yaw = 0.0;
};

struct PositionCommand {
  Vec3 acceleration = Vec3::Zero();  // gravity-compensated command, m/s^2
  double thrust = 0.0;               // N
  Vec3 z_axis = Vec3::UnitZ();       // desired body z in the Earth frame
  bool degenerate = false;           // |a| < 1e-6 g; previous direction held
};

/// a = 2 zeta w (v_d - v) + w^2 (d_d - d) + g z; f = m|a|; z_B,d = a/|a|.
PositionCommand position_loop(const Vec3& position, const Vec3& velocity, const Setpoint& sp,
                              const ControllerGains& gains, double mass,
                              const Vec3& previous_z_axis = Vec3::UnitZ());

/// Body z aligned with `z_axis`, then rotated about it to the requested yaw.
Rotation desired_attitude(const Vec3& z_axis, double yaw);

struct AttitudeCommand {
  Vec3 rate = Vec3::Zero();          // omega_d, rad/s, body
  Vec3 acceleration = Vec3::Zero();  // d(omega_d)/dt, rad/s^2
  Vec3 torque = Vec3::Zero();        // N m, body
};

/// omega_d = log(R^T R_d) / tau_att; domega_d = (omega_d - omega) / tau;
/// torque = J domega_d.
AttitudeCommand attitude_loop(const Rotation& estimate, const Rotation& desired, const Vec3& omega,
                              const ControllerGains& gains, const Mat3& inertia);

struct MixerOutput {
  std::array<double, 4> thrusts{};
  bool clamped = false;
  double yaw_scale = 1.0;  // share of the requested yaw torque delivered
};

/// Control allocation through the inverse of the 4x4 map
/// [f; tau] = M * thrusts. Throws SingularAllocation for degenerate layouts.
class Mixer {
 public:
  explicit Mixer(const VehicleParams& params);
  MixerOutput mix(const Vec3& torque, double total_thrust) const;
  /// As mix(), but when a propeller would saturate the yaw torque is scaled
  /// back first; roll, pitch and total thrust are clamped only if that is
  /// not enough.
  MixerOutput mix_yaw_priority(const Vec3& torque, double total_thrust) const;
  /// Net (total thrust, body torque) produced by the given thrusts.
  Eigen::Vector4d forward(const std::array<double, 4>& thrusts) const;
  const Eigen::Matrix4d& allocation() const { return m_; }

 private:
  Eigen::Matrix4d m_;
  Eigen::Matrix4d inv_;
  double f_min_;
  double f_max_;
};

/// Attitude estimator on SO(3): gyro propagation followed by a rotation of
/// (1 - alpha) of the way from the estimated to the measured gravity
/// direction. The correction axis is horizontal, so heading comes from the
/// gyro alone.
class ComplementaryFilter {
 public:
  explicit ComplementaryFilter(double alpha = 0.98);

  void reset(const Rotation& estimate) { estimate_ = estimate; }
  /// Tilt from a specific-force reading, zero yaw.
  void initialize_from_accel(const Vec3& accel);
  /// Returns false when the accelerometer norm is outside [0.5 g, 1.5 g]
  /// and the correction was skipped.
  bool step(const Vec3& gyro, const Vec3& accel, double dt);

  const Rotation& estimate() const { return estimate_; }
  double roll() const { return estimate_.roll(); }
  double pitch() const { return estimate_.pitch(); }
  double yaw() const { return estimate_.yaw(); }
  double alpha() const { return alpha_; }

 private:
  double alpha_;
  Rotation estimate_;
};

/// One filter update as a pure function of the previous estimate.
Rotation complementary_filter(const Rotation& previous, const Vec3& gyro, const Vec3& accel,
                              double dt, double alpha);

/// Tilt-only attitude (zero yaw) implied by a resting accelerometer reading.
Rotation tilt_from_accel(const Vec3& accel);

}  // namespace tensegrity
