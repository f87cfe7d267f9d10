#include "tensegrity/control.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>

namespace tensegrity {

void ControllerGains::validate() const {
  if (!(zeta_p > 0.0 && zeta_p <= 2.0) || !(omega_p > 0.0) || !(tau_att > 0.0) ||
      !(tau_rate > 0.0)) {
    fail(ErrorCode::InvalidArgument, "controller gains must be positive with zeta_p in (0, 2]");
  }
}

void VehicleParams::validate() const {
  if (!(mass > 0.0) || !(kappa > 0.0) || !(thrust_max > thrust_min)) {
    fail(ErrorCode::InvalidArgument, "vehicle mass, kappa and thrust limits are invalid");
  }
  if (!(frame_mass >= 0.0) || !(frame_mass <= mass)) {
    fail(ErrorCode::InvalidArgument, "frame mass must be in [0, mass]");
  }
  if ((inertia - inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12 ||
      inertia.llt().info() != Eigen::Success) {
    fail(ErrorCode::InvalidArgument, "inertia must be symmetric positive definite");
  }
  for (int i = 0; i < 4; ++i) {
    if (prop_positions[i].x() == 0.0 || prop_positions[i].y() == 0.0) {
      fail(ErrorCode::InvalidArgument, "propeller positions need nonzero x and y");
    }
    if (spin[i] != 1 && spin[i] != -1) fail(ErrorCode::InvalidArgument, "spin must be +-1");
  }
}

PositionCommand position_loop(const Vec3& position, const Vec3& velocity, const Setpoint& sp,
                              const ControllerGains& gains, double mass,
                              const Vec3& previous_z_axis) {
  PositionCommand cmd;
  const double wp = gains.omega_p;
  cmd.acceleration = 2.0 * gains.zeta_p * wp * (sp.velocity - velocity) +
                     wp * wp * (sp.position - position) + kGravity * Vec3::UnitZ();
  const double norm = cmd.acceleration.norm();
  cmd.thrust = mass * norm;
  if (norm < 1e-6 * kGravity) {
    cmd.degenerate = true;
    cmd.z_axis = previous_z_axis.normalized();
  } else {
    cmd.z_axis = cmd.acceleration / norm;
  }
  return cmd;
}

Rotation desired_attitude(const Vec3& z_axis, double yaw) {
  const Vec3 z = z_axis.normalized();
  const Vec3 heading(std::cos(yaw), std::sin(yaw), 0.0);
  Vec3 y = z.cross(heading);
  if (y.norm() < 1e-9) {
    // z along the heading; fall back to the perpendicular horizontal axis
    y = z.cross(Vec3(-std::sin(yaw), std::cos(yaw), 0.0)).cross(z);
  }
  y.normalize();
  const Vec3 x = y.cross(z);
  Mat3 m;
  m.col(0) = x;
  m.col(1) = y;
  m.col(2) = z;
  return Rotation::nearest(m);
}

AttitudeCommand attitude_loop(const Rotation& estimate, const Rotation& desired, const Vec3& omega,
                              const ControllerGains& gains, const Mat3& inertia) {
  AttitudeCommand cmd;
  const Vec3 error = (estimate.inverse() * desired).log();
  cmd.rate = error / gains.tau_att;
  cmd.acceleration = (cmd.rate - omega) / gains.tau_rate;
  cmd.torque = inertia * cmd.acceleration;
  return cmd;
}

Mixer::Mixer(const VehicleParams& params)
    : f_min_(params.thrust_min), f_max_(params.thrust_max) {
  for (int i = 0; i < 4; ++i) {
    const Vec3& r = params.prop_positions[i];
    m_(0, i) = 1.0;
    m_(1, i) = r.y();
    m_(2, i) = -r.x();
    m_(3, i) = params.kappa * params.spin[i];
  }
  Eigen::FullPivLU<Eigen::Matrix4d> lu(m_);
  lu.setThreshold(1e-10);
  if (!lu.isInvertible()) fail(ErrorCode::SingularAllocation, "propeller layout is singular");
  inv_ = lu.inverse();
}

MixerOutput Mixer::mix(const Vec3& torque, double total_thrust) const {
  const Eigen::Vector4d cmd(total_thrust, torque.x(), torque.y(), torque.z());
  const Eigen::Vector4d f = inv_ * cmd;
  MixerOutput out;
  for (int i = 0; i < 4; ++i) {
    out.thrusts[i] = std::clamp(f(i), f_min_, f_max_);
    if (out.thrusts[i] != f(i)) out.clamped = true;
  }
  return out;
}

MixerOutput Mixer::mix_yaw_priority(const Vec3& torque, double total_thrust) const {
  const Eigen::Vector4d base = inv_ * Eigen::Vector4d(total_thrust, torque.x(), torque.y(), 0.0);
  const Eigen::Vector4d yaw = inv_ * Eigen::Vector4d(0.0, 0.0, 0.0, torque.z());
  double scale = 1.0;
  for (int i = 0; i < 4; ++i) {
    if (base(i) < f_min_ || base(i) > f_max_) {
      scale = 0.0;
      break;
    }
    const double f = base(i) + yaw(i);
    if (f > f_max_) scale = std::min(scale, (f_max_ - base(i)) / yaw(i));
    if (f < f_min_) scale = std::min(scale, (f_min_ - base(i)) / yaw(i));
  }
  MixerOutput out;
  out.yaw_scale = scale;
  out.clamped = scale < 1.0;
  for (int i = 0; i < 4; ++i) {
    const double f = base(i) + scale * yaw(i);
    out.thrusts[i] = std::clamp(f, f_min_, f_max_);
    if (out.thrusts[i] != f) out.clamped = true;
  }
  return out;
}

Eigen::Vector4d Mixer::forward(const std::array<double, 4>& thrusts) const {
  return m_ * Eigen::Vector4d(thrusts[0], thrusts[1], thrusts[2], thrusts[3]);
}

Rotation tilt_from_accel(const Vec3& a) {
  const double roll = std::atan2(a.y(), a.z());
  const double pitch = std::atan2(-a.x(), std::hypot(a.y(), a.z()));
  return Rotation::from_euler(0.0, pitch, roll);
}

Rotation complementary_filter(const Rotation& previous, const Vec3& gyro, const Vec3& accel,
                              double dt, double alpha) {
  if (!(dt > 0.0)) fail(ErrorCode::InvalidArgument, "filter step needs dt > 0");
  if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorCode::InvalidArgument, "alpha must be in (0, 1]");
  Rotation r = previous * Rotation::exp(gyro * dt);
  const double an = accel.norm();
  if (an < 0.5 * kGravity || an > 1.5 * kGravity) return r;
  const Vec3 up_est = r * (accel / an);  // should be Earth +z at rest
  const Vec3 axis = up_est.cross(Vec3::UnitZ());
  const double angle = std::atan2(axis.norm(), up_est.z());
  if (axis.norm() < 1e-15) return r;
  return Rotation::from_axis_angle(axis, (1.0 - alpha) * angle) * r;
}

ComplementaryFilter::ComplementaryFilter(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorCode::InvalidArgument, "alpha must be in (0, 1]");
}

void ComplementaryFilter::initialize_from_accel(const Vec3& accel) {
  estimate_ = tilt_from_accel(accel);
}

bool ComplementaryFilter::step(const Vec3& gyro, const Vec3& accel, double dt) {
  const double an = accel.norm();
  estimate_ = complementary_filter(estimate_, gyro, accel, dt, alpha_);
  return an >= 0.5 * kGravity && an <= 1.5 * kGravity;
}

}  // namespace tensegrity
