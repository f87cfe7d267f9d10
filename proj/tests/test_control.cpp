#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "oracles/mixer.hpp"
#include "tensegrity/control.hpp"

using namespace tensegrity;

TEST(PositionLoop, FormulaAndThrust) {
  ControllerGains g;
  Setpoint sp;
  sp.position = Vec3(1.0, -0.5, 2.0);
  sp.velocity = Vec3(0.1, 0.0, 0.0);
  const Vec3 d(0.0, 0.0, 1.0), v(0.0, 0.2, 0.0);
  const auto c = position_loop(d, v, sp, g, 0.252);
  const double w = g.omega_p;
  const Vec3 a = 2 * g.zeta_p * w * (sp.velocity - v) + w * w * (sp.position - d) + Vec3(0, 0, kGravity);
  EXPECT_LT((c.acceleration - a).norm(), 1e-12);
  EXPECT_NEAR(c.thrust, 0.252 * a.norm(), 1e-12);
  EXPECT_LT((c.z_axis - a.normalized()).norm(), 1e-12);
  EXPECT_FALSE(c.degenerate);
}

TEST(PositionLoop, HoverAtSetpoint) {
  const auto c = position_loop(Vec3::Zero(), Vec3::Zero(), Setpoint{}, ControllerGains{}, 0.252);
  EXPECT_NEAR(c.thrust, 0.252 * kGravity, 1e-12);
  EXPECT_LT((c.z_axis - Vec3::UnitZ()).norm(), 1e-15);
}

TEST(PositionLoop, DegenerateHoldsPreviousAxis) {
  ControllerGains g;
  Setpoint sp;
  // Position error cancels gravity exactly.
  sp.position = Vec3(0, 0, -kGravity / (g.omega_p * g.omega_p));
  const Vec3 prev = Vec3(0.1, 0.0, 1.0).normalized();
  const auto c = position_loop(Vec3::Zero(), Vec3::Zero(), sp, g, 0.252, prev);
  EXPECT_TRUE(c.degenerate);
  EXPECT_LT((c.z_axis - prev).norm(), 1e-15);
}

TEST(DesiredAttitude, AxisAndYaw) {
  const Vec3 z = Vec3(0.2, -0.1, 1.0).normalized();
  const Rotation r = desired_attitude(z, 0.7);
  EXPECT_LT((r.matrix().col(2) - z).norm(), 1e-12);
  const Rotation level = desired_attitude(Vec3::UnitZ(), 0.7);
  EXPECT_NEAR(level.yaw(), 0.7, 1e-12);
  // z along the heading direction still yields a proper rotation.
  const Rotation edge = desired_attitude(Vec3::UnitX(), 0.0);
  EXPECT_LT(orthonormality_error(edge.matrix()), 1e-12);
  EXPECT_LT((edge.matrix().col(2) - Vec3::UnitX()).norm(), 1e-12);
}

TEST(AttitudeLoop, Formula) {
  ControllerGains g;
  const Rotation est = Rotation::from_euler(0.1, 0.2, -0.1);
  const Rotation des = Rotation::from_euler(0.3, -0.1, 0.2);
  const Vec3 omega(0.5, -0.2, 0.1);
  const Mat3 J = Vec3(6.5e-4, 6.5e-4, 1.1e-3).asDiagonal();
  const auto c = attitude_loop(est, des, omega, g, J);
  const Vec3 rate = (est.inverse() * des).log() / g.tau_att;
  EXPECT_LT((c.rate - rate).norm(), 1e-12);
  EXPECT_LT((c.torque - J * (rate - omega) / g.tau_rate).norm(), 1e-12);
  const auto zero = attitude_loop(est, est, Vec3::Zero(), g, J);
  EXPECT_LT(zero.torque.norm(), 1e-15);
}

TEST(AttitudeLoop, SettlesFromNinetyDegrees) {
  // Attitude-only rigid body, J w' = tau - w x J w, torque held for 1 ms.
  // Settling time: last instant the error exceeds 2% of its initial value.
  const ControllerGains g;
  const Mat3 J = Vec3(6.5e-4, 6.5e-4, 1.1e-3).asDiagonal();
  for (const Vec3 axis : {Vec3(1, 0, 0), Vec3(0, 0, 1), Vec3(1, 1, 1).normalized()}) {
    const Rotation desired = Rotation::from_euler(0.2, 0.1, -0.3);
    Rotation r = desired * Rotation::from_axis_angle(axis, std::numbers::pi / 2);
    Vec3 w = Vec3::Zero();
    const double dt = 1e-3;
    double settled = 0.0;
    for (int k = 1; k <= 3000; ++k) {
      const auto c = attitude_loop(r, desired, w, g, J);
      w += dt * J.inverse() * (c.torque - w.cross(J * w));
      r = r * Rotation::exp(dt * w);
      if ((r.inverse() * desired).angle() > 0.02 * std::numbers::pi / 2) settled = k * dt;
    }
    const double target = 3.0 * std::max(g.tau_att, g.tau_rate);
    EXPECT_NEAR(settled, target, 0.3 * target) << axis.transpose();
  }
}

TEST(Mixer, RoundTripResidual) {
  const VehicleParams v;
  const Mixer mixer(v);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Vec3 tau(0.02 * u(rng), 0.02 * u(rng), 0.004 * u(rng));
    const double f = 2.0 + u(rng);
    const auto out = mixer.mix(tau, f);
    ASSERT_FALSE(out.clamped);
    const Eigen::Vector4d back = mixer.forward(out.thrusts);
    EXPECT_LE((back - Eigen::Vector4d(f, tau.x(), tau.y(), tau.z())).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Mixer, MatchesClosedFormAllocation) {
  const VehicleParams v;
  const Mixer mixer(v);
  const Vec3 tau(0.01, -0.015, 0.003);
  const auto out = mixer.mix(tau, 3.0);
  const auto ref = oracle::x_layout_thrusts(v.prop_positions, v.spin, v.kappa, 3.0, tau);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(out.thrusts[i], ref[i], 1e-12);
}

TEST(Mixer, ClampsToLimits) {
  const VehicleParams v;
  const Mixer mixer(v);
  const auto out = mixer.mix(Vec3::Zero(), 20.0);
  EXPECT_TRUE(out.clamped);
  for (double f : out.thrusts) EXPECT_EQ(f, v.thrust_max);
}

TEST(Mixer, YawPriorityKeepsRollPitch) {
  const VehicleParams v;
  const Mixer mixer(v);
  // Roll and pitch fit; the yaw demand alone would saturate.
  const Vec3 tau(0.05, -0.03, 0.2);
  const auto out = mixer.mix_yaw_priority(tau, 0.0);
  EXPECT_GT(out.yaw_scale, 0.0);
  EXPECT_LT(out.yaw_scale, 1.0);
  const Eigen::Vector4d back = mixer.forward(out.thrusts);
  EXPECT_NEAR(back(0), 0.0, 1e-12);
  EXPECT_NEAR(back(1), tau.x(), 1e-12);
  EXPECT_NEAR(back(2), tau.y(), 1e-12);
  EXPECT_NEAR(back(3), out.yaw_scale * tau.z(), 1e-12);
  double peak = 0.0;
  for (double f : out.thrusts) peak = std::max(peak, std::abs(f));
  EXPECT_NEAR(peak, v.thrust_max, 1e-12);
  // Without saturation it is the plain allocation.
  const auto small = mixer.mix_yaw_priority(Vec3(0.001, 0.0, 0.001), 1.0);
  const auto plain = mixer.mix(Vec3(0.001, 0.0, 0.001), 1.0);
  EXPECT_EQ(small.yaw_scale, 1.0);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(small.thrusts[i], plain.thrusts[i], 1e-15);
}

TEST(Mixer, SingularLayout) {
  VehicleParams v;
  v.spin = {1, 1, 1, 1};
  EXPECT_THROW(Mixer{v}, Error);
}

TEST(Vehicle, ThrustAndMassRatios) {
  const VehicleParams v;
  EXPECT_NEAR(v.max_total_thrust(), 8.5, 1e-12);
  EXPECT_NEAR(v.thrust_to_weight() / 3.4, 1.0, 0.02);
  EXPECT_NEAR(v.frame_mass_fraction(), 50.0 / 252.0, 1e-12);
  EXPECT_NEAR(v.frame_mass_fraction(), 0.2, 0.01);
}

TEST(Vehicle, Validation) {
  VehicleParams v;
  v.inertia(0, 1) = 1e-3;
  EXPECT_THROW(v.validate(), Error);
  v = VehicleParams{};
  v.thrust_min = 3.0;
  EXPECT_THROW(v.validate(), Error);
  v = VehicleParams{};
  v.frame_mass = 1.0;
  EXPECT_THROW(v.validate(), Error);
}

TEST(Filter, TiltFromAccel) {
  const Rotation r = Rotation::from_euler(0.0, 0.3, -0.4);
  const Vec3 accel = r.inverse() * Vec3(0, 0, kGravity);
  const Rotation t = tilt_from_accel(accel);
  EXPECT_NEAR(t.pitch(), 0.3, 1e-12);
  EXPECT_NEAR(t.roll(), -0.4, 1e-12);
  EXPECT_NEAR(t.yaw(), 0.0, 1e-12);
}

TEST(Filter, TiltErrorShrinksByAlphaPerStep) {
  // Static vehicle, zero gyro: each step keeps alpha of the tilt error.
  const double alpha = 0.98;
  const Rotation truth = Rotation::from_euler(0.5, 0.2, 0.1);
  const Vec3 accel = truth.inverse() * Vec3(0, 0, kGravity);
  ComplementaryFilter f(alpha);
  f.reset(Rotation::from_axis_angle(Vec3::UnitX(), 0.17) * truth);
  auto tilt_error = [&](const Rotation& est) {
    return std::acos(std::clamp((est * (accel / kGravity)).z(), -1.0, 1.0));
  };
  const double e0 = tilt_error(f.estimate());
  for (int k = 1; k <= 100; ++k) {
    f.step(Vec3::Zero(), accel, 0.002);
    EXPECT_NEAR(tilt_error(f.estimate()), e0 * std::pow(alpha, k), 1e-9);
  }
}

TEST(Filter, HeadingFromGyroOnly) {
  ComplementaryFilter f(0.9);
  f.reset(Rotation{});
  const Vec3 accel(0, 0, kGravity);
  for (int k = 0; k < 500; ++k) f.step(Vec3(0, 0, 0.2), accel, 0.002);
  EXPECT_NEAR(f.yaw(), 0.2, 1e-9);
  EXPECT_NEAR(f.roll(), 0.0, 1e-12);
}

TEST(Filter, SkipsCorrectionUnderAcceleration) {
  ComplementaryFilter f(0.5);
  const Rotation start = Rotation::from_euler(0.0, 0.1, 0.0);
  f.reset(start);
  EXPECT_FALSE(f.step(Vec3::Zero(), Vec3(0, 0, 2.0 * kGravity), 0.002));
  EXPECT_LT((f.estimate().matrix() - start.matrix()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(ComplementaryFilter(0.0), Error);
  EXPECT_THROW(complementary_filter(start, Vec3::Zero(), Vec3::UnitZ(), 0.0, 0.9), Error);
}

TEST(Gains, Validation) {
  ControllerGains g;
  g.zeta_p = 0.0;
  EXPECT_THROW(g.validate(), Error);
  g = ControllerGains{};
  g.tau_rate = -1.0;
  EXPECT_THROW(g.validate(), Error);
}
