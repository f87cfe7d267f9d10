#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles/pendulum.hpp"
#include "tensegrity/config.hpp"
#include "tensegrity/sim.hpp"

using namespace tensegrity;

namespace {

const TensegrityModel& model() {
  static const TensegrityModel m = build_icosahedron(0.20);
  return m;
}

const ResolvedGraph& graph() {
  static const ResolvedGraph g = resolve_graph(model(), RunConfig{});
  return g;
}

VehicleState pivoting(FaceId from, FaceId to, double theta_dot) {
  VehicleState s = resting_state(model(), from, 0.25);
  Pivot pv = begin_pivot(model(), s, edge_move(model(), from, to));
  pv.theta_dot = theta_dot;
  s.pivot = pv;
  return s;
}

double total_energy(const VehicleParams& v, const VehicleState& s) {
  return kinetic_energy(v, s) + potential_energy(v, s);
}

ReorientationOptions quiet_options() {
  ReorientationOptions o;
  o.noise = NoiseConfig{};
  o.record_trajectory = false;
  o.timeout = 30.0;
  return o;
}

}  // namespace

TEST(Resting, PoseOnFace) {
  for (FaceId f = 1; f <= kFaceCount; ++f) {
    const auto s = resting_state(model(), f, 0.4);
    EXPECT_NEAR(s.d.z(), model().face_offset(f), 1e-15);
    EXPECT_LT((s.R * model().face_inward_normal(f) - Vec3::UnitZ()).norm(), 1e-12);
    // The face nodes touch the ground, no node is below it.
    for (int i = 0; i < kNodeCount; ++i) EXPECT_GE((s.d + s.R * model().node(i)).z(), -1e-12);
    for (int i : model().face_nodes(f)) EXPECT_NEAR((s.d + s.R * model().node(i)).z(), 0.0, 1e-12);
    const auto imu = ideal_imu(s);
    EXPECT_LT((imu.accel - s.R.inverse() * Vec3(0, 0, kGravity)).norm(), 1e-12);
    EXPECT_LT(imu.gyro.norm(), 1e-15);
  }
}

TEST(Hinge, StaysAtRestWithoutTorque) {
  const VehicleParams v;
  auto s = resting_state(model(), 20);
  for (int k = 0; k < 100; ++k) s = step_hinge(model(), v, s, Wrench{}, 1e-3);
  EXPECT_FALSE(s.pivot);
  EXPECT_EQ(s.face, 20);
}

TEST(Hinge, ModelMatchesIndependentInertia) {
  const VehicleParams v;
  const auto s = pivoting(20, 16, 0.0);
  const auto h = hinge_model(v, s);
  const Vec3 u_body = s.pivot->axis;
  const Vec3 r = -s.pivot->point;
  const Vec3 perp = r - r.dot(u_body) * u_body;
  EXPECT_NEAR(h.inertia, u_body.dot(v.inertia * u_body) + v.mass * perp.squaredNorm(), 1e-15);
  EXPECT_NEAR(h.com_offset, perp.norm(), 1e-15);
  EXPECT_NEAR(std::abs(h.axis.z()), 0.0, 1e-12);  // ground edge is horizontal
  EXPECT_THROW(hinge_model(v, resting_state(model(), 1)), Error);
}

TEST(Hinge, GravityMomentIsDerivativeOfPotential) {
  const VehicleParams v;
  const auto s = pivoting(20, 16, 0.0);
  const Pivot& pv = *s.pivot;
  const oracle::HingeBody body{s.R * pv.axis, s.d - pv.anchor, v.mass, 1.0, kGravity};
  for (double th : {0.0, 0.2, 0.5, 0.9}) {
    const double h = 1e-6;
    const double dU = v.mass * kGravity *
                      (oracle::height_change(body, th + h) - oracle::height_change(body, th - h)) / (2 * h);
    EXPECT_NEAR(hinge_gravity_moment(v, pv, th), dU, 1e-7);
  }
}

TEST(Hinge, ConservesEnergyUnforced) {
  const VehicleParams v;
  HingeOptions opt;
  opt.contacts_enabled = false;
  auto s = pivoting(20, 16, 3.0);
  const double dt = 1e-3;
  // The hand-built pivot state carries no body velocity yet, so the kinetic
  // term comes from the hinge inertia.
  const double e0 = potential_energy(v, s) + 0.5 * hinge_model(v, s).inertia * 9.0;
  double worst = 0.0;
  for (int k = 0; k < 2000; ++k) {
    s = step_hinge(model(), v, s, Wrench{}, dt, opt);
    worst = std::max(worst, std::abs(total_energy(v, s) - e0));
  }
  // 0.1 % per simulated second over 2 s.
  EXPECT_LT(worst / e0, 0.001 * 2.0);
}

TEST(Hinge, TimeToSwitchMatchesEnergyQuadrature) {
  const VehicleParams v;
  for (double w0 : {4.0, 6.0, 9.0}) {
    auto s = pivoting(20, 16, w0);
    const Pivot pv = *s.pivot;
    const Vec3 u = s.R * pv.axis;
    const Vec3 r0 = s.d - pv.anchor;
    const Vec3 perp = r0 - r0.dot(u) * u;
    const double inertia = pv.axis.dot(v.inertia * pv.axis) + v.mass * perp.squaredNorm();
    const oracle::HingeBody body{u, r0, v.mass, inertia, kGravity};
    const double expected = oracle::time_to_angle(body, w0, pv.landing_angle);
    ASSERT_TRUE(std::isfinite(expected)) << w0;

    const double dt = 1e-4;
    int steps = 0;
    while (s.pivot && steps < 200000) {
      s = step_hinge(model(), v, s, Wrench{}, dt);
      ++steps;
    }
    EXPECT_EQ(s.face, 16);
    EXPECT_NEAR(steps * dt, expected, 2 * dt) << w0;
  }
}

TEST(Hinge, FallsBackWhenTooSlow) {
  const VehicleParams v;
  auto s = pivoting(20, 16, 0.5);
  int steps = 0;
  while (s.pivot && steps < 100000) {
    s = step_hinge(model(), v, s, Wrench{}, 1e-3);
    ++steps;
  }
  EXPECT_EQ(s.face, 20);
  EXPECT_LT((s.R * model().face_inward_normal(20) - Vec3::UnitZ()).norm(), 1e-9);
}

TEST(Hinge, StrongTorqueStartsTheIntendedPivot) {
  const VehicleParams v;
  const auto s0 = resting_state(model(), 20, 0.0);
  const Move m = edge_move(model(), 20, 16);
  // Pure torque about the pivot axis, large enough to lift.
  Wrench w;
  w.torque = m.axis * (2.0 * required_pivot_moment(model(), m, v.mass));
  const auto s1 = step_hinge(model(), v, s0, w, 1e-3);
  ASSERT_TRUE(s1.pivot);
  EXPECT_EQ(s1.pivot->to, 16);
  EXPECT_GT(s1.pivot->theta, 0.0);
}

TEST(Hinge, Restitution) {
  const VehicleParams v;
  HingeOptions opt;
  opt.restitution = 0.5;
  auto s = pivoting(20, 16, 9.0);
  bool rebounded = false;
  for (int k = 0; k < 20000 && s.pivot; ++k) {
    s = step_hinge(model(), v, s, Wrench{}, 1e-4, opt);
    if (s.pivot && s.pivot->theta_dot < 0.0 && s.pivot->theta > 0.5) rebounded = true;
  }
  EXPECT_TRUE(rebounded);
}

TEST(Hinge, TimestepLimits) {
  const VehicleParams v;
  const auto s = resting_state(model(), 20);
  auto code = [&](double dt) {
    try {
      step_hinge(model(), v, s, Wrench{}, dt);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Internal;
  };
  EXPECT_EQ(code(0.02), ErrorCode::ExcessiveTimestep);
  EXPECT_EQ(code(0.0), ErrorCode::ExcessiveTimestep);
  EXPECT_NO_THROW(step_hinge(model(), v, s, Wrench{}, kMaxTimestep));
  EXPECT_THROW(step_flight(v, s, {0, 0, 0, 0}, 0.011), Error);
}

TEST(Flight, FreeFallAndHover) {
  const VehicleParams v;
  VehicleState s;
  const double dt = 1e-3;
  for (int k = 0; k < 1000; ++k) s = step_flight(v, s, {0, 0, 0, 0}, dt);
  // Semi-implicit Euler: z = -g dt^2 n(n+1)/2.
  EXPECT_NEAR(s.d.z(), -kGravity * dt * dt * 1000.0 * 1001.0 / 2.0, 1e-9);
  VehicleState h;
  const double f = v.mass * kGravity / 4.0;
  for (int k = 0; k < 1000; ++k) h = step_flight(v, h, {f, f, f, f}, dt);
  EXPECT_LT(h.d.norm(), 1e-12);
  EXPECT_LT(h.omega.norm(), 1e-12);
}

TEST(Flight, WrenchFromThrusts) {
  const VehicleParams v;
  const Mixer mixer(v);
  const std::array<double, 4> t = {0.5, 1.0, -0.2, 0.3};
  const Wrench w = propeller_wrench(v, t);
  const Eigen::Vector4d ref = mixer.forward(t);
  EXPECT_NEAR(w.force.z(), ref(0), 1e-15);
  EXPECT_LT((w.torque - ref.tail<3>()).norm(), 1e-15);
}

TEST(Flight, TorqueFreeSpinKeepsMomentum) {
  const VehicleParams v;
  VehicleState s;
  s.omega = Vec3(0.3, 2.0, 0.1);
  const Vec3 L0 = s.R * (v.inertia * s.omega);
  for (int k = 0; k < 1000; ++k) {
    const double f = 0.0;
    s = step_flight(v, s, {f, f, f, f}, 1e-3);
  }
  EXPECT_LT(orthonormality_error(s.R.matrix()), 1e-12);
  EXPECT_LT((s.R * (v.inertia * s.omega) - L0).norm() / L0.norm(), 0.02);
}

TEST(Damping, RecoversKnownRatio) {
  for (double zeta : {0.1, 0.3, 0.5, 0.7}) {
    const double wn = 2.0, wd = wn * std::sqrt(1 - zeta * zeta);
    std::vector<double> x;
    for (int k = 0; k < 20000; ++k) {
      const double t = k * 1e-3;
      // Response from rest at unit offset.
      x.push_back(std::exp(-zeta * wn * t) *
                  (std::cos(wd * t) + zeta * wn / wd * std::sin(wd * t)));
    }
    const auto est = damping_from_extrema(x);
    ASSERT_TRUE(est);
    EXPECT_NEAR(*est, zeta, 2e-3) << zeta;
  }
  EXPECT_FALSE(damping_from_extrema({1.0, 0.9, 0.8, 0.7}));
}

TEST(Damping, PointMassStepWithinTenPercent) {
  const VehicleParams v;
  for (double zeta : {0.3, 0.5, 0.7}) {
    ControllerGains g;
    g.zeta_p = zeta;
    FlightStepOptions o;
    o.point_mass = true;
    o.duration = 15.0;
    const auto samples = run_flight_step(v, g, o);
    std::vector<double> x;
    for (const auto& s : samples) x.push_back(s.d.x());
    const auto est = damping_from_extrema(x);
    ASSERT_TRUE(est);
    EXPECT_LT(std::abs(*est - zeta) / zeta, 0.10) << zeta;
  }
}

TEST(Damping, FullModelSettles) {
  const VehicleParams v;
  FlightStepOptions o;
  const auto samples = run_flight_step(v, ControllerGains{}, o);
  EXPECT_LT(samples.back().d.norm(), 1e-3);
  for (const auto& s : samples) {
    for (double f : s.thrusts) {
      EXPECT_GE(f, v.thrust_min);
      EXPECT_LE(f, v.thrust_max);
    }
  }
}

TEST(Reorientation, ZeroNoiseFollowsPlanFromEveryFace) {
  const VehicleParams v;
  const auto o = quiet_options();
  for (FaceId f = 1; f <= kFaceCount; ++f) {
    const auto r = run_reorientation(model(), v, ControllerGains{}, graph().graph, f, o);
    EXPECT_TRUE(r.reached) << f;
    EXPECT_FALSE(r.timed_out) << f;
    EXPECT_EQ(r.contacts, r.initial_plan.faces()) << f;
    EXPECT_EQ(r.max_thrust_while_cut, 0.0) << f;
    EXPECT_EQ(r.replans, 0) << f;
  }
}

TEST(Reorientation, EventsAndThrustCut) {
  const VehicleParams v;
  auto o = quiet_options();
  o.record_trajectory = true;
  const auto r = run_reorientation(model(), v, ControllerGains{}, graph().graph, 20, o);
  ASSERT_TRUE(r.reached);
  EXPECT_TRUE(r.thrust_ever_commanded);
  int cuts = 0, contacts = 0;
  for (const auto& e : r.events) {
    if (e.kind == "cut_thrust") {
      ++cuts;
      EXPECT_EQ(e.max_abs_thrust, 0.0);
    }
    if (e.kind == "contact") ++contacts;
  }
  EXPECT_EQ(contacts, 5);
  EXPECT_EQ(cuts, 5);
  EXPECT_EQ(r.events.front().kind, "start");
  EXPECT_EQ(r.events.back().kind, "done");
  // While settling every propeller is off.
  for (const auto& row : r.trajectory) {
    if (row.phase == Phase::Settle) {
      for (double f : row.thrusts) EXPECT_EQ(f, 0.0);
    }
  }
}

TEST(Reorientation, DeterministicForSeed) {
  const VehicleParams v;
  ReorientationOptions o = RunConfig::default_simulation();
  o.seed = 42;
  const auto a = run_reorientation(model(), v, ControllerGains{}, graph().graph, 13, o);
  const auto b = run_reorientation(model(), v, ControllerGains{}, graph().graph, 13, o);
  ASSERT_EQ(a.trajectory.size(), b.trajectory.size());
  for (size_t i = 0; i < a.trajectory.size(); ++i) {
    EXPECT_EQ(a.trajectory[i].d, b.trajectory[i].d);
    EXPECT_EQ(a.trajectory[i].thrusts, b.trajectory[i].thrusts);
  }
  o.seed = 43;
  const auto c = run_reorientation(model(), v, ControllerGains{}, graph().graph, 13, o);
  EXPECT_NE(a.trajectory.back().estimate_euler, c.trajectory.back().estimate_euler);
}

TEST(Reorientation, TimeoutIsFlagged) {
  const VehicleParams v;
  auto o = quiet_options();
  o.timeout = 0.1;
  const auto r = run_reorientation(model(), v, ControllerGains{}, graph().graph, 20, o);
  EXPECT_FALSE(r.reached);
  EXPECT_TRUE(r.timed_out);
  EXPECT_EQ(r.events.back().kind, "timeout");
}

TEST(Reorientation, OptionValidation) {
  const VehicleParams v;
  auto o = quiet_options();
  o.control_dt = 1.5e-3;  // not a multiple of dt
  EXPECT_THROW(run_reorientation(model(), v, ControllerGains{}, graph().graph, 20, o), Error);
  o = quiet_options();
  EXPECT_THROW(run_reorientation(model(), v, ControllerGains{}, graph().graph, 21, o), Error);
  o.noise.gyro_sigma = -1.0;
  EXPECT_THROW(o.validate(), Error);
}

TEST(MonteCarlo, SmallBatch) {
  const VehicleParams v;
  ReorientationOptions o = RunConfig::default_simulation();
  o.record_trajectory = false;
  const auto mc = monte_carlo(model(), v, ControllerGains{}, graph().graph, 10, 7, o);
  EXPECT_EQ(mc.trials, 10);
  EXPECT_GE(mc.reached, 9);
  for (FaceId f : mc.starts) {
    EXPECT_GE(f, 2);
    EXPECT_LE(f, 20);
  }
  const auto again = monte_carlo(model(), v, ControllerGains{}, graph().graph, 10, 7, o);
  EXPECT_EQ(mc.starts, again.starts);
  EXPECT_EQ(mc.times, again.times);
}

TEST(WallImpact, ChainAndLinearity) {
  const auto mat = RunConfig{}.materials();
  const auto a = simulate_wall_impact(model(), mat, 0.252, 6.5, 0.02);
  EXPECT_NEAR(a.force, 266.175, 1e-9);
  ASSERT_TRUE(a.sweep);
  EXPECT_EQ(a.sweep->cases.size(), 14u);
  const auto b = simulate_wall_impact(model(), mat, 0.252, 13.0, 0.02);
  EXPECT_NEAR(b.force / a.force, 4.0, 1e-12);
  EXPECT_NEAR(b.sweep->max_tension / a.sweep->max_tension, 4.0, 1e-8);
  EXPECT_NEAR(b.sweep->max_compression / a.sweep->max_compression, 4.0, 1e-8);
  const auto zero = simulate_wall_impact(model(), mat, 0.252, 0.0, 0.02);
  EXPECT_FALSE(zero.sweep);
  EXPECT_TRUE(zero.verdict.passed());
  const auto again = simulate_wall_impact(model(), mat, 0.252, 6.5, 0.02);
  EXPECT_EQ(again.sweep->max_tension, a.sweep->max_tension);
}
