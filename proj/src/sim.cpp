#include "tensegrity/sim.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace tensegrity {

namespace {

void check_timestep(double dt) {
  if (!(dt > 0.0 && dt <= kMaxTimestep)) {
    fail(ErrorCode::ExcessiveTimestep, "timestep must lie in (0, 0.01] s");
  }
}

// Pose of the body for a pivot angle, plus CoM kinematics.
void apply_pivot(const Pivot& pv, VehicleState& s) {
  s.R = pv.base * Rotation::from_axis_angle(pv.axis, pv.theta);
  const Vec3 r = s.R * (-pv.point);  // anchor -> CoM
  const Vec3 u = pv.base * pv.axis;  // Earth-frame axis, fixed during the pivot
  s.d = pv.anchor + r;
  s.omega = pv.theta_dot * pv.axis;
  s.d_dot = pv.theta_dot * u.cross(r);
  s.d_ddot = pv.theta_ddot * u.cross(r) + pv.theta_dot * pv.theta_dot * u.cross(u.cross(r));
}

VehicleState land(const Pivot& pv, FaceId face, double theta) {
  Pivot rest = pv;
  rest.theta = theta;
  rest.theta_dot = rest.theta_ddot = 0.0;
  VehicleState s;
  apply_pivot(rest, s);
  s.R.orthonormalize();
  s.face = face;
  return s;
}

double axis_inertia(const VehicleParams& vehicle, const Pivot& pv) {
  const Vec3 w = -pv.point;
  const Vec3 perp = w - w.dot(pv.axis) * pv.axis;
  return pv.axis.dot(vehicle.inertia * pv.axis) + vehicle.mass * perp.squaredNorm();
}

}  // namespace

VehicleState resting_state(const TensegrityModel& model, FaceId face, double yaw) {
  VehicleState s;
  s.R = Rotation::from_euler(yaw, 0.0, 0.0) * grounded_attitude(model, face);
  s.d = Vec3(0.0, 0.0, model.face_offset(face));
  s.face = face;
  return s;
}

Pivot begin_pivot(const TensegrityModel& model, const VehicleState& state, const Move& move) {
  if (state.pivot || state.face == 0 || move.from != state.face) {
    fail(ErrorCode::InvalidArgument, "pivot must start from the resting contact face");
  }
  Pivot pv;
  pv.kind = move.kind;
  pv.from = move.from;
  pv.to = move.to;
  pv.nodes = move.pivot_nodes;
  pv.axis = move.axis;
  pv.point = model.node(move.pivot_nodes.front());
  pv.base = state.R;
  pv.anchor = state.d + state.R * pv.point;
  pv.landing_angle = move.angle;
  return pv;
}

HingeModel hinge_model(const VehicleParams& vehicle, const VehicleState& state) {
  if (!state.pivot) fail(ErrorCode::InvalidArgument, "state is not pivoting");
  const Pivot& pv = *state.pivot;
  HingeModel h;
  h.axis = pv.base * pv.axis;
  h.point = pv.anchor;
  h.inertia = axis_inertia(vehicle, pv);
  const Vec3 w = -pv.point;
  h.com_offset = (w - w.dot(pv.axis) * pv.axis).norm();
  return h;
}

Wrench propeller_wrench(const VehicleParams& vehicle, const std::array<double, 4>& thrusts) {
  Wrench w;
  for (int i = 0; i < 4; ++i) {
    const Vec3 f = thrusts[i] * Vec3::UnitZ();
    w.force += f;
    w.torque += vehicle.prop_positions[i].cross(f) + vehicle.kappa * vehicle.spin[i] * f;
  }
  return w;
}

double hinge_gravity_moment(const VehicleParams& vehicle, const Pivot& pivot, double theta) {
  // d/dtheta of m g z_CoM; zero when the CoM is straight above the axis.
  const Rotation r = pivot.base * Rotation::from_axis_angle(pivot.axis, theta);
  return vehicle.mass * kGravity * (r * pivot.axis.cross(-pivot.point)).z();
}

double hinge_applied_moment(const Pivot& pivot, const Wrench& wrench) {
  return pivot.axis.dot(wrench.torque + (-pivot.point).cross(wrench.force));
}

VehicleState step_hinge(const TensegrityModel& model, const VehicleParams& vehicle,
                        const VehicleState& state, const Wrench& wrench, double dt,
                        const HingeOptions& options) {
  check_timestep(dt);
  VehicleState s = state;
  if (!s.pivot) {
    if (s.face == 0) fail(ErrorCode::InvalidArgument, "hinge model needs a contact face");
    std::optional<Pivot> best;
    double best_moment = 1e-12;
    auto consider = [&](const Move& m) {
      Pivot pv = begin_pivot(model, s, m);
      const double net = hinge_applied_moment(pv, wrench) - hinge_gravity_moment(vehicle, pv, 0.0);
      if (net > best_moment) {
        best_moment = net;
        best = std::move(pv);
      }
    };
    for (const auto& adj : model.face_adjacency()) {
      if (adj.face_a == s.face) consider(edge_move(model, s.face, adj.face_b));
      if (adj.face_b == s.face) consider(edge_move(model, s.face, adj.face_a));
    }
    for (const auto& m : options.node_pivots) {
      if (m.from == s.face) consider(m);
    }
    if (!best) {
      s.d_dot.setZero();
      s.d_ddot.setZero();
      s.omega.setZero();
      return s;
    }
    s.pivot = std::move(best);
  }

  Pivot& pv = *s.pivot;
  const double inertia = axis_inertia(vehicle, pv);
  const double applied = hinge_applied_moment(pv, wrench);
  const double a0 = (applied - hinge_gravity_moment(vehicle, pv, pv.theta)) / inertia;
  const double theta = pv.theta + dt * pv.theta_dot + 0.5 * dt * dt * a0;
  const double a1 = (applied - hinge_gravity_moment(vehicle, pv, theta)) / inertia;
  pv.theta = theta;
  pv.theta_dot += 0.5 * dt * (a0 + a1);
  pv.theta_ddot = a1;

  if (options.contacts_enabled) {
    const bool reached_to = pv.theta >= pv.landing_angle;
    const bool fell_back = pv.theta <= 0.0;
    if (reached_to || fell_back) {
      const double contact_angle = reached_to ? pv.landing_angle : 0.0;
      const double rebound = -options.restitution * pv.theta_dot;
      if (std::abs(rebound) < 1e-3) {
        return land(pv, reached_to ? pv.to : pv.from, contact_angle);
      }
      pv.theta = contact_angle;
      pv.theta_dot = rebound;
    }
  }
  s.face = pv.from;
  apply_pivot(pv, s);
  return s;
}

VehicleState step_flight(const VehicleParams& vehicle, const VehicleState& state,
                         const std::array<double, 4>& thrusts, double dt) {
  check_timestep(dt);
  const Wrench w = propeller_wrench(vehicle, thrusts);
  const Mat3& J = vehicle.inertia;
  VehicleState s = state;
  s.face = 0;
  s.pivot.reset();
  const Vec3 omega_dot = J.inverse() * (w.torque - state.omega.cross(J * state.omega));
  s.omega = state.omega + dt * omega_dot;
  s.d_ddot = state.R * w.force / vehicle.mass - kGravity * Vec3::UnitZ();
  s.d_dot = state.d_dot + dt * s.d_ddot;
  s.d = state.d + dt * s.d_dot;
  s.R = state.R * Rotation::exp(dt * s.omega);
  if (orthonormality_error(s.R.matrix()) > 1e-13) s.R.orthonormalize();
  return s;
}

double kinetic_energy(const VehicleParams& vehicle, const VehicleState& state) {
  return 0.5 * vehicle.mass * state.d_dot.squaredNorm() +
         0.5 * state.omega.dot(vehicle.inertia * state.omega);
}

double potential_energy(const VehicleParams& vehicle, const VehicleState& state) {
  return vehicle.mass * kGravity * state.d.z();
}

void NoiseConfig::validate() const {
  if (!(gyro_sigma >= 0.0) || !(accel_sigma >= 0.0) || !gyro_bias.allFinite()) {
    fail(ErrorCode::InvalidArgument, "noise parameters must be finite and nonnegative");
  }
}

ImuSample ideal_imu(const VehicleState& state) {
  ImuSample imu;
  imu.gyro = state.omega;
  imu.accel = state.R.inverse() * (state.d_ddot + kGravity * Vec3::UnitZ());
  return imu;
}

void ReorientationOptions::validate() const {
  check_timestep(dt);
  const double ratio = control_dt / dt;
  if (!(control_dt >= dt) || std::abs(ratio - std::round(ratio)) > 1e-9) {
    fail(ErrorCode::InvalidArgument, "control_dt must be a whole multiple of dt");
  }
  if (!(filter_alpha > 0.0 && filter_alpha <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "filter alpha must be in (0, 1]");
  }
  if (!(timeout > 0.0)) fail(ErrorCode::InvalidArgument, "timeout must be positive");
  if (!(restitution >= 0.0 && restitution < 1.0)) {
    fail(ErrorCode::InvalidArgument, "restitution must be in [0, 1)");
  }
  if (machine.debounce_steps < 1 || machine.settle_steps < 1 || machine.rotate_timeout_steps < 1 ||
      !(machine.settle_rate > 0.0)) {
    fail(ErrorCode::InvalidArgument, "state machine settings must be positive");
  }
  noise.validate();
}

ReorientationResult run_reorientation(const TensegrityModel& model, const VehicleParams& vehicle,
                                      const ControllerGains& gains, const FaceGraph& graph,
                                      FaceId start, const ReorientationOptions& options) {
  options.validate();
  vehicle.validate();
  gains.validate();
  if (start < 1 || start > kFaceCount) fail(ErrorCode::OutOfRange, "start face outside 1..20");

  const long ratio = std::lround(options.control_dt / options.dt);
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&](double sigma) {
    return Vec3(sigma * normal(rng), sigma * normal(rng), sigma * normal(rng));
  };

  const Mixer mixer(vehicle);
  ComplementaryFilter filter(options.filter_alpha);
  ReorientationStateMachine machine(model, graph, options.machine);
  const HingeOptions hinge{options.restitution, true, graph.specials};

  ReorientationResult result;
  result.start = start;
  result.contacts = {start};
  result.initial_plan = plan_path(graph, start);
  result.events.push_back({0.0, "start", start, start, 0.0, 0.0});

  VehicleState s = resting_state(model, start, options.initial_yaw);
  std::array<double, 4> thrusts{};
  bool cut = false;
  std::optional<std::pair<FaceId, FaceId>> active;
  const long max_steps = std::lround(options.timeout / options.dt);

  for (long k = 0;; ++k) {
    const double t = static_cast<double>(k) * options.dt;
    if (k % ratio == 0) {
      ImuSample imu = ideal_imu(s);
      imu.gyro += options.noise.gyro_bias + gaussian(options.noise.gyro_sigma);
      imu.accel += gaussian(options.noise.accel_sigma);
      if (k == 0) {
        filter.initialize_from_accel(imu.accel);
      } else {
        filter.step(imu.gyro, imu.accel, options.control_dt);
      }
      const ReorientCommand cmd = machine.step(filter.estimate(), imu.gyro);
      if (cmd.kind == CommandKind::Rotate || cmd.kind == CommandKind::Replan) {
        const AttitudeCommand att =
            attitude_loop(filter.estimate(), cmd.desired, imu.gyro, gains, vehicle.inertia);
        thrusts = mixer.mix_yaw_priority(att.torque, 0.0).thrusts;
        const auto pair = std::make_pair(cmd.from, cmd.to);
        if (cmd.kind == CommandKind::Replan) {
          result.events.push_back({t, "replan", cmd.identified, cmd.to, 0.0, 0.0});
        }
        if (!active || *active != pair || cut) {
          result.events.push_back({t, "rotate", cmd.from, cmd.to, 0.0, 0.0});
        }
        active = pair;
        cut = false;
      } else {
        thrusts = {0.0, 0.0, 0.0, 0.0};
        if (cmd.kind == CommandKind::CutThrust && !cut && active) {
          result.events.push_back({t, "cut_thrust", active->first, active->second, 0.0, 0.0});
        }
        cut = true;
      }
      double total = 0.0, peak = 0.0;
      for (double f : thrusts) {
        total += f;
        peak = std::max(peak, std::abs(f));
      }
      if (peak > 0.0) result.thrust_ever_commanded = true;
      if (cut) result.max_thrust_while_cut = std::max(result.max_thrust_while_cut, peak);
      if (!result.events.empty() && result.events.back().t == t) {
        result.events.back().total_thrust = total;
        result.events.back().max_abs_thrust = peak;
      }
      if (options.record_trajectory) {
        TrajectoryRow row;
        row.t = t;
        row.d = s.d;
        row.euler = Vec3(s.R.yaw(), s.R.pitch(), s.R.roll());
        row.omega = s.omega;
        const Rotation& e = filter.estimate();
        row.estimate_euler = Vec3(e.yaw(), e.pitch(), e.roll());
        row.contact = s.face;
        row.identified = cmd.identified;
        row.phase = cmd.phase;
        row.command = cmd.kind;
        row.target = cmd.to;
        row.thrusts = thrusts;
        result.trajectory.push_back(row);
      }
      if (cmd.kind == CommandKind::Done) {
        result.reached = s.face == graph.goal && !s.pivot;
        result.time = t;
        result.replans = machine.replans();
        result.events.push_back({t, "done", cmd.identified, cmd.identified, 0.0, 0.0});
        return result;
      }
    }
    if (k >= max_steps) {
      result.timed_out = true;
      result.time = t;
      result.replans = machine.replans();
      result.events.push_back({t, "timeout", s.face, s.face, 0.0, 0.0});
      return result;
    }
    const FaceId before = s.face;
    s = step_hinge(model, vehicle, s, propeller_wrench(vehicle, thrusts), options.dt, hinge);
    if (!s.pivot && s.face != before) {
      result.contacts.push_back(s.face);
      result.events.push_back({t + options.dt, "contact", before, s.face, 0.0, 0.0});
    }
  }
}

MonteCarloSummary monte_carlo(const TensegrityModel& model, const VehicleParams& vehicle,
                              const ControllerGains& gains, const FaceGraph& graph, int trials,
                              std::uint64_t base_seed, const ReorientationOptions& options) {
  if (trials < 0) fail(ErrorCode::InvalidArgument, "trial count must be nonnegative");
  MonteCarloSummary out;
  out.trials = trials;
  for (int i = 0; i < trials; ++i) {
    const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(i);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      0x5eedu};
    std::mt19937_64 setup(seq);
    const FaceId start = std::uniform_int_distribution<int>(2, kFaceCount)(setup);
    ReorientationOptions run = options;
    run.seed = seed;
    run.initial_yaw = std::uniform_real_distribution<double>(-std::numbers::pi, std::numbers::pi)(setup);
    run.record_trajectory = false;
    const ReorientationResult r = run_reorientation(model, vehicle, gains, graph, start, run);
    out.starts.push_back(start);
    out.seeds.push_back(seed);
    out.success.push_back(r.reached);
    out.times.push_back(r.time);
    if (r.reached) ++out.reached;
  }
  return out;
}

std::vector<FlightSample> run_flight_step(const VehicleParams& vehicle, const ControllerGains& gains,
                                          const FlightStepOptions& options) {
  vehicle.validate();
  gains.validate();
  check_timestep(options.dt);
  const long ratio = std::lround(options.control_dt / options.dt);
  if (ratio < 1 || std::abs(ratio * options.dt - options.control_dt) > 1e-12) {
    fail(ErrorCode::InvalidArgument, "control_dt must be a whole multiple of dt");
  }
  const Mixer mixer(vehicle);
  VehicleState s;
  s.d = options.initial_offset;
  Vec3 z_prev = Vec3::UnitZ();
  std::array<double, 4> thrusts{};
  std::vector<FlightSample> out;
  const long steps = std::lround(options.duration / options.dt);
  double total_thrust = 0.0;
  for (long k = 0; k <= steps; ++k) {
    if (k % ratio == 0) {
      const PositionCommand pos = position_loop(s.d, s.d_dot, Setpoint{}, gains, vehicle.mass, z_prev);
      z_prev = pos.z_axis;
      const Rotation desired = desired_attitude(pos.z_axis, 0.0);
      if (options.point_mass) {
        s.R = desired;
        total_thrust = pos.thrust;
        thrusts.fill(pos.thrust / 4.0);
      } else {
        const AttitudeCommand att = attitude_loop(s.R, desired, s.omega, gains, vehicle.inertia);
        thrusts = mixer.mix(att.torque, pos.thrust).thrusts;
      }
      out.push_back({static_cast<double>(k) * options.dt, s.d, s.d_dot,
                     Vec3(s.R.yaw(), s.R.pitch(), s.R.roll()), thrusts});
    }
    if (k == steps) break;
    if (options.point_mass) {
      s.d_ddot = s.R * Vec3(0.0, 0.0, total_thrust / vehicle.mass) - kGravity * Vec3::UnitZ();
      s.d_dot += options.dt * s.d_ddot;
      s.d += options.dt * s.d_dot;
    } else {
      s = step_flight(vehicle, s, thrusts, options.dt);
    }
  }
  return out;
}

std::optional<double> damping_from_extrema(const std::vector<double>& signal, double floor) {
  if (signal.size() < 3 || signal.front() == 0.0) return std::nullopt;
  std::vector<double> extrema{signal.front()};
  for (std::size_t i = 1; i + 1 < signal.size(); ++i) {
    const double a = signal[i] - signal[i - 1];
    const double b = signal[i + 1] - signal[i];
    if ((a > 0.0 && b <= 0.0) || (a < 0.0 && b >= 0.0)) extrema.push_back(signal[i]);
  }
  const double scale = std::abs(signal.front());
  double sum = 0.0;
  int pairs = 0;
  for (std::size_t k = 0; k + 1 < extrema.size(); ++k) {
    const double x0 = std::abs(extrema[k]);
    const double x1 = std::abs(extrema[k + 1]);
    if (x1 < floor * scale || extrema[k] * extrema[k + 1] >= 0.0) break;
    const double delta = std::log(x0 / x1);
    sum += delta / std::sqrt(std::numbers::pi * std::numbers::pi + delta * delta);
    ++pairs;
  }
  if (pairs == 0) return std::nullopt;
  return sum / pairs;
}

WallImpactResult simulate_wall_impact(const TensegrityModel& model, const MaterialSpec& materials,
                                      double mass, double speed, double stopping_distance) {
  materials.validate();
  WallImpactResult r;
  r.speed = speed;
  r.stopping_distance = stopping_distance;
  r.force = estimate_impact_force(mass, speed, stopping_distance);
  if (r.force > 0.0) {
    r.sweep = sweep(model, r.force, materials);
    r.verdict = check_components(r.sweep->max_tension, r.sweep->max_compression, materials);
  } else {
    r.verdict = check_components(0.0, 0.0, materials);
  }
  return r;
}

}  // namespace tensegrity
