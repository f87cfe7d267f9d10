#include "tensegrity/reorient.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <tuple>

namespace tensegrity {

Rotation face_attitude(const TensegrityModel& model, FaceId face) {
  const Vec3 v = model.face_inward_normal(face);
  if (1.0 + v.z() < 1e-12) {
    return Rotation::from_matrix(Vec3(1.0, -1.0, -1.0).asDiagonal().toDenseMatrix());
  }
  return Rotation::aligning(Vec3::UnitZ(), v);
}

Rotation grounded_attitude(const TensegrityModel& model, FaceId face) {
  // At rest the accelerometer reads g along the inward normal.
  return tilt_from_accel(model.face_inward_normal(face));
}

Tilt face_tilt(const TensegrityModel& model, FaceId face) {
  const Rotation g = grounded_attitude(model, face);
  return {g.pitch(), g.roll()};
}

double rotation_angle(const Rotation& r) { return r.angle(); }

FaceId identify_contact_face(const TensegrityModel& model, double pitch, double roll) {
  const Rotation estimate = Rotation::from_euler(0.0, pitch, roll);
  FaceId best = 1;
  double best_angle = std::numeric_limits<double>::infinity();
  for (FaceId f = 1; f <= kFaceCount; ++f) {
    const Tilt t = face_tilt(model, f);
    const Rotation delta = Rotation::from_euler(0.0, t.pitch, t.roll).inverse() * estimate;
    const double a = rotation_angle(delta);
    if (a < best_angle) {
      best_angle = a;
      best = f;
    }
  }
  return best;
}

Move edge_move(const TensegrityModel& model, FaceId from, FaceId to) {
  const FaceAdjacency* adj = model.find_adjacency(from, to);
  if (from == to || adj == nullptr) {
    fail(ErrorCode::NotAdjacent,
         "faces " + std::to_string(from) + " and " + std::to_string(to) + " are not adjacent");
  }
  Move m;
  m.from = from;
  m.to = to;
  m.kind = MoveKind::Edge;
  m.pivot_nodes = {adj->shared[0], adj->shared[1]};
  m.axis = model.face_inward_normal(to).cross(model.face_inward_normal(from)).normalized();
  m.angle = adj->angle;
  m.weight = adj->angle;
  return m;
}

Move node_move(const TensegrityModel& model, FaceId from, FaceId to) {
  const auto shared = model.shared_nodes(from, to);
  if (from == to || shared.size() != 1) {
    fail(ErrorCode::InvalidArgument, "node pivot needs faces sharing exactly one node");
  }
  const Vec3 vf = model.face_inward_normal(from);
  const Vec3 vt = model.face_inward_normal(to);
  const Vec3 axis = vt.cross(vf);
  if (axis.norm() < 1e-12) fail(ErrorCode::InvalidArgument, "node pivot between parallel faces");
  Move m;
  m.from = from;
  m.to = to;
  m.kind = MoveKind::Node;
  m.pivot_nodes = {shared[0]};
  m.axis = axis.normalized();
  m.angle = std::acos(std::clamp(vt.dot(vf), -1.0, 1.0));
  m.weight = m.angle;
  return m;
}

Rotation target_attitude(const TensegrityModel& model, const Rotation& estimate, const Move& move) {
  if (move.from == move.to) fail(ErrorCode::InvalidArgument, "target face equals current face");
  const Vec3 v_to = model.face_inward_normal(move.to);
  if (move.kind == MoveKind::Node) {
    return Rotation::from_axis_angle(estimate * move.axis, move.angle) * estimate;
  }
  if (model.find_adjacency(move.from, move.to) == nullptr) {
    fail(ErrorCode::NotAdjacent, "edge move between non-adjacent faces");
  }
  const Vec3 edge = model.node(move.pivot_nodes[0]) - model.node(move.pivot_nodes[1]);
  const Vec3 axis_earth = estimate * edge.normalized();
  // arccos is sign-blind; keep the sign that puts the target face down.
  const Rotation plus = Rotation::from_axis_angle(axis_earth, move.angle) * estimate;
  const Rotation minus = Rotation::from_axis_angle(axis_earth, -move.angle) * estimate;
  return (plus * v_to).z() >= (minus * v_to).z() ? plus : minus;
}

Rotation target_attitude(const TensegrityModel& model, const Rotation& estimate, FaceId from,
                         FaceId to) {
  if (from == to) fail(ErrorCode::InvalidArgument, "target face equals current face");
  return target_attitude(model, estimate, edge_move(model, from, to));
}

double required_pivot_moment(const TensegrityModel& model, const Move& move, double mass) {
  const Vec3 up = model.face_inward_normal(move.from);
  const Vec3 w = -model.node(move.pivot_nodes.front());  // pivot -> centre of mass
  const Vec3 horizontal = w - w.dot(move.axis) * move.axis - w.dot(up) * up;
  return mass * kGravity * horizontal.norm();
}

double required_yaw_torque(const TensegrityModel& model, const Move& move, double mass) {
  return required_pivot_moment(model, move, mass) * std::abs(move.axis.z());
}

double yaw_torque_envelope(const VehicleParams& vehicle) {
  const double reversible = std::min(vehicle.thrust_max, std::max(0.0, -vehicle.thrust_min));
  return 4.0 * vehicle.kappa * reversible;
}

std::vector<Move> FaceGraph::moves_from(FaceId face) const {
  std::vector<Move> out;
  for (const auto& m : edges) {
    if (m.from == face) out.push_back(m);
  }
  for (const auto& m : specials) {
    if (m.from == face) out.push_back(m);
  }
  return out;
}

namespace {

// Faces able to reach `goal`, by reverse breadth-first search over moves.
std::vector<char> goal_reachability(const std::vector<Move>& moves, FaceId goal) {
  std::vector<char> reach(kFaceCount + 1, 0);
  reach[goal] = 1;
  std::deque<FaceId> queue{goal};
  while (!queue.empty()) {
    const FaceId f = queue.front();
    queue.pop_front();
    for (const auto& m : moves) {
      if (m.to == f && !reach[m.from]) {
        reach[m.from] = 1;
        queue.push_back(m.from);
      }
    }
  }
  return reach;
}

std::vector<int> hops_to_goal(const std::vector<Move>& moves, FaceId goal) {
  std::vector<int> hops(kFaceCount + 1, std::numeric_limits<int>::max());
  hops[goal] = 0;
  std::deque<FaceId> queue{goal};
  while (!queue.empty()) {
    const FaceId f = queue.front();
    queue.pop_front();
    for (const auto& m : moves) {
      if (m.to == f && hops[m.from] == std::numeric_limits<int>::max()) {
        hops[m.from] = hops[f] + 1;
        queue.push_back(m.from);
      }
    }
  }
  return hops;
}

bool is_pruned(const std::vector<std::pair<FaceId, FaceId>>& pruned, FaceId a, FaceId b) {
  for (const auto& [x, y] : pruned) {
    if ((x == a && y == b) || (x == b && y == a)) return true;
  }
  return false;
}

std::vector<Move> all_moves(const FaceGraph& g) {
  std::vector<Move> moves = g.edges;
  moves.insert(moves.end(), g.specials.begin(), g.specials.end());
  return moves;
}

}  // namespace

bool FaceGraph::reaches_goal(FaceId face) const {
  if (face < 1 || face > kFaceCount) return false;
  return goal_reachability(all_moves(*this), goal)[face] != 0;
}

FaceGraph build_face_graph(const TensegrityModel& model,
                           const std::vector<std::pair<FaceId, FaceId>>& pruned,
                           const std::vector<SpecialMove>& specials) {
  for (const auto& [a, b] : pruned) {
    if (model.find_adjacency(a, b) == nullptr) {
      fail(ErrorCode::NotAdjacent, "pruned pair " + std::to_string(a) + "-" + std::to_string(b) +
                                       " is not an adjacent face pair");
    }
  }
  FaceGraph g;
  g.pruned = pruned;
  for (const auto& adj : model.face_adjacency()) {
    if (is_pruned(pruned, adj.face_a, adj.face_b)) continue;
    g.edges.push_back(edge_move(model, adj.face_a, adj.face_b));
    g.edges.push_back(edge_move(model, adj.face_b, adj.face_a));
  }
  std::sort(g.edges.begin(), g.edges.end(), [](const Move& x, const Move& y) {
    return std::tie(x.from, x.to) < std::tie(y.from, y.to);
  });
  for (const auto& s : specials) {
    Move m = node_move(model, s.from, s.to);
    if (s.weight) {
      if (!(*s.weight > 0.0)) fail(ErrorCode::InvalidArgument, "special move weight must be positive");
      m.weight = *s.weight;
    }
    g.specials.push_back(m);
  }
  const auto reach = goal_reachability(all_moves(g), g.goal);
  for (FaceId f = 1; f <= kFaceCount; ++f) {
    if (!reach[f]) {
      fail(ErrorCode::DisconnectedGraph,
           "face " + std::to_string(f) + " cannot reach the goal face");
    }
  }
  return g;
}

std::vector<std::pair<FaceId, FaceId>> torque_infeasible_edges(const TensegrityModel& model,
                                                               const VehicleParams& vehicle,
                                                               double margin) {
  const double envelope = yaw_torque_envelope(vehicle);
  std::vector<std::pair<FaceId, FaceId>> out;
  for (const auto& adj : model.face_adjacency()) {
    const double ab = required_yaw_torque(model, edge_move(model, adj.face_a, adj.face_b), vehicle.mass);
    const double ba = required_yaw_torque(model, edge_move(model, adj.face_b, adj.face_a), vehicle.mass);
    if (margin * std::max(ab, ba) > envelope) out.emplace_back(adj.face_a, adj.face_b);
  }
  return out;
}

std::vector<SpecialMove> suggest_node_pivots(const TensegrityModel& model,
                                             const std::vector<std::pair<FaceId, FaceId>>& pruned,
                                             const VehicleParams& vehicle, double margin) {
  const double envelope = yaw_torque_envelope(vehicle);
  std::vector<Move> moves;
  for (const auto& adj : model.face_adjacency()) {
    if (is_pruned(pruned, adj.face_a, adj.face_b)) continue;
    moves.push_back(edge_move(model, adj.face_a, adj.face_b));
    moves.push_back(edge_move(model, adj.face_b, adj.face_a));
  }
  std::vector<SpecialMove> out;
  while (true) {
    const auto reach = goal_reachability(moves, kGoalFace);
    std::optional<Move> best;
    auto key = [&](const Move& m) {
      const bool feasible = margin * required_yaw_torque(model, m, vehicle.mass) <= envelope;
      return std::make_tuple(feasible ? 0 : 1, m.angle, m.from, m.to);
    };
    for (FaceId f = 1; f <= kFaceCount; ++f) {
      if (reach[f]) continue;
      for (FaceId t = 1; t <= kFaceCount; ++t) {
        if (!reach[t] || model.shared_nodes(f, t).size() != 1) continue;
        const Move m = node_move(model, f, t);
        if (!best || key(m) < key(*best)) best = m;
      }
    }
    if (!best) break;
    out.push_back({best->from, best->to, std::nullopt});
    moves.push_back(*best);
  }
  return out;
}

std::vector<FaceId> ReorientationPlan::faces() const {
  std::vector<FaceId> out{start};
  for (const auto& m : steps) out.push_back(m.to);
  return out;
}

ReorientationPlan plan_path(const FaceGraph& graph, FaceId start) {
  if (start < 1 || start > kFaceCount) fail(ErrorCode::OutOfRange, "start face outside 1..20");
  ReorientationPlan plan;
  plan.start = start;
  if (start == graph.goal) return plan;

  const auto moves = all_moves(graph);
  double min_weight = std::numeric_limits<double>::infinity();
  for (const auto& m : moves) min_weight = std::min(min_weight, m.weight);
  const auto hops = hops_to_goal(moves, graph.goal);
  if (hops[start] == std::numeric_limits<int>::max()) {
    fail(ErrorCode::NoPath, "no path from face " + std::to_string(start) + " to the goal");
  }
  auto heuristic = [&](FaceId f) {
    return hops[f] == std::numeric_limits<int>::max() ? 0.0 : min_weight * hops[f];
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(kFaceCount + 1, kInf);
  std::vector<std::optional<Move>> via(kFaceCount + 1);
  std::vector<char> closed(kFaceCount + 1, 0);
  using Entry = std::tuple<double, FaceId>;  // (f-score, face); smaller face wins ties
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  cost[start] = 0.0;
  open.emplace(heuristic(start), start);
  while (!open.empty()) {
    const auto [score, f] = open.top();
    open.pop();
    if (closed[f]) continue;
    closed[f] = 1;
    if (f == graph.goal) break;
    for (const auto& m : graph.moves_from(f)) {
      const double c = cost[f] + m.weight;
      if (c < cost[m.to]) {
        cost[m.to] = c;
        via[m.to] = m;
        open.emplace(c + heuristic(m.to), m.to);
      }
    }
  }
  if (!closed[graph.goal]) fail(ErrorCode::NoPath, "goal face unreachable");
  for (FaceId f = graph.goal; f != start; f = via[f]->from) plan.steps.push_back(*via[f]);
  std::reverse(plan.steps.begin(), plan.steps.end());
  plan.cost = cost[graph.goal];
  return plan;
}

const char* to_string(Phase p) {
  switch (p) {
    case Phase::Identify: return "identify";
    case Phase::Rotate: return "rotate";
    case Phase::Settle: return "settle";
    case Phase::Done: return "done";
  }
  return "?";
}

const char* to_string(CommandKind k) {
  switch (k) {
    case CommandKind::Rotate: return "rotate";
    case CommandKind::CutThrust: return "cut_thrust";
    case CommandKind::Replan: return "replan";
    case CommandKind::Done: return "done";
  }
  return "?";
}

ReorientationStateMachine::ReorientationStateMachine(const TensegrityModel& model, FaceGraph graph,
                                                     StateMachineConfig config)
    : model_(&model), graph_(std::move(graph)), config_(config) {}

ReorientCommand ReorientationStateMachine::identify(const Rotation& estimate, FaceId identified) {
  ReorientCommand cmd;
  cmd.identified = identified;
  if (identified == graph_.goal) {
    phase_ = Phase::Done;
    move_.reset();
    cmd.kind = CommandKind::Done;
    cmd.phase = phase_;
    cmd.from = cmd.to = identified;
    return cmd;
  }
  const bool unexpected = expected_.has_value() && *expected_ != identified;
  if (unexpected) ++replans_;
  // Plan afresh from the identified face on every step.
  plan_ = plan_path(graph_, identified);
  move_ = plan_->steps.front();
  desired_ = target_attitude(*model_, estimate, *move_);
  phase_ = Phase::Rotate;
  switch_count_ = unexpected_count_ = rotate_steps_ = 0;
  unexpected_face_ = 0;
  cmd.kind = unexpected ? CommandKind::Replan : CommandKind::Rotate;
  cmd.phase = phase_;
  cmd.from = move_->from;
  cmd.to = move_->to;
  cmd.desired = desired_;
  cmd.move = move_;
  return cmd;
}

void ReorientationStateMachine::push_gyro(const Vec3& gyro) {
  gyro_window_.push_back(gyro);
  gyro_sum_ += gyro;
  if (static_cast<int>(gyro_window_.size()) > config_.settle_steps) {
    gyro_sum_ -= gyro_window_.front();
    gyro_window_.pop_front();
  }
}

bool ReorientationStateMachine::quiet() const {
  // Averaging keeps white gyro noise from resetting the test every few steps.
  return static_cast<int>(gyro_window_.size()) >= config_.settle_steps &&
         (gyro_sum_ / static_cast<double>(gyro_window_.size())).norm() < config_.settle_rate;
}

ReorientCommand ReorientationStateMachine::step(const Rotation& estimate, const Vec3& gyro) {
  const FaceId identified = identify_contact_face(*model_, estimate.pitch(), estimate.roll());
  push_gyro(gyro);
  ReorientCommand cmd;
  cmd.identified = identified;

  switch (phase_) {
    case Phase::Done:
      cmd.kind = CommandKind::Done;
      cmd.phase = phase_;
      cmd.from = cmd.to = identified;
      return cmd;

    case Phase::Identify:
      return identify(estimate, identified);

    case Phase::Rotate: {
      ++rotate_steps_;
      if (identified == move_->to) {
        ++switch_count_;
        unexpected_count_ = 0;
      } else if (identified != move_->from) {
        unexpected_count_ = identified == unexpected_face_ ? unexpected_count_ + 1 : 1;
        unexpected_face_ = identified;
        switch_count_ = 0;
      } else {
        switch_count_ = unexpected_count_ = 0;
      }
      const bool switched = switch_count_ >= config_.debounce_steps;
      const bool diverted = unexpected_count_ >= config_.debounce_steps && quiet();
      const bool stalled = rotate_steps_ >= config_.rotate_timeout_steps;
      cmd.from = move_->from;
      cmd.to = move_->to;
      if (switched || diverted || stalled) {
        expected_ = (switched || diverted) ? move_->to : move_->from;
        phase_ = Phase::Settle;
        gyro_window_.clear();
        gyro_sum_.setZero();
        cmd.kind = CommandKind::CutThrust;
        cmd.phase = phase_;
        return cmd;
      }
      cmd.kind = CommandKind::Rotate;
      cmd.phase = phase_;
      cmd.desired = desired_;
      cmd.move = move_;
      return cmd;
    }

    case Phase::Settle:
      if (quiet()) {
        phase_ = Phase::Identify;
        return identify(estimate, identified);
      }
      cmd.kind = CommandKind::CutThrust;
      cmd.phase = phase_;
      return cmd;
  }
  return cmd;
}

}  // namespace tensegrity
