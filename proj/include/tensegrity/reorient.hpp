#pragma once

#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tensegrity/control.hpp"
#include "tensegrity/geometry.hpp"
#include "tensegrity/rotation.hpp"

namespace tensegrity {

inline constexpr FaceId kGoalFace = 1;

/// Rodrigues rotation carrying body +z onto the face's inward normal
/// (R_i z = v_i). For an inward normal of exactly -z this is the half turn
/// about body x.
Rotation face_attitude(const TensegrityModel& model, FaceId face);

/// Body-to-Earth attitude of the vehicle resting on `face`, reconstructed
/// with zero yaw: its inward normal maps to Earth +z.
Rotation grounded_attitude(const TensegrityModel& model, FaceId face);

struct Tilt {
  double pitch = 0.0;
  double roll = 0.0;
};

/// Pitch and roll of the zero-yaw resting attitude on `face`.
Tilt face_tilt(const TensegrityModel& model, FaceId face);

/// Axis-angle magnitude of a rotation matrix, in [0, pi].
double rotation_angle(const Rotation& r);

/// Face whose zero-yaw resting attitude is closest (by rotation angle) to
/// the zero-yaw attitude with the estimated pitch and roll. Ties go to the
/// lowest face number.
FaceId identify_contact_face(const TensegrityModel& model, double pitch, double roll);

enum class MoveKind { Edge, Node };

/// One contact-face transition. Rotating the body by `angle` about the
/// body-frame `axis` carries the inward normal of `to` onto that of `from`,
/// so a vehicle resting on `from` ends up resting on `to`.
struct Move {
  FaceId from = 0;
  FaceId to = 0;
  MoveKind kind = MoveKind::Edge;
  std::vector<int> pivot_nodes;  // two for an edge pivot, one for a node pivot
  Vec3 axis = Vec3::UnitX();
  double angle = 0.0;   // rad
  double weight = 0.0;  // planning cost
};

/// Edge pivot between adjacent faces. Throws NotAdjacent otherwise.
Move edge_move(const TensegrityModel& model, FaceId from, FaceId to);
/// Pivot about the single node shared by two faces. Throws InvalidArgument
/// unless exactly one node is shared.
Move node_move(const TensegrityModel& model, FaceId from, FaceId to);

/// Desired attitude for an edge transition from the current estimate: the
/// axis R(n_j - n_k)/|n_j - n_k| in the Earth frame, the face angle, and the
/// rotation sign that puts `to` face-down. Node moves use their own axis.
/// Throws InvalidArgument when from == to and NotAdjacent for edge moves
/// between non-adjacent faces.
Rotation target_attitude(const TensegrityModel& model, const Rotation& estimate, const Move& move);
Rotation target_attitude(const TensegrityModel& model, const Rotation& estimate, FaceId from,
                         FaceId to);

/// Gravity moment (N m) the propellers must overcome to start the move:
/// m g times the horizontal distance from the centre of mass to the pivot
/// axis while resting on `from`.
double required_pivot_moment(const TensegrityModel& model, const Move& move, double mass);
/// Body-z share of the required pivot torque, |axis_z| * moment.
double required_yaw_torque(const TensegrityModel& model, const Move& move, double mass);
/// Largest pure yaw torque the allocation can produce with zero net thrust.
double yaw_torque_envelope(const VehicleParams& vehicle);

struct SpecialMove {
  FaceId from = 0;
  FaceId to = 0;
  std::optional<double> weight;  // defaults to the rotation angle
};

struct FaceGraph {
  std::vector<Move> edges;     // feasible edge pivots, both orientations
  std::vector<Move> specials;  // directed node pivots
  std::vector<std::pair<FaceId, FaceId>> pruned;
  FaceId goal = kGoalFace;

  /// Moves available when resting on `face`, in deterministic order.
  std::vector<Move> moves_from(FaceId face) const;
  bool reaches_goal(FaceId face) const;
};

/// Geometric adjacency minus `pruned`, plus the directed `specials`.
/// Throws DisconnectedGraph when some face cannot reach the goal.
FaceGraph build_face_graph(const TensegrityModel& model,
                           const std::vector<std::pair<FaceId, FaceId>>& pruned,
                           const std::vector<SpecialMove>& specials);

/// Adjacent face pairs whose required yaw torque, in either direction and
/// scaled by `margin`, exceeds the vehicle's yaw envelope.
std::vector<std::pair<FaceId, FaceId>> torque_infeasible_edges(const TensegrityModel& model,
                                                               const VehicleParams& vehicle,
                                                               double margin = 1.0);

/// One node pivot per component cut off from the goal, chosen by yaw
/// feasibility, then smallest angle, then face numbers.
std::vector<SpecialMove> suggest_node_pivots(const TensegrityModel& model,
                                             const std::vector<std::pair<FaceId, FaceId>>& pruned,
                                             const VehicleParams& vehicle, double margin = 1.0);

struct ReorientationPlan {
  FaceId start = 0;
  std::vector<Move> steps;
  double cost = 0.0;
  std::vector<FaceId> faces() const;  // start, then each landing face
};

/// A* toward the goal with the admissible heuristic
/// (smallest move weight) x (fewest remaining moves). Throws NoPath.
ReorientationPlan plan_path(const FaceGraph& graph, FaceId start);

enum class Phase { Identify, Rotate, Settle, Done };
enum class CommandKind { Rotate, CutThrust, Replan, Done };

const char* to_string(Phase p);
const char* to_string(CommandKind k);

struct StateMachineConfig {
  int debounce_steps = 10;          // consecutive identifications to accept a face switch
  double settle_rate = 0.05;        // rad/s, bound on the windowed mean gyro norm
  int settle_steps = 50;            // window length for the quiet test
  int rotate_timeout_steps = 2500;  // abandon a rotation and re-identify
};

struct ReorientCommand {
  CommandKind kind = CommandKind::CutThrust;
  Phase phase = Phase::Identify;
  FaceId identified = 0;
  FaceId from = 0;
  FaceId to = 0;
  Rotation desired;
  std::optional<Move> move;  // active move while rotating
};

/// Identify -> Rotate (zero total thrust) -> cut thrust on a debounced face
/// switch -> Settle -> Identify, replanning from whatever face is found.
/// A face other than the move's endpoints only counts as a diversion once the
/// gyro is also quiet: a node pivot sweeps through other faces' tilts.
class ReorientationStateMachine {
 public:
  ReorientationStateMachine(const TensegrityModel& model, FaceGraph graph,
                            StateMachineConfig config = {});

  ReorientCommand step(const Rotation& estimate, const Vec3& gyro);

  Phase phase() const { return phase_; }
  const std::optional<ReorientationPlan>& plan() const { return plan_; }
  int replans() const { return replans_; }

 private:
  ReorientCommand identify(const Rotation& estimate, FaceId identified);
  void push_gyro(const Vec3& gyro);
  bool quiet() const;

  const TensegrityModel* model_;
  FaceGraph graph_;
  StateMachineConfig config_;
  Phase phase_ = Phase::Identify;
  std::optional<ReorientationPlan> plan_;
  std::optional<Move> move_;
  std::optional<FaceId> expected_;
  Rotation desired_;
  int switch_count_ = 0;
  int unexpected_count_ = 0;
  FaceId unexpected_face_ = 0;
  std::deque<Vec3> gyro_window_;
  Vec3 gyro_sum_ = Vec3::Zero();
  int rotate_steps_ = 0;
  int replans_ = 0;
};

}  // namespace tensegrity
