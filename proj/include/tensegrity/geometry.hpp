#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "tensegrity/common.hpp"

namespace tensegrity {

inline constexpr int kNodeCount = 12;
inline constexpr int kRodCount = 6;
inline constexpr int kStringCount = 24;
inline constexpr int kFaceCount = 20;
inline constexpr int kHullEdgeCount = 30;

/// Face numbers are 1-based (F1..F20); F1 is the take-off face.
using FaceId = int;
using NodePair = std::array<int, 2>;
using NodeTriple = std::array<int, 3>;

/// Kind of the hull edge opposite a face's interior. Eight faces are bounded
/// by three strings; the other twelve by two strings plus the short gap
/// between the ends of two parallel rods.
enum class FaceKind { ThreeString, TwoString };

struct FaceAdjacency {
  FaceId face_a = 0;
  FaceId face_b = 0;
  NodePair shared{};  // shared nodes, ascending
  double angle = 0.0;  // rotation carrying face_a onto face_b's plane, rad
};

/// Orthogonal (Jessen) icosahedron tensegrity: 12 nodes, 6 axis-parallel
/// rods in three orthogonal pairs, 24 strings along the long hull edges.
/// Immutable after construction.
class TensegrityModel {
 public:
  double rod_length() const { return rod_length_; }
  double string_length() const { return string_length_; }

  const std::array<Vec3, kNodeCount>& nodes() const { return nodes_; }
  const Vec3& node(int i) const;
  const std::vector<NodePair>& rods() const { return rods_; }
  const std::vector<NodePair>& strings() const { return strings_; }
  /// Short hull edges joining the ends of two parallel rods; not members.
  const std::vector<NodePair>& gap_edges() const { return gap_edges_; }
  /// All 30 hull edges (strings then gap edges).
  std::vector<NodePair> hull_edges() const;

  /// 1-based member index when a rod (string) joins i and j, else 0.
  int rod_between(int i, int j) const;
  int string_between(int i, int j) const;

  NodeTriple face_nodes(FaceId face) const;
  Vec3 face_inward_normal(FaceId face) const;
  FaceKind face_kind(FaceId face) const;
  /// Signed distance from the body origin to the face plane (positive).
  double face_offset(FaceId face) const;
  /// Face whose inward normal is the negation of `face`'s.
  FaceId antipodal_face(FaceId face) const;

  const std::vector<FaceAdjacency>& face_adjacency() const { return adjacency_; }
  /// Adjacency record for two faces sharing an edge, or nullptr.
  const FaceAdjacency* find_adjacency(FaceId a, FaceId b) const;
  /// Nodes common to two faces (0, 1 or 2 entries).
  std::vector<int> shared_nodes(FaceId a, FaceId b) const;

  friend TensegrityModel build_icosahedron(double rod_length);

 private:
  TensegrityModel() = default;
  void check_face(FaceId face) const;

  double rod_length_ = 0.0;
  double string_length_ = 0.0;
  std::array<Vec3, kNodeCount> nodes_{};
  std::vector<NodePair> rods_;
  std::vector<NodePair> strings_;
  std::vector<NodePair> gap_edges_;
  std::vector<NodeTriple> faces_;
  std::vector<Vec3> normals_;
  std::vector<FaceAdjacency> adjacency_;
  std::array<std::array<int, kNodeCount>, kNodeCount> rod_index_{};
  std::array<std::array<int, kNodeCount>, kNodeCount> string_index_{};
};

/// Builds the model with nodes at the cyclic permutations of
/// (+-L/2, +-L/4, 0). Throws InvalidArgument unless rod_length > 0.
TensegrityModel build_icosahedron(double rod_length);

/// Inward unit normal from three face nodes: sgn(-n_j . w) w / |w| with
/// w = (n_j - n_k) x (n_j - n_l). Throws Internal for a degenerate triangle.
Vec3 inward_normal(const Vec3& nj, const Vec3& nk, const Vec3& nl);

/// JSON document listing nodes, rods, strings, gap edges, faces (with
/// normals and kinds) and adjacency angles.
std::string model_to_json(const TensegrityModel& model, int indent = 2);

}  // namespace tensegrity
