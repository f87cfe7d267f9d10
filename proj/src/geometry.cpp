#include "tensegrity/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <tuple>

namespace tensegrity {

namespace {

NodePair ordered(int a, int b) { return a < b ? NodePair{a, b} : NodePair{b, a}; }

// In-plane unit vector of a face, orthogonal to the edge (p, q), pointing
// from the edge toward the face's remaining node r.
Vec3 in_plane_toward(const Vec3& p, const Vec3& q, const Vec3& r) {
  const Vec3 e = (q - p).normalized();
  Vec3 h = (r - p) - (r - p).dot(e) * e;
  return h.normalized();
}

}  // namespace

Vec3 inward_normal(const Vec3& nj, const Vec3& nk, const Vec3& nl) {
  const Vec3 w = (nj - nk).cross(nj - nl);
  const double norm = w.norm();
  if (norm < 1e-14 * std::max(1.0, nj.squaredNorm())) {
    fail(ErrorCode::Internal, "degenerate face: collinear nodes");
  }
  const double side = -nj.dot(w);
  return (side >= 0.0 ? 1.0 : -1.0) * w / norm;
}

TensegrityModel build_icosahedron(double rod_length) {
  if (!(rod_length > 0.0) || !std::isfinite(rod_length)) {
    fail(ErrorCode::InvalidArgument, "rod length must be positive");
  }
  TensegrityModel m;
  m.rod_length_ = rod_length;
  const double a = rod_length / 2.0;
  const double b = rod_length / 4.0;

  // Families: rods along x (nodes 0-3), along y (4-7), along z (8-11).
  int n = 0;
  for (double s1 : {1.0, -1.0}) {
    for (double s2 : {1.0, -1.0}) m.nodes_[n++] = Vec3(s1 * a, s2 * b, 0.0);
  }
  for (double s1 : {1.0, -1.0}) {
    for (double s2 : {1.0, -1.0}) m.nodes_[n++] = Vec3(0.0, s1 * a, s2 * b);
  }
  for (double s1 : {1.0, -1.0}) {
    for (double s2 : {1.0, -1.0}) m.nodes_[n++] = Vec3(s2 * b, 0.0, s1 * a);
  }

  // Rods join nodes of one family differing only in the sign of the long
  // coordinate: (0,2), (1,3), (4,6), (5,7), (8,10), (9,11).
  for (int f = 0; f < 3; ++f) {
    m.rods_.push_back({4 * f, 4 * f + 2});
    m.rods_.push_back({4 * f + 1, 4 * f + 3});
  }

  // Convex hull by exhaustive facet test; 220 candidate triples.
  const double tol = 1e-12 * rod_length;
  std::vector<NodeTriple> facets;
  for (int i = 0; i < kNodeCount; ++i) {
    for (int j = i + 1; j < kNodeCount; ++j) {
      for (int k = j + 1; k < kNodeCount; ++k) {
        const Vec3 w = (m.nodes_[j] - m.nodes_[i]).cross(m.nodes_[k] - m.nodes_[i]);
        if (w.norm() < tol) continue;
        int above = 0, below = 0;
        for (int p = 0; p < kNodeCount; ++p) {
          const double d = w.dot(m.nodes_[p] - m.nodes_[i]);
          if (d > tol) ++above;
          if (d < -tol) ++below;
        }
        if (above == 0 || below == 0) facets.push_back({i, j, k});
      }
    }
  }
  if (facets.size() != kFaceCount) {
    fail(ErrorCode::Internal, "hull does not have 20 triangular facets");
  }

  // Canonical numbering: descending inward normal by (z, x, y); F1 is the
  // face whose inward normal is closest to +z.
  struct Keyed {
    NodeTriple nodes;
    Vec3 normal;
  };
  std::vector<Keyed> keyed;
  for (const auto& f : facets) {
    keyed.push_back({f, inward_normal(m.nodes_[f[0]], m.nodes_[f[1]], m.nodes_[f[2]])});
  }
  auto rounded = [](double v) { return std::round(v * 1e9) / 1e9; };
  std::sort(keyed.begin(), keyed.end(), [&](const Keyed& x, const Keyed& y) {
    return std::make_tuple(-rounded(x.normal.z()), -rounded(x.normal.x()), -rounded(x.normal.y())) <
           std::make_tuple(-rounded(y.normal.z()), -rounded(y.normal.x()), -rounded(y.normal.y()));
  });
  for (const auto& k : keyed) {
    m.faces_.push_back(k.nodes);
    m.normals_.push_back(k.normal);
  }

  // Hull edges split into gap edges (ends of two parallel rods) and strings.
  auto rod_of = [&](int node) {
    for (int r = 0; r < kRodCount; ++r) {
      if (m.rods_[r][0] == node || m.rods_[r][1] == node) return r;
    }
    return -1;
  };
  std::vector<NodePair> edges;
  for (const auto& f : m.faces_) {
    for (int e = 0; e < 3; ++e) {
      const NodePair p = ordered(f[e], f[(e + 1) % 3]);
      if (std::find(edges.begin(), edges.end(), p) == edges.end()) edges.push_back(p);
    }
  }
  std::sort(edges.begin(), edges.end());
  for (const auto& e : edges) {
    const int ra = rod_of(e[0]);
    const int rb = rod_of(e[1]);
    const bool parallel = ra / 2 == rb / 2;
    (parallel ? m.gap_edges_ : m.strings_).push_back(e);
  }
  if (m.strings_.size() != kStringCount || m.gap_edges_.size() != kRodCount) {
    fail(ErrorCode::Internal, "unexpected hull edge classification");
  }
  m.string_length_ = (m.nodes_[m.strings_[0][0]] - m.nodes_[m.strings_[0][1]]).norm();

  for (int r = 0; r < kRodCount; ++r) {
    m.rod_index_[m.rods_[r][0]][m.rods_[r][1]] = r + 1;
    m.rod_index_[m.rods_[r][1]][m.rods_[r][0]] = r + 1;
  }
  for (int s = 0; s < kStringCount; ++s) {
    m.string_index_[m.strings_[s][0]][m.strings_[s][1]] = s + 1;
    m.string_index_[m.strings_[s][1]][m.strings_[s][0]] = s + 1;
  }

  for (FaceId a = 1; a <= kFaceCount; ++a) {
    for (FaceId b = a + 1; b <= kFaceCount; ++b) {
      const auto shared = m.shared_nodes(a, b);
      if (shared.size() != 2) continue;
      const Vec3& p = m.nodes_[shared[0]];
      const Vec3& q = m.nodes_[shared[1]];
      auto third = [&](FaceId f) {
        for (int v : m.faces_[f - 1]) {
          if (v != shared[0] && v != shared[1]) return v;
        }
        return -1;
      };
      const Vec3 ha = in_plane_toward(p, q, m.nodes_[third(a)]);
      const Vec3 hb = -in_plane_toward(p, q, m.nodes_[third(b)]);
      const double angle = std::acos(std::clamp(ha.dot(hb), -1.0, 1.0));
      m.adjacency_.push_back({a, b, {shared[0], shared[1]}, angle});
    }
  }
  if (m.adjacency_.size() != kHullEdgeCount) {
    fail(ErrorCode::Internal, "face adjacency count is not 30");
  }
  return m;
}

const Vec3& TensegrityModel::node(int i) const {
  if (i < 0 || i >= kNodeCount) fail(ErrorCode::OutOfRange, "node index out of range");
  return nodes_[i];
}

std::vector<NodePair> TensegrityModel::hull_edges() const {
  std::vector<NodePair> out = strings_;
  out.insert(out.end(), gap_edges_.begin(), gap_edges_.end());
  return out;
}

int TensegrityModel::rod_between(int i, int j) const {
  if (i < 0 || j < 0 || i >= kNodeCount || j >= kNodeCount) return 0;
  return rod_index_[i][j];
}

int TensegrityModel::string_between(int i, int j) const {
  if (i < 0 || j < 0 || i >= kNodeCount || j >= kNodeCount) return 0;
  return string_index_[i][j];
}

void TensegrityModel::check_face(FaceId face) const {
  if (face < 1 || face > kFaceCount) {
    fail(ErrorCode::OutOfRange, "face index " + std::to_string(face) + " outside 1..20");
  }
}

NodeTriple TensegrityModel::face_nodes(FaceId face) const {
  check_face(face);
  return faces_[face - 1];
}

Vec3 TensegrityModel::face_inward_normal(FaceId face) const {
  check_face(face);
  return normals_[face - 1];
}

FaceKind TensegrityModel::face_kind(FaceId face) const {
  const auto f = face_nodes(face);
  for (int e = 0; e < 3; ++e) {
    const NodePair p = ordered(f[e], f[(e + 1) % 3]);
    if (std::find(gap_edges_.begin(), gap_edges_.end(), p) != gap_edges_.end()) {
      return FaceKind::TwoString;
    }
  }
  return FaceKind::ThreeString;
}

double TensegrityModel::face_offset(FaceId face) const {
  return -nodes_[face_nodes(face)[0]].dot(face_inward_normal(face));
}

FaceId TensegrityModel::antipodal_face(FaceId face) const {
  const Vec3 target = -face_inward_normal(face);
  for (FaceId f = 1; f <= kFaceCount; ++f) {
    if ((normals_[f - 1] - target).norm() < 1e-9) return f;
  }
  fail(ErrorCode::Internal, "no antipodal face");
}

const FaceAdjacency* TensegrityModel::find_adjacency(FaceId a, FaceId b) const {
  const FaceId lo = std::min(a, b);
  const FaceId hi = std::max(a, b);
  for (const auto& adj : adjacency_) {
    if (adj.face_a == lo && adj.face_b == hi) return &adj;
  }
  return nullptr;
}

std::vector<int> TensegrityModel::shared_nodes(FaceId a, FaceId b) const {
  const auto fa = face_nodes(a);
  const auto fb = face_nodes(b);
  std::vector<int> out;
  for (int v : fa) {
    if (std::find(fb.begin(), fb.end(), v) != fb.end()) out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string model_to_json(const TensegrityModel& model, int indent) {
  using nlohmann::json;
  json doc;
  doc["rod_length"] = model.rod_length();
  doc["string_length"] = model.string_length();
  json nodes = json::array();
  for (const auto& p : model.nodes()) nodes.push_back({p.x(), p.y(), p.z()});
  doc["nodes"] = nodes;
  auto pairs = [](const std::vector<NodePair>& v) {
    json a = json::array();
    for (const auto& p : v) a.push_back({p[0], p[1]});
    return a;
  };
  doc["rods"] = pairs(model.rods());
  doc["strings"] = pairs(model.strings());
  doc["gap_edges"] = pairs(model.gap_edges());
  json faces = json::array();
  for (FaceId f = 1; f <= kFaceCount; ++f) {
    const auto n = model.face_nodes(f);
    const Vec3 v = model.face_inward_normal(f);
    faces.push_back({{"face", f},
                     {"nodes", {n[0], n[1], n[2]}},
                     {"inward_normal", {v.x(), v.y(), v.z()}},
                     {"kind", model.face_kind(f) == FaceKind::ThreeString ? "three_string" : "two_string"}});
  }
  doc["faces"] = faces;
  json adj = json::array();
  for (const auto& a : model.face_adjacency()) {
    adj.push_back({{"faces", {a.face_a, a.face_b}},
                   {"shared_nodes", {a.shared[0], a.shared[1]}},
                   {"angle_rad", a.angle}});
  }
  doc["adjacency"] = adj;
  return doc.dump(indent);
}

}  // namespace tensegrity
