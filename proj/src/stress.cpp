#include "tensegrity/stress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/SVD>

namespace tensegrity {

void MaterialSpec::validate() const {
  const double props[] = {string_yield_strength, string_modulus, string_area,
                          rod_yield_strength,    rod_modulus,    rod_area,
                          rod_second_moment,     rod_length};
  for (double p : props) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      fail(ErrorCode::InvalidArgument, "material properties must be positive");
    }
  }
  if (!(eta_string >= 1.0) || !(eta_rod_yield >= 1.0) || !(eta_rod_buckling >= 1.0)) {
    fail(ErrorCode::InvalidArgument, "safety factors must be >= 1");
  }
}

double tube_area(double outer_diameter, double inner_diameter) {
  if (!(outer_diameter > inner_diameter) || inner_diameter < 0.0) {
    fail(ErrorCode::InvalidArgument, "tube needs outer > inner >= 0");
  }
  return std::numbers::pi * (outer_diameter * outer_diameter - inner_diameter * inner_diameter) / 4.0;
}

double tube_second_moment(double outer_diameter, double inner_diameter) {
  if (!(outer_diameter > inner_diameter) || inner_diameter < 0.0) {
    fail(ErrorCode::InvalidArgument, "tube needs outer > inner >= 0");
  }
  return std::numbers::pi * (std::pow(outer_diameter, 4) - std::pow(inner_diameter, 4)) / 64.0;
}

double solid_round_area(double diameter) {
  if (!(diameter > 0.0)) fail(ErrorCode::InvalidArgument, "diameter must be positive");
  return std::numbers::pi * diameter * diameter / 4.0;
}

double euler_buckling_stress(double modulus, double second_moment, double area, double length) {
  return std::numbers::pi * std::numbers::pi * modulus * second_moment / (area * length * length);
}

bool supports_restrain(const TensegrityModel& model, FaceId grounded_face) {
  const auto ground = model.face_nodes(grounded_face);
  const auto& nodes = model.nodes();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3 * kNodeCount, kStringCount + kRodCount + 9);
  int col = 0;
  auto add_member = [&](int i, int j) {
    const Vec3 u = (nodes[j] - nodes[i]).normalized();
    A.block<3, 1>(3 * i, col) += u;
    A.block<3, 1>(3 * j, col) -= u;
    ++col;
  };
  for (const auto& [i, j] : model.strings()) add_member(i, j);
  for (const auto& [i, j] : model.rods()) add_member(i, j);
  for (int g = 0; g < 3; ++g) {
    A.block<3, 3>(3 * ground[g], col + 3 * g) = Eigen::Matrix3d::Identity();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  const auto& sv = svd.singularValues();
  return sv.minCoeff() > 1e-9 * sv.maxCoeff();
}

FaceId default_grounded_face(const TensegrityModel& model, FaceId loaded_face) {
  const FaceId opposite = model.antipodal_face(loaded_face);
  if (supports_restrain(model, opposite)) return opposite;
  // Pinning a three-string face leaves the twisting mode free; use the
  // restraining face nearest the antipode.
  const Vec3 up = model.face_inward_normal(loaded_face);
  FaceId best = 0;
  double best_dot = std::numeric_limits<double>::infinity();
  for (FaceId f = 1; f <= kFaceCount; ++f) {
    if (f == loaded_face || !supports_restrain(model, f)) continue;
    const double d = up.dot(model.face_inward_normal(f));
    if (d < best_dot - 1e-12) {
      best_dot = d;
      best = f;
    }
  }
  if (best == 0) fail(ErrorCode::Internal, "no restraining face");
  return best;
}

LoadCase make_load_case(const TensegrityModel& model, FaceId loaded_face,
                        std::vector<int> loaded_nodes, double total_force) {
  LoadCase lc;
  lc.loaded_face = loaded_face;
  lc.grounded_face = default_grounded_face(model, loaded_face);
  lc.loaded_nodes = std::move(loaded_nodes);
  lc.total_force = total_force;
  return lc;
}

namespace {

void validate_case(const TensegrityModel& model, const LoadCase& load) {
  const auto ground = model.face_nodes(load.grounded_face);
  const auto top = model.face_nodes(load.loaded_face);
  if (load.loaded_nodes.empty() || load.loaded_nodes.size() > 3) {
    fail(ErrorCode::InvalidArgument, "loaded node subset must have 1 to 3 nodes");
  }
  std::vector<int> seen;
  for (int n : load.loaded_nodes) {
    if (std::find(top.begin(), top.end(), n) == top.end()) {
      fail(ErrorCode::InvalidArgument, "loaded node is not on the loaded face");
    }
    if (std::find(ground.begin(), ground.end(), n) != ground.end()) {
      fail(ErrorCode::InvalidArgument, "loaded node is grounded");
    }
    if (std::find(seen.begin(), seen.end(), n) != seen.end()) {
      fail(ErrorCode::InvalidArgument, "duplicate loaded node");
    }
    seen.push_back(n);
  }
  if (!(load.total_force >= 0.0) || !std::isfinite(load.total_force)) {
    fail(ErrorCode::InvalidArgument, "total force must be finite and nonnegative");
  }
}

std::array<Vec3, kNodeCount> applied_loads(const TensegrityModel& model, const LoadCase& load) {
  std::array<Vec3, kNodeCount> ext;
  ext.fill(Vec3::Zero());
  // "Down" is opposite the grounded face's inward normal.
  const Vec3 down = -model.face_inward_normal(load.grounded_face);
  const double share = load.total_force / static_cast<double>(load.loaded_nodes.size());
  for (int n : load.loaded_nodes) ext[n] = share * down;
  return ext;
}

}  // namespace

StressProblem assemble(const TensegrityModel& model, const LoadCase& load,
                       const MaterialSpec& materials) {
  validate_case(model, load);
  materials.validate();

  StressProblem sp;
  const auto ground = model.face_nodes(load.grounded_face);
  sp.grounded_nodes = {ground[0], ground[1], ground[2]};
  std::sort(sp.grounded_nodes.begin(), sp.grounded_nodes.end());

  const int nvar = kStringCount + kRodCount + 9;
  auto& qp = sp.qp;
  qp.Q = Eigen::MatrixXd::Zero(nvar, nvar);
  qp.A = Eigen::MatrixXd::Zero(3 * kNodeCount, nvar);
  qp.b = Eigen::VectorXd::Zero(3 * kNodeCount);

  const double string_flex = model.string_length() / (materials.string_modulus * materials.string_area);
  const double rod_flex = model.rod_length() / (materials.rod_modulus * materials.rod_area);

  const auto& nodes = model.nodes();
  for (int s = 0; s < kStringCount; ++s) {
    const auto [i, j] = model.strings()[s];
    const Vec3 sij = (nodes[j] - nodes[i]).normalized();
    qp.A.block<3, 1>(3 * i, sp.string_offset + s) += sij;
    qp.A.block<3, 1>(3 * j, sp.string_offset + s) -= sij;
    qp.Q(sp.string_offset + s, sp.string_offset + s) = string_flex;
    qp.nonnegative.push_back(sp.string_offset + s);
  }
  for (int r = 0; r < kRodCount; ++r) {
    const auto [i, j] = model.rods()[r];
    const Vec3 rij = (nodes[j] - nodes[i]).normalized();
    qp.A.block<3, 1>(3 * i, sp.rod_offset + r) -= rij;
    qp.A.block<3, 1>(3 * j, sp.rod_offset + r) += rij;
    qp.Q(sp.rod_offset + r, sp.rod_offset + r) = rod_flex;
  }
  for (int g = 0; g < 3; ++g) {
    qp.A.block<3, 3>(3 * sp.grounded_nodes[g], sp.reaction_offset + 3 * g) = Eigen::Matrix3d::Identity();
  }
  const auto ext = applied_loads(model, load);
  for (int n = 0; n < kNodeCount; ++n) qp.b.segment<3>(3 * n) = -ext[n];
  return sp;
}

std::array<Vec3, kNodeCount> nodal_force_balance(const TensegrityModel& model,
                                                 const std::vector<double>& tensions,
                                                 const std::vector<double>& compressions,
                                                 const std::array<Vec3, kNodeCount>& external) {
  std::array<Vec3, kNodeCount> net = external;
  const auto& nodes = model.nodes();
  for (int s = 0; s < kStringCount; ++s) {
    const auto [i, j] = model.strings()[s];
    const Vec3 sij = (nodes[j] - nodes[i]).normalized();
    net[i] += tensions[s] * sij;
    net[j] -= tensions[s] * sij;
  }
  for (int r = 0; r < kRodCount; ++r) {
    const auto [i, j] = model.rods()[r];
    const Vec3 rij = (nodes[j] - nodes[i]).normalized();
    net[i] -= compressions[r] * rij;
    net[j] += compressions[r] * rij;
  }
  return net;
}

StressSolution solve_case(const TensegrityModel& model, const LoadCase& load,
                          const MaterialSpec& materials, double tol) {
  const StressProblem sp = assemble(model, load, materials);
  const QpSolution qs = solve_qp(sp.qp, tol);

  StressSolution out;
  out.regularized = qs.regularized;
  out.grounded_nodes = sp.grounded_nodes;
  out.tensions.resize(kStringCount);
  out.compressions.resize(kRodCount);
  for (int s = 0; s < kStringCount; ++s) out.tensions[s] = qs.x(sp.string_offset + s);
  for (int r = 0; r < kRodCount; ++r) out.compressions[r] = qs.x(sp.rod_offset + r);
  for (int g = 0; g < 3; ++g) out.reactions[g] = qs.x.segment<3>(sp.reaction_offset + 3 * g);
  out.strain_energy = qs.objective;
  out.slack_strings = qs.active_set;

  auto ext = applied_loads(model, load);
  for (int g = 0; g < 3; ++g) ext[sp.grounded_nodes[g]] += out.reactions[g];
  const auto net = nodal_force_balance(model, out.tensions, out.compressions, ext);
  for (int n = 0; n < kNodeCount; ++n) {
    out.node_residuals[n] = net[n].cwiseAbs().maxCoeff();
    out.max_residual = std::max(out.max_residual, out.node_residuals[n]);
  }
  out.max_tension = std::max(0.0, *std::max_element(out.tensions.begin(), out.tensions.end()));
  out.max_compression = std::max(0.0, *std::max_element(out.compressions.begin(), out.compressions.end()));
  return out;
}

SweepReport sweep(const TensegrityModel& model, double total_force, const MaterialSpec& materials,
                  FaceId three_string_face, FaceId two_string_face) {
  if (!(total_force > 0.0) || !std::isfinite(total_force)) {
    fail(ErrorCode::InvalidArgument, "sweep needs a positive impact force");
  }
  auto first_of = [&](FaceKind kind) {
    for (FaceId f = 1; f <= kFaceCount; ++f) {
      if (model.face_kind(f) == kind) return f;
    }
    fail(ErrorCode::Internal, "face kind missing");
  };
  if (three_string_face == 0) three_string_face = first_of(FaceKind::ThreeString);
  if (two_string_face == 0) two_string_face = first_of(FaceKind::TwoString);
  if (model.face_kind(three_string_face) != FaceKind::ThreeString ||
      model.face_kind(two_string_face) != FaceKind::TwoString) {
    fail(ErrorCode::InvalidArgument, "sweep faces do not match their kinds");
  }

  SweepReport rep;
  rep.total_force = total_force;
  rep.three_string_face = three_string_face;
  rep.two_string_face = two_string_face;
  int id = 0;
  for (const auto& [kind, face] : {std::pair{FaceKind::ThreeString, three_string_face},
                                   std::pair{FaceKind::TwoString, two_string_face}}) {
    const auto n = model.face_nodes(face);
    const std::vector<std::vector<int>> subsets = {
        {n[0]}, {n[1]}, {n[2]},
        {n[0], n[1]}, {n[0], n[2]}, {n[1], n[2]},
        {n[0], n[1], n[2]}};
    for (const auto& subset : subsets) {
      SweepCase sc;
      sc.id = ++id;
      sc.kind = kind;
      sc.load = make_load_case(model, face, subset, total_force);
      sc.solution = solve_case(model, sc.load, materials);
      if (sc.solution.max_tension > rep.max_tension) {
        rep.max_tension = sc.solution.max_tension;
        rep.max_tension_case = sc.id;
      }
      if (sc.solution.max_compression > rep.max_compression) {
        rep.max_compression = sc.solution.max_compression;
        rep.max_compression_case = sc.id;
      }
      rep.cases.push_back(std::move(sc));
    }
  }
  return rep;
}

namespace {

CriterionResult criterion(std::string name, double demand, double limit) {
  CriterionResult c;
  c.name = std::move(name);
  c.demand = demand;
  c.limit = limit;
  c.margin = demand > 0.0 ? limit / demand : std::numeric_limits<double>::infinity();
  c.passed = demand < limit;
  return c;
}

}  // namespace

DesignVerdict check_components(double max_tension, double max_compression,
                               const MaterialSpec& materials) {
  if (!(max_tension >= 0.0) || !(max_compression >= 0.0)) {
    fail(ErrorCode::InvalidArgument, "member force maxima must be nonnegative");
  }
  materials.validate();
  DesignVerdict v;
  v.buckling_stress = euler_buckling_stress(materials.rod_modulus, materials.rod_second_moment,
                                            materials.rod_area, materials.rod_length);
  v.string_yield = criterion("string_yield", materials.eta_string * max_tension / materials.string_area,
                             materials.string_yield_strength);
  v.rod_yield = criterion("rod_yield", materials.eta_rod_yield * max_compression / materials.rod_area,
                          materials.rod_yield_strength);
  v.rod_buckling = criterion("rod_buckling",
                             materials.eta_rod_buckling * max_compression / materials.rod_area,
                             v.buckling_stress);
  return v;
}

double estimate_impact_force(double mass, double speed, double stopping_distance) {
  if (!(mass > 0.0) || !(stopping_distance > 0.0) || !(speed >= 0.0) ||
      !std::isfinite(mass * speed * stopping_distance)) {
    fail(ErrorCode::InvalidArgument, "impact model needs mass > 0, distance > 0, speed >= 0");
  }
  return mass * speed * speed / (2.0 * stopping_distance);
}

}  // namespace tensegrity
