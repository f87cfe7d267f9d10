#include "tensegrity/rotation.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace tensegrity {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::OutOfRange: return "out of range";
    case ErrorCode::Internal: return "internal error";
    case ErrorCode::InfeasibleEquality: return "infeasible constraints";
    case ErrorCode::NotPsd: return "matrix is not positive semidefinite";
    case ErrorCode::MaxIterations: return "iteration limit reached";
    case ErrorCode::DegenerateCommand: return "degenerate command";
    case ErrorCode::SingularAllocation: return "singular allocation matrix";
    case ErrorCode::NotAdjacent: return "faces are not adjacent";
    case ErrorCode::DisconnectedGraph: return "face graph is disconnected";
    case ErrorCode::NoPath: return "no path to goal";
    case ErrorCode::ExcessiveTimestep: return "time step too large";
    case ErrorCode::Timeout: return "timeout";
    case ErrorCode::Config: return "configuration error";
    case ErrorCode::Io: return "I/O error";
  }
  return "unknown error";
}

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

double orthonormality_error(const Mat3& m) {
  const double ortho = (m * m.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff();
  return std::max(ortho, std::abs(m.determinant() - 1.0));
}

Rotation Rotation::from_matrix(const Mat3& m) {
  if (!m.allFinite() || orthonormality_error(m) > 1e-10) {
    fail(ErrorCode::InvalidArgument, "matrix is not a proper rotation");
  }
  return Rotation(m, Unchecked{});
}

Rotation Rotation::nearest(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return Rotation(u * v.transpose(), Unchecked{});
}

Rotation Rotation::from_axis_angle(const Vec3& axis, double angle) {
  const double n = axis.norm();
  if (!(n > 0.0) || !std::isfinite(angle)) {
    fail(ErrorCode::InvalidArgument, "axis-angle needs a nonzero finite axis");
  }
  return Rotation(Eigen::AngleAxisd(angle, axis / n).toRotationMatrix(), Unchecked{});
}

Rotation Rotation::exp(const Vec3& w) {
  const double theta = w.norm();
  if (theta < 1e-12) {
    // second-order series keeps the result orthonormal to rounding
    const Mat3 s = skew(w);
    return nearest(Mat3::Identity() + s + 0.5 * s * s);
  }
  return Rotation(Eigen::AngleAxisd(theta, w / theta).toRotationMatrix(), Unchecked{});
}

Rotation Rotation::from_euler(double yaw, double pitch, double roll) {
  const Mat3 m = (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
                  Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
                  Eigen::AngleAxisd(roll, Vec3::UnitX())).toRotationMatrix();
  return Rotation(m, Unchecked{});
}

Rotation Rotation::aligning(const Vec3& from, const Vec3& to) {
  const Vec3 a = from.normalized();
  const Vec3 b = to.normalized();
  const double c = a.dot(b);
  if (1.0 + c < 1e-12) {
    fail(ErrorCode::InvalidArgument, "aligning rotation undefined for antiparallel vectors");
  }
  const Mat3 s = skew(a.cross(b));
  return Rotation(Mat3::Identity() + s + s * s / (1.0 + c), Unchecked{});
}

namespace {

Vec3 vee_antisymmetric(const Mat3& m) {
  return 0.5 * Vec3(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
}

// Canonical sign for a half-turn axis: z, then x, then y nonnegative.
Vec3 canonical_half_turn_axis(Vec3 a) {
  for (int idx : {2, 0, 1}) {
    if (std::abs(a[idx]) > 1e-12) {
      if (a[idx] < 0.0) a = -a;
      break;
    }
  }
  return a;
}

}  // namespace

double Rotation::angle() const {
  const double c = std::clamp((m_.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double s = vee_antisymmetric(m_).norm();
  return std::atan2(s, c);
}

Vec3 Rotation::log() const {
  const Vec3 v = vee_antisymmetric(m_);  // sin(theta) * axis
  const double s = v.norm();
  const double c = std::clamp((m_.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double theta = std::atan2(s, c);
  if (theta < 1e-8) return v;  // theta / sin(theta) == 1 to rounding
  if (std::numbers::pi - theta > 1e-6) return v * (theta / s);

  // Near a half turn: recover the axis from the symmetric part.
  const Mat3 aat = (m_ + m_.transpose() - 2.0 * c * Mat3::Identity()) / (2.0 * (1.0 - c));
  int k = 0;
  aat.diagonal().maxCoeff(&k);
  Vec3 axis = aat.col(k) / std::sqrt(std::max(aat(k, k), 1e-300));
  axis.normalize();
  if (s > 1e-12) {
    if (axis.dot(v) < 0.0) axis = -axis;
  } else {
    axis = canonical_half_turn_axis(axis);
  }
  return axis * theta;
}

double Rotation::yaw() const { return std::atan2(m_(1, 0), m_(0, 0)); }
double Rotation::pitch() const { return std::asin(std::clamp(-m_(2, 0), -1.0, 1.0)); }
double Rotation::roll() const { return std::atan2(m_(2, 1), m_(2, 2)); }

void Rotation::orthonormalize() { m_ = nearest(m_).m_; }

}  // namespace tensegrity
