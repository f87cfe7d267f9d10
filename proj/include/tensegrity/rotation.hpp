#pragma once

#include "tensegrity/common.hpp"

namespace tensegrity {

/// Proper rotation in SO(3), stored as a 3x3 matrix.
///
/// Attitudes follow the body-to-Earth convention: `R * v_body = v_earth`.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  /// Wraps an already orthonormal matrix. Throws InvalidArgument when
  /// R*R^T deviates from I or det(R) from +1 by more than 1e-10.
  static Rotation from_matrix(const Mat3& m);
  /// Projects an approximately orthonormal matrix onto SO(3).
  static Rotation nearest(const Mat3& m);
  static Rotation from_axis_angle(const Vec3& axis, double angle);
  /// Exponential map of a rotation vector (axis * angle).
  static Rotation exp(const Vec3& rotation_vector);
  /// Z-Y-X (yaw, pitch, roll) Euler angles: R = Rz(yaw) Ry(pitch) Rx(roll).
  static Rotation from_euler(double yaw, double pitch, double roll);
  /// Minimal rotation carrying unit vector `from` onto unit vector `to`
  /// (Rodrigues form). Throws InvalidArgument when they are antiparallel.
  static Rotation aligning(const Vec3& from, const Vec3& to);

  const Mat3& matrix() const { return m_; }
  Rotation inverse() const { return Rotation(m_.transpose(), Unchecked{}); }
  Rotation operator*(const Rotation& o) const {
    return Rotation(m_ * o.m_, Unchecked{});
  }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  /// Rotation angle in [0, pi] of the axis-angle representation.
  double angle() const;
  /// Logarithm map: rotation vector with norm in [0, pi]. At exactly pi the
  /// axis sign is chosen so its first nonzero component among (z, x, y) is
  /// positive.
  Vec3 log() const;

  double yaw() const;
  double pitch() const;
  double roll() const;

  /// Re-projects onto SO(3); used to bound integration drift.
  void orthonormalize();

 private:
  struct Unchecked {};
  Rotation(const Mat3& m, Unchecked) : m_(m) {}
  Mat3 m_;
};

Mat3 skew(const Vec3& v);

/// Orthonormality defect max(|R R^T - I|, |det R - 1|).
double orthonormality_error(const Mat3& m);

}  // namespace tensegrity
