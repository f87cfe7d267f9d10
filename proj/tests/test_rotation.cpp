#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "tensegrity/rotation.hpp"

using namespace tensegrity;

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Vec3(n(rng), n(rng), n(rng)).normalized();
}

}  // namespace

TEST(Rotation, FromMatrixRejectsNonOrthonormal) {
  Mat3 m = Mat3::Identity();
  m(0, 1) = 1e-6;
  EXPECT_THROW(Rotation::from_matrix(m), Error);
  EXPECT_THROW(Rotation::from_matrix(-Mat3::Identity()), Error);
  EXPECT_NO_THROW(Rotation::from_matrix(Mat3::Identity()));
}

TEST(Rotation, EulerRoundTrip) {
  const Rotation r = Rotation::from_euler(0.3, -0.4, 1.1);
  EXPECT_NEAR(r.yaw(), 0.3, 1e-12);
  EXPECT_NEAR(r.pitch(), -0.4, 1e-12);
  EXPECT_NEAR(r.roll(), 1.1, 1e-12);
}

TEST(Rotation, EulerComposition) {
  const Mat3 rz = Eigen::AngleAxisd(0.2, Vec3::UnitZ()).toRotationMatrix();
  const Mat3 ry = Eigen::AngleAxisd(0.5, Vec3::UnitY()).toRotationMatrix();
  const Mat3 rx = Eigen::AngleAxisd(-0.7, Vec3::UnitX()).toRotationMatrix();
  const Rotation r = Rotation::from_euler(0.2, 0.5, -0.7);
  EXPECT_LT((r.matrix() - rz * ry * rx).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Rotation, LogExpRoundTripProperty) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(0.0, kPi - 1e-6);
  for (int i = 0; i < 200; ++i) {
    const Vec3 v = random_unit(rng) * angle(rng);
    const Rotation r = Rotation::exp(v);
    EXPECT_LT((r.log() - v).norm(), 1e-9);
    EXPECT_LT(orthonormality_error(r.matrix()), 1e-12);
    EXPECT_NEAR(r.angle(), v.norm(), 1e-9);
  }
}

TEST(Rotation, LogAtPiPicksCanonicalSign) {
  const Rotation r = Rotation::from_axis_angle(Vec3(0, 0, -1), kPi);
  const Vec3 w = r.log();
  EXPECT_NEAR(w.norm(), kPi, 1e-12);
  EXPECT_GT(w.z(), 0.0);
  const Rotation rx = Rotation::from_axis_angle(Vec3(-1, 0, 0), kPi);
  EXPECT_GT(rx.log().x(), 0.0);
}

TEST(Rotation, AligningCarriesVector) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const Vec3 a = random_unit(rng);
    const Vec3 b = random_unit(rng);
    if (a.dot(b) < -0.999) continue;
    const Rotation r = Rotation::aligning(a, b);
    EXPECT_LT((r * a - b).norm(), 1e-12);
    // Minimal: the axis is perpendicular to both.
    EXPECT_NEAR(r.angle(), std::acos(std::clamp(a.dot(b), -1.0, 1.0)), 1e-9);
  }
  EXPECT_THROW(Rotation::aligning(Vec3::UnitZ(), -Vec3::UnitZ()), Error);
}

TEST(Rotation, NearestProjectsOntoSO3) {
  Mat3 m = Rotation::from_euler(0.1, 0.2, 0.3).matrix();
  m += 1e-4 * Mat3::Ones();
  const Rotation r = Rotation::nearest(m);
  EXPECT_LT(orthonormality_error(r.matrix()), 1e-13);
  EXPECT_LT((r.matrix() - m).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Rotation, SkewMatchesCross) {
  const Vec3 a(1, -2, 3), b(0.5, 4, -1);
  EXPECT_LT((skew(a) * b - a.cross(b)).norm(), 1e-15);
}
