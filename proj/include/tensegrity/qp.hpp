#pragma once

#include <Eigen/Core>
#include <vector>

#include "tensegrity/common.hpp"

namespace tensegrity {

/// minimize 1/2 x'Qx + c'x  subject to  A x = b,  x_i >= 0 for i in `nonnegative`.
struct QpProblem {
  Eigen::MatrixXd Q;
  Eigen::VectorXd c;  // may be empty (treated as zero)
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::vector<int> nonnegative;
};

struct QpSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
  double equality_residual = 0.0;       // |Ax - b|_inf
  double stationarity_residual = 0.0;   // |Qx + c - A'nu - lambda|_inf
  double complementarity_residual = 0.0;  // max_i |lambda_i x_i|
  std::vector<int> active_set;          // bound-constrained indices held at zero
  Eigen::VectorXd bound_multipliers;    // lambda, one per variable (zero if unbounded)
  Eigen::VectorXd equality_multipliers; // nu
  int iterations = 0;
  bool regularized = false;  // Q diagonal was lifted to make the reduced Hessian definite
};

inline constexpr double kDefaultQpTolerance = 1e-9;

/// Dual active-set solve after eliminating the equality constraints through
/// an orthonormal nullspace basis of A.
///
/// Errors: InvalidArgument (dimensions, asymmetric Q, zero row in A, tol <= 0),
/// NotPsd, InfeasibleEquality (no x with Ax = b and the sign constraints),
/// MaxIterations.
QpSolution solve_qp(const QpProblem& problem, double tol = kDefaultQpTolerance);

}  // namespace tensegrity
