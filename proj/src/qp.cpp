#include "tensegrity/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>

namespace tensegrity {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Givens {
  double c = 1.0;
  double s = 0.0;
  double h = 0.0;
};

Givens make_givens(double a, double b) {
  const double h = std::hypot(a, b);
  if (h == 0.0) return {1.0, 0.0, 0.0};
  return {a / h, b / h, h};
}

// Applies [x_j, x_k] <- [c x_j + s x_k, -s x_j + c x_k] to two columns.
void rotate_columns(MatrixXd& m, int j, int k, const Givens& g) {
  for (int r = 0; r < m.rows(); ++r) {
    const double a = m(r, j);
    const double b = m(r, k);
    m(r, j) = g.c * a + g.s * b;
    m(r, k) = -g.s * a + g.c * b;
  }
}

// Reduced problem: min 1/2 y'Hy + g'y  s.t.  C y >= d.
struct ReducedResult {
  VectorXd y;
  std::vector<int> active;  // constraint rows
  std::vector<double> multipliers;
  int iterations = 0;
};

// Goldfarb-Idnani dual active-set method. H must be positive definite.
ReducedResult dual_active_set(const MatrixXd& H, const VectorXd& g, const MatrixXd& C,
                              const VectorXd& d, double viol_tol) {
  const int p = static_cast<int>(H.rows());
  const int m = static_cast<int>(C.rows());
  ReducedResult out;
  if (p == 0) {
    out.y = VectorXd::Zero(0);
    for (int i = 0; i < m; ++i) {
      if (-d(i) < -viol_tol) fail(ErrorCode::InfeasibleEquality, "constraints are infeasible");
    }
    return out;
  }

  Eigen::LLT<MatrixXd> llt(H);
  const MatrixXd L = llt.matrixL();
  // J = L^{-T}, so that J J' = H^{-1}.
  MatrixXd J = L.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(p, p)).transpose();
  MatrixXd R = MatrixXd::Zero(p, p);
  VectorXd y = -llt.solve(g);

  std::vector<int> active;
  std::vector<double> u;
  std::vector<char> is_active(m, 0);
  const double j_scale = J.squaredNorm();
  const int max_iter = 50 * (m + p) + 100;
  int iter = 0;

  auto drop = [&](int l) {
    const int q = static_cast<int>(active.size());
    is_active[active[l]] = 0;
    active.erase(active.begin() + l);
    u.erase(u.begin() + l);
    for (int col = l; col < q - 1; ++col) R.col(col) = R.col(col + 1);
    R.col(q - 1).setZero();
    for (int j = l; j < q - 1; ++j) {
      const Givens gv = make_givens(R(j, j), R(j + 1, j));
      for (int col = j; col < q - 1; ++col) {
        const double a = R(j, col);
        const double b = R(j + 1, col);
        R(j, col) = gv.c * a + gv.s * b;
        R(j + 1, col) = -gv.s * a + gv.c * b;
      }
      rotate_columns(J, j, j + 1, gv);
    }
  };

  while (true) {
    // Most violated inactive constraint; lowest index on ties.
    int ip = -1;
    double worst = -viol_tol;
    for (int i = 0; i < m; ++i) {
      if (is_active[i]) continue;
      const double s = C.row(i).dot(y) - d(i);
      if (s < worst) {
        worst = s;
        ip = i;
      }
    }
    if (ip < 0) break;

    const VectorXd np = C.row(ip).transpose();
    double u_plus = 0.0;
    while (true) {
      if (++iter > max_iter) fail(ErrorCode::MaxIterations, "QP iteration limit reached");
      const int q = static_cast<int>(active.size());
      const VectorXd dv = J.transpose() * np;
      const VectorXd z = J.rightCols(p - q) * dv.tail(p - q);
      VectorXd r(q);
      if (q > 0) {
        r = R.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(dv.head(q));
      }

      double t1 = kInf;
      int l = -1;
      for (int j = 0; j < q; ++j) {
        if (r(j) > 1e-14) {
          const double ratio = u[j] / r(j);
          if (ratio < t1 || (ratio == t1 && active[j] < active[l])) {
            t1 = ratio;
            l = j;
          }
        }
      }
      const double zn = z.dot(np);
      const double slack = np.dot(y) - d(ip);
      const double t2 = zn > 1e-14 * np.squaredNorm() * j_scale ? -slack / zn : kInf;
      const double t = std::min(t1, t2);
      if (t == kInf) fail(ErrorCode::InfeasibleEquality, "constraints are infeasible");

      if (t2 == kInf) {
        for (int j = 0; j < q; ++j) u[j] -= t * r(j);
        u_plus += t;
        drop(l);
        continue;
      }

      y += t * z;
      for (int j = 0; j < q; ++j) u[j] -= t * r(j);
      u_plus += t;
      if (t == t2) {
        // add ip: rotate dv so only its first q+1 entries are nonzero
        VectorXd dd = dv;
        for (int j = p - 1; j > q; --j) {
          const Givens gv = make_givens(dd(j - 1), dd(j));
          dd(j - 1) = gv.h;
          dd(j) = 0.0;
          rotate_columns(J, j - 1, j, gv);
        }
        R.col(q).head(q + 1) = dd.head(q + 1);
        active.push_back(ip);
        u.push_back(u_plus);
        is_active[ip] = 1;
        break;
      }
      drop(l);
    }
  }
  out.y = y;
  out.active = active;
  out.multipliers = u;
  out.iterations = iter;
  return out;
}

bool reduced_hessian_definite(const MatrixXd& H) {
  if (H.rows() == 0) return true;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(H);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
  return lo > 1e-13 * hi;
}

}  // namespace

QpSolution solve_qp(const QpProblem& pr, double tol) {
  const int n = static_cast<int>(pr.Q.rows());
  if (!(tol > 0.0)) fail(ErrorCode::InvalidArgument, "tolerance must be positive");
  if (pr.Q.cols() != n || pr.A.cols() != n || pr.A.rows() != pr.b.size() ||
      (pr.c.size() != 0 && pr.c.size() != n)) {
    fail(ErrorCode::InvalidArgument, "inconsistent QP dimensions");
  }
  for (int i : pr.nonnegative) {
    if (i < 0 || i >= n) fail(ErrorCode::InvalidArgument, "sign constraint index out of range");
  }
  const double q_scale = std::max(1.0, pr.Q.cwiseAbs().maxCoeff());
  if ((pr.Q - pr.Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * q_scale) {
    fail(ErrorCode::InvalidArgument, "Q is not symmetric");
  }
  for (int i = 0; i < pr.A.rows(); ++i) {
    if (pr.A.row(i).cwiseAbs().maxCoeff() == 0.0) {
      fail(ErrorCode::InvalidArgument, "A has an all-zero row");
    }
  }
  {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(pr.Q, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    if (n > 0 && ev.minCoeff() < -1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff())) {
      fail(ErrorCode::NotPsd, "Q is not positive semidefinite");
    }
  }
  const VectorXd c = pr.c.size() == n ? pr.c : VectorXd::Zero(n);

  // Particular solution and orthonormal nullspace basis of A.
  VectorXd xp = VectorXd::Zero(n);
  MatrixXd Z = MatrixXd::Identity(n, n);
  if (pr.A.rows() > 0) {
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(pr.A);
    cod.setThreshold(1e-12);
    xp = cod.solve(pr.b);
    const double b_scale = std::max(1.0, pr.b.cwiseAbs().maxCoeff());
    if ((pr.A * xp - pr.b).cwiseAbs().maxCoeff() > tol * b_scale) {
      fail(ErrorCode::InfeasibleEquality, "b is not in the range of A");
    }
    Eigen::ColPivHouseholderQR<MatrixXd> qr(pr.A.transpose());
    qr.setThreshold(1e-12);
    const int rank = static_cast<int>(qr.rank());
    const MatrixXd Qfull = qr.householderQ() * MatrixXd::Identity(n, n);
    Z = Qfull.rightCols(n - rank);
  }

  QpSolution sol;
  MatrixXd Qw = pr.Q;
  MatrixXd H = Z.transpose() * Qw * Z;
  if (!reduced_hessian_definite(H)) {
    const double lift = 1e-12 * std::max(pr.Q.diagonal().maxCoeff(), 1e-300);
    Qw.diagonal().array() += lift;
    H = Z.transpose() * Qw * Z;
    sol.regularized = true;
    if (!reduced_hessian_definite(H)) {
      fail(ErrorCode::NotPsd, "reduced Hessian is singular");
    }
  }
  const VectorXd g = Z.transpose() * (Qw * xp + c);

  // Sign constraints in reduced coordinates: Z_i y >= -xp_i.
  const double x_scale = std::max(1.0, xp.cwiseAbs().maxCoeff());
  const double viol_tol = 1e-12 * x_scale;
  std::vector<int> rows;
  for (int i : pr.nonnegative) {
    if (Z.row(i).norm() <= 1e-14) {
      if (xp(i) < -tol * x_scale) fail(ErrorCode::InfeasibleEquality, "sign constraint infeasible");
      continue;
    }
    rows.push_back(i);
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  MatrixXd Cm(rows.size(), Z.cols());
  VectorXd dm(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    Cm.row(k) = Z.row(rows[k]);
    dm(k) = -xp(rows[k]);
  }

  const ReducedResult rr = dual_active_set(H, g, Cm, dm, viol_tol);
  sol.x = xp + Z * rr.y;
  sol.iterations = rr.iterations;
  sol.bound_multipliers = VectorXd::Zero(n);
  for (std::size_t k = 0; k < rr.active.size(); ++k) {
    const int var = rows[rr.active[k]];
    sol.active_set.push_back(var);
    sol.bound_multipliers(var) = rr.multipliers[k];
  }
  std::sort(sol.active_set.begin(), sol.active_set.end());

  sol.objective = 0.5 * sol.x.dot(pr.Q * sol.x) + c.dot(sol.x);
  sol.equality_residual = pr.A.rows() > 0 ? (pr.A * sol.x - pr.b).cwiseAbs().maxCoeff() : 0.0;
  const VectorXd grad = Qw * sol.x + c - sol.bound_multipliers;
  if (pr.A.rows() > 0) {
    sol.equality_multipliers =
        pr.A.transpose().completeOrthogonalDecomposition().solve(grad);
    sol.stationarity_residual =
        (pr.A.transpose() * sol.equality_multipliers - grad).cwiseAbs().maxCoeff();
  } else {
    sol.equality_multipliers = VectorXd::Zero(0);
    sol.stationarity_residual = grad.cwiseAbs().maxCoeff();
  }
  double comp = 0.0;
  for (int i : pr.nonnegative) comp = std::max(comp, std::abs(sol.bound_multipliers(i) * sol.x(i)));
  sol.complementarity_residual = comp;
  return sol;
}

}  // namespace tensegrity
