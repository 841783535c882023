#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "corotshell/errors.hpp"
#include "corotshell/solver/options.hpp"

namespace corotshell {

struct LinearSolveReport {
  Eigen::VectorXd solution;
  double regularization = 0.0;  // shift added to the diagonal, 0 if none
  int attempts = 0;
};

/// Normwise backward error |H s - rhs| / (|H| |s| + |rhs|), infinity norms.
/// A stable factorization keeps this near machine precision regardless of
/// the conditioning of H.
inline double relative_residual(const Eigen::SparseMatrix<double>& H, const Eigen::VectorXd& s,
                                const Eigen::VectorXd& rhs) {
  double h_norm = 0.0;
  for (Eigen::Index j = 0; j < H.outerSize(); ++j) {
    double col = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(H, j); it; ++it) col += std::abs(it.value());
    h_norm = std::max(h_norm, col);  // max column sum; H is symmetric
  }
  const double denom = h_norm * s.lpNorm<Eigen::Infinity>() + rhs.lpNorm<Eigen::Infinity>();
  const double res = (H * s - rhs).lpNorm<Eigen::Infinity>();
  return denom > 0.0 ? res / denom : res;
}

/// Solves H s = rhs for a symmetric PSD H and checks the residual. Throws
/// LinearSolveFailure when the factorization or the residual check fails.
inline Eigen::VectorXd linear_solve(const Eigen::SparseMatrix<double>& H, const Eigen::VectorXd& rhs,
                                    const SolverOpts& opts) {
  if (rhs.size() != H.rows()) fail(ErrorKind::LinearSolveFailure, "dimension mismatch");
  if (rhs.isZero(0.0)) return Eigen::VectorXd::Zero(rhs.size());

  Eigen::VectorXd s;
  if (opts.linear_method == LinearMethod::Direct) {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(H);
    if (ldlt.info() != Eigen::Success) fail(ErrorKind::LinearSolveFailure, "LDLT factorization failed");
    // For PSD H every pivot is at least lambda_min; a pivot at round-off level
    // means H is singular and the solution would be dominated by noise.
    const Eigen::VectorXd D = ldlt.vectorD();
    if (!(D.minCoeff() > 1e-12 * D.cwiseAbs().maxCoeff())) {
      fail(ErrorKind::LinearSolveFailure, "matrix is numerically singular");
    }
    s = ldlt.solve(rhs);
    // A few rounds of iterative refinement for ill-conditioned stiffness matrices.
    for (int k = 0; k < 3 && s.allFinite() && relative_residual(H, s, rhs) > opts.linear_tol; ++k) {
      s += ldlt.solve(rhs - H * s);
    }
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(opts.linear_tol);
    cg.setMaxIterations(opts.linear_max_iter);
    cg.compute(H);
    s = cg.solve(rhs);
  }
  if (!s.allFinite()) fail(ErrorKind::LinearSolveFailure, "solution is not finite");
  const double rel = relative_residual(H, s, rhs);
  if (!(rel <= opts.linear_tol)) {
    fail(ErrorKind::LinearSolveFailure, "relative residual " + std::to_string(rel) + " above tolerance");
  }
  return s;
}

/// linear_solve with the fixed regularization ladder: on failure retry with
/// H + eps I, eps = 1e-8 trace(H)/n, then 1e-7, 1e-6 (three retries).
inline LinearSolveReport regularized_solve(const Eigen::SparseMatrix<double>& H, const Eigen::VectorXd& rhs,
                                           const SolverOpts& opts, double start_shift = 0.0) {
  LinearSolveReport report;
  const Eigen::Index n = H.rows();
  const double base = n > 0 ? 1e-8 * std::abs(H.diagonal().sum()) / static_cast<double>(n) : 0.0;
  double shift = start_shift;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    report.attempts = attempt + 1;
    try {
      if (shift == 0.0) {
        report.solution = linear_solve(H, rhs, opts);
      } else {
        Eigen::SparseMatrix<double> I(n, n);
        I.setIdentity();
        const Eigen::SparseMatrix<double> Hr = H + shift * I;
        report.solution = linear_solve(Hr, rhs, opts);
      }
      report.regularization = shift;
      return report;
    } catch (const Error&) {
      if (attempt == 3) throw;
      shift = shift == 0.0 ? (base > 0.0 ? base : 1e-8) : shift * 10.0;
    }
  }
  fail(ErrorKind::LinearSolveFailure, "regularization ladder exhausted");
}

}  // namespace corotshell
