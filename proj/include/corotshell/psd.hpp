#pragma once

#include <Eigen/Eigenvalues>

namespace corotshell {

/// Nearest positive-semidefinite matrix (Frobenius norm) by clamping negative
/// eigenvalues to zero. Matrices that are already PSD (up to round-off on the
/// rigid-mode nullspace) come back unchanged.
template <typename Derived>
typename Derived::PlainObject project_psd(const Eigen::MatrixBase<Derived>& m) {
  using Plain = typename Derived::PlainObject;
  const Plain sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Plain> eig(sym);
  const double tol = 1e-12 * eig.eigenvalues().cwiseAbs().maxCoeff();
  if (eig.eigenvalues().minCoeff() >= -tol) return Plain(m);
  const auto clamped = eig.eigenvalues().cwiseMax(0.0);
  return eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
}

template <typename Derived>
double min_eigenvalue(const Eigen::MatrixBase<Derived>& m) {
  using Plain = typename Derived::PlainObject;
  const Plain sym = 0.5 * (m + m.transpose());
  return Eigen::SelfAdjointEigenSolver<Plain>(sym, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

}  // namespace corotshell
