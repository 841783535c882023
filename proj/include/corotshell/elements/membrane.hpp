#pragma once

#include <cmath>
#include <optional>

#include <Eigen/SVD>

#include "corotshell/errors.hpp"
#include "corotshell/material.hpp"
#include "corotshell/psd.hpp"
#include "corotshell/types.hpp"

namespace corotshell {

/// Per-triangle rest quantities used by the membrane element.
struct TriangleRest {
  double area = 0.0;
  Mat2 inv_rest_shape = Mat2::Identity();
  Mat32 rest_frame = Mat32::Zero();  // orthonormal in-plane axes as columns
};

struct PolarFactors {
  Mat32 R = Mat32::Zero();
  Vec2 sigma = Vec2::Zero();  // sigma(0) >= sigma(1)
  Mat2 V = Mat2::Identity();  // right singular vectors
};

struct MembraneEval {
  Mat32 F = Mat32::Zero();
  Mat32 R = Mat32::Zero();
  Vec2 sigma = Vec2::Zero();
  double energy = 0.0;
  Vec9 grad = Vec9::Zero();
  Mat9 hess = Mat9::Zero();
  bool used_fallback_rotation = false;
};

/// F = [xj - xi, xk - xi] * inv_rest_shape.
inline Mat32 deformation_gradient(const Vec3& xi, const Vec3& xj, const Vec3& xk, const Mat2& inv_rest_shape) {
  Mat32 Ds;
  Ds.col(0) = xj - xi;
  Ds.col(1) = xk - xi;
  return Ds * inv_rest_shape;
}

/// Rotation factor of F = R S via the thin SVD. R has orthonormal columns and
/// is the closest such matrix to F in the Frobenius norm.
inline PolarFactors polar_rotation(const Mat32& F) {
  if (!F.allFinite()) fail(ErrorKind::DegenerateElement, "deformation gradient is not finite");
  Eigen::JacobiSVD<Mat32> svd(F, Eigen::ComputeFullU | Eigen::ComputeFullV);
  PolarFactors p;
  p.sigma = svd.singularValues();
  if (!(p.sigma(1) >= 1e-10 * p.sigma(0)) || !(p.sigma(0) > 0.0)) {
    fail(ErrorKind::DegenerateElement, "collapsed triangle (sigma_2 below 1e-10 * sigma_1)");
  }
  p.V = svd.matrixV();
  p.R = svd.matrixU().leftCols<2>() * p.V.transpose();
  return p;
}

/// Energy from singular values: h A [mu ((s1-1)^2 + (s2-1)^2) + lambda/2 (s1+s2-2)^2].
inline double membrane_energy(const Vec2& sigma, const Material& mat, double rest_area) {
  const double d1 = sigma(0) - 1.0;
  const double d2 = sigma(1) - 1.0;
  const double tr = sigma(0) + sigma(1) - 2.0;
  return mat.thickness * rest_area * (mat.mu * (d1 * d1 + d2 * d2) + 0.5 * mat.lambda_ps * tr * tr);
}

/// Same energy written with F and R: h A [mu |F - R|^2 + lambda/2 tr^2(R^T F - I)].
inline double membrane_energy(const Mat32& F, const Mat32& R, const Material& mat, double rest_area) {
  const double tr = (R.transpose() * F).trace() - 2.0;
  return mat.thickness * rest_area * (mat.mu * (F - R).squaredNorm() + 0.5 * mat.lambda_ps * tr * tr);
}

namespace detail {

// dF = B dx with vec(F) column-major (row + 3 * col) and x = (xi, xj, xk).
inline Eigen::Matrix<double, 6, 9> membrane_dF_dx(const Mat2& Dinv) {
  Eigen::Matrix<double, 6, 9> B = Eigen::Matrix<double, 6, 9>::Zero();
  for (int c = 0; c < 2; ++c) {
    const double cj = Dinv(0, c);
    const double ck = Dinv(1, c);
    for (int r = 0; r < 3; ++r) {
      B(r + 3 * c, r) = -(cj + ck);
      B(r + 3 * c, 3 + r) = cj;
      B(r + 3 * c, 6 + r) = ck;
    }
  }
  return B;
}

inline Eigen::Matrix<double, 6, 1> vec(const Mat32& m) {
  return Eigen::Map<const Eigen::Matrix<double, 6, 1>>(m.data());
}

inline Mat32 unvec(const Eigen::Matrix<double, 6, 1>& v) {
  return Eigen::Map<const Mat32>(v.data());
}

// d^2 Psi / dF^2 for the energy density, differentiating
// P = 2 mu (F - R) + lambda (tr S - 2) R through the polar factors.
inline Eigen::Matrix<double, 6, 6> membrane_density_hessian(const Mat32& F, const PolarFactors& p,
                                                            const Material& mat) {
  const Mat2& V = p.V;
  const Vec2& s = p.sigma;
  const Mat2 S_inv = V * s.cwiseInverse().asDiagonal() * V.transpose();
  const double trS = s.sum();

  Eigen::Matrix<double, 6, 6> H;
  for (int k = 0; k < 6; ++k) {
    Eigen::Matrix<double, 6, 1> e = Eigen::Matrix<double, 6, 1>::Zero();
    e(k) = 1.0;
    const Mat32 dF = unvec(e);
    // S dS + dS S = dF^T F + F^T dF, solved in the eigenbasis of S.
    const Mat2 M = V.transpose() * (dF.transpose() * F + F.transpose() * dF) * V;
    Mat2 dS_t;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) dS_t(i, j) = M(i, j) / (s(i) + s(j));
    const Mat2 dS = V * dS_t * V.transpose();
    const Mat32 dR = (dF - p.R * dS) * S_inv;
    const Mat32 dP = 2.0 * mat.mu * (dF - dR) + mat.lambda_ps * (dS.trace() * p.R + (trS - 2.0) * dR);
    H.col(k) = vec(dP);
  }
  return 0.5 * (H + H.transpose());
}

}  // namespace detail

/// Corotational membrane element on positions x = (xi, xj, xk).
///
/// The gradient is exact: the dR/dF terms vanish for this energy. When the
/// triangle has collapsed and `fallback_R` is given, R is frozen to it and the
/// energy is evaluated in its F/R form; without a fallback the
/// DegenerateElement error propagates.
inline MembraneEval membrane_eval(const Vec9& x, const TriangleRest& rest, const Material& mat, bool want_grad,
                                  bool want_hess, bool project,
                                  const std::optional<Mat32>& fallback_R = std::nullopt) {
  MembraneEval out;
  out.F = deformation_gradient(x.segment<3>(0), x.segment<3>(3), x.segment<3>(6), rest.inv_rest_shape);
  const double scale = mat.thickness * rest.area;

  std::optional<PolarFactors> polar;
  try {
    polar = polar_rotation(out.F);
  } catch (const Error&) {
    if (!fallback_R) throw;
  }

  Eigen::Matrix<double, 6, 6> H_F;
  if (polar) {
    out.R = polar->R;
    out.sigma = polar->sigma;
    out.energy = membrane_energy(out.sigma, mat, rest.area);
    if (want_hess) H_F = scale * detail::membrane_density_hessian(out.F, *polar, mat);
  } else {
    out.used_fallback_rotation = true;
    out.R = *fallback_R;
    out.sigma = Eigen::JacobiSVD<Mat32>(out.F).singularValues();
    out.energy = membrane_energy(out.F, out.R, mat, rest.area);
    if (want_hess) {
      const Eigen::Matrix<double, 6, 1> r = detail::vec(out.R);
      H_F = scale * (2.0 * mat.mu * Eigen::Matrix<double, 6, 6>::Identity() + mat.lambda_ps * r * r.transpose());
    }
  }

  if (!want_grad && !want_hess) return out;
  const Eigen::Matrix<double, 6, 9> B = detail::membrane_dF_dx(rest.inv_rest_shape);
  if (want_grad) {
    const double tr = (out.R.transpose() * out.F).trace() - 2.0;
    const Mat32 P = scale * (2.0 * mat.mu * (out.F - out.R) + mat.lambda_ps * tr * out.R);
    out.grad = B.transpose() * detail::vec(P);
  }
  if (want_hess) {
    out.hess = B.transpose() * H_F * B;
    out.hess = 0.5 * (out.hess + out.hess.transpose()).eval();
    if (project) out.hess = project_psd(out.hess);
  }
  return out;
}

inline Vec9 membrane_gradient(const Vec9& x, const TriangleRest& rest, const Material& mat) {
  return membrane_eval(x, rest, mat, true, false, false).grad;
}

inline Mat9 membrane_hessian(const Vec9& x, const TriangleRest& rest, const Material& mat, bool project) {
  return membrane_eval(x, rest, mat, false, true, project).hess;
}

}  // namespace corotshell
