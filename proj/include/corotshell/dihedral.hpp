#pragma once

#include <cmath>

#include "corotshell/errors.hpp"
#include "corotshell/types.hpp"

namespace corotshell {

/// Signed dihedral angle of the stencil (x0, x1 | x2, x3) across edge x0-x1.
///
/// Triangle A is (x0, x1, x2) with normal nA = (x1-x0) x (x2-x0), triangle B is
/// (x0, x3, x1) with normal nB = (x3-x0) x (x1-x0). The angle is zero for a
/// planar stencil and positive when the apexes fold toward the side nA points
/// to: theta = atan2(((nB x nA) . e_hat), nA . nB).
struct Dihedral {
  double theta = 0.0;
  Vec12 grad = Vec12::Zero();
  Mat12 hess = Mat12::Zero();
};

namespace detail {

struct DihedralFrame {
  Vec3 e, a, b;  // x1-x0, x2-x0, x3-x0
  Vec3 nA, nB;
  double e_len = 0.0;
  double nA_sq = 0.0;
  double nB_sq = 0.0;
};

inline DihedralFrame dihedral_frame(const Vec3& x0, const Vec3& x1, const Vec3& x2, const Vec3& x3) {
  DihedralFrame f;
  f.e = x1 - x0;
  f.a = x2 - x0;
  f.b = x3 - x0;
  f.nA = f.e.cross(f.a);
  f.nB = f.b.cross(f.e);
  f.e_len = f.e.norm();
  f.nA_sq = f.nA.squaredNorm();
  f.nB_sq = f.nB.squaredNorm();
  const double guard = 1e-12 * f.e_len * f.e_len;
  if (!(f.e_len > 0.0) || !(std::sqrt(f.nA_sq) > guard) || !(std::sqrt(f.nB_sq) > guard)) {
    fail(ErrorKind::DegenerateDihedral, "hinge stencil has a degenerate triangle");
  }
  return f;
}

inline double dihedral_angle(const DihedralFrame& f) {
  const double y = f.nB.cross(f.nA).dot(f.e) / f.e_len;
  const double x = f.nA.dot(f.nB);
  return std::atan2(y, x);
}

}  // namespace detail

inline double signed_dihedral(const Vec3& x0, const Vec3& x1, const Vec3& x2, const Vec3& x3) {
  return detail::dihedral_angle(detail::dihedral_frame(x0, x1, x2, x3));
}

inline double signed_dihedral(const Vec12& x) {
  return signed_dihedral(x.segment<3>(0), x.segment<3>(3), x.segment<3>(6), x.segment<3>(9));
}

/// Angle with its analytic gradient and (optionally) Hessian.
///
/// Apex gradients are |e| nA / |nA|^2 and |e| nB / |nB|^2; the edge-vertex
/// gradients follow from translation and rotation invariance using the
/// projections alpha = (apex - x0).e / |e|^2 of the apexes onto the edge.
inline Dihedral dihedral_with_derivatives(const Vec12& x, bool want_hessian = true) {
  const Vec3 x0 = x.segment<3>(0);
  const Vec3 x1 = x.segment<3>(3);
  const Vec3 x2 = x.segment<3>(6);
  const Vec3 x3 = x.segment<3>(9);
  const detail::DihedralFrame f = detail::dihedral_frame(x0, x1, x2, x3);

  Dihedral out;
  out.theta = detail::dihedral_angle(f);

  const double e_sq = f.e_len * f.e_len;
  const double sA = f.e_len / f.nA_sq;
  const double sB = f.e_len / f.nB_sq;
  const Vec3 gA = sA * f.nA;
  const Vec3 gB = sB * f.nB;
  const double alphaA = f.a.dot(f.e) / e_sq;
  const double alphaB = f.b.dot(f.e) / e_sq;

  out.grad.segment<3>(0) = -(1.0 - alphaA) * gA - (1.0 - alphaB) * gB;
  out.grad.segment<3>(3) = -alphaA * gA - alphaB * gB;
  out.grad.segment<3>(6) = gA;
  out.grad.segment<3>(9) = gB;
  if (!want_hessian) return out;

  // Jacobians (3x12 or 1x12) of the building blocks with respect to (x0, x1, x2, x3).
  using Jac3 = Eigen::Matrix<double, 3, 12>;
  using Row12 = Eigen::Matrix<double, 1, 12>;
  const Mat3 I = Mat3::Identity();

  Jac3 de = Jac3::Zero();
  de.block<3, 3>(0, 0) = -I;
  de.block<3, 3>(0, 3) = I;
  Jac3 da = Jac3::Zero();
  da.block<3, 3>(0, 0) = -I;
  da.block<3, 3>(0, 6) = I;
  Jac3 db = Jac3::Zero();
  db.block<3, 3>(0, 0) = -I;
  db.block<3, 3>(0, 9) = I;

  // nA = e x a -> d nA = -[a]x de + [e]x da ; nB = b x e -> d nB = -[e]x db + [b]x de
  const Jac3 dnA = -cross_matrix(f.a) * de + cross_matrix(f.e) * da;
  const Jac3 dnB = -cross_matrix(f.e) * db + cross_matrix(f.b) * de;

  const Row12 de_len = (f.e / f.e_len).transpose() * de;
  const Row12 dnA_sq = 2.0 * f.nA.transpose() * dnA;
  const Row12 dnB_sq = 2.0 * f.nB.transpose() * dnB;
  const Row12 dsA = de_len / f.nA_sq - f.e_len * dnA_sq / (f.nA_sq * f.nA_sq);
  const Row12 dsB = de_len / f.nB_sq - f.e_len * dnB_sq / (f.nB_sq * f.nB_sq);

  const Jac3 dgA = f.nA * dsA + sA * dnA;
  const Jac3 dgB = f.nB * dsB + sB * dnB;

  const Row12 de_sq = 2.0 * f.e.transpose() * de;
  const Row12 dalphaA = (f.e.transpose() * da + f.a.transpose() * de) / e_sq - f.a.dot(f.e) * de_sq / (e_sq * e_sq);
  const Row12 dalphaB = (f.e.transpose() * db + f.b.transpose() * de) / e_sq - f.b.dot(f.e) * de_sq / (e_sq * e_sq);

  out.hess.block<3, 12>(0, 0) = gA * dalphaA - (1.0 - alphaA) * dgA + gB * dalphaB - (1.0 - alphaB) * dgB;
  out.hess.block<3, 12>(3, 0) = -gA * dalphaA - alphaA * dgA - gB * dalphaB - alphaB * dgB;
  out.hess.block<3, 12>(6, 0) = dgA;
  out.hess.block<3, 12>(9, 0) = dgB;
  out.hess = 0.5 * (out.hess + out.hess.transpose()).eval();
  return out;
}

}  // namespace corotshell
