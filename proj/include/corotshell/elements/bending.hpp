#pragma once

#include <array>
#include <cmath>
#include <optional>

#include <Eigen/SVD>

#include "corotshell/dihedral.hpp"
#include "corotshell/errors.hpp"
#include "corotshell/material.hpp"
#include "corotshell/psd.hpp"
#include "corotshell/types.hpp"

namespace corotshell {

using Vec4 = Eigen::Vector4d;

/// Per-hinge rest quantities. Stencil order is (edge0, edge1, apex0, apex1).
struct HingeRest {
  double theta = 0.0;      // rest signed dihedral
  double edge_len = 0.0;   // |e_bar|
  std::array<double, 2> heights{};  // apex heights over the shared edge
  std::array<double, 2> tri_areas{};
  Vec12 positions = Vec12::Zero();  // x_bar
  Vec4 weights = Vec4::Zero();      // shape-matching weights (stencil-lumped areas)
  Mat12 bend_form = Mat12::Zero();  // K_bar

  /// (A1 + A2) / 3
  double hinge_area() const { return (tri_areas[0] + tri_areas[1]) / 3.0; }
};

struct RigidFit {
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();
};

struct BendEval {
  double theta = 0.0;  // discrete-shells model only
  Mat3 R = Mat3::Identity();
  Vec3 t = Vec3::Zero();
  Vec12 u = Vec12::Zero();  // corotated displacement
  double energy = 0.0;
  Vec12 grad = Vec12::Zero();
  Mat12 hess = Mat12::Zero();
  bool used_fallback_rotation = false;
};

/// Weighted least-squares rigid fit x_i ~ R x_bar_i + t with det R = +1,
/// from the polar factor of sum_i w_i (x_i - c)(x_bar_i - c_bar)^T.
inline RigidFit shape_match_rotation(const Vec12& x, const Vec12& x_bar, const Vec4& w) {
  const double wsum = w.sum();
  Vec3 c = Vec3::Zero();
  Vec3 c_bar = Vec3::Zero();
  for (int i = 0; i < 4; ++i) {
    c += w(i) * x.segment<3>(3 * i);
    c_bar += w(i) * x_bar.segment<3>(3 * i);
  }
  c /= wsum;
  c_bar /= wsum;

  Mat3 A = Mat3::Zero();
  for (int i = 0; i < 4; ++i) {
    A += w(i) * (x.segment<3>(3 * i) - c) * (x_bar.segment<3>(3 * i) - c_bar).transpose();
  }
  if (!A.allFinite()) fail(ErrorKind::DegenerateStencil, "non-finite stencil covariance");

  Eigen::JacobiSVD<Mat3> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 s = svd.singularValues();
  if (!(s(0) > 0.0) || !(s(1) > 1e-12 * s(0))) {
    fail(ErrorKind::DegenerateStencil, "stencil covariance has rank below 2");
  }
  Mat3 U = svd.matrixU();
  const Mat3& V = svd.matrixV();
  if ((U * V.transpose()).determinant() < 0.0) U.col(2) *= -1.0;

  RigidFit fit;
  fit.R = U * V.transpose();
  fit.t = c - fit.R * c_bar;
  return fit;
}

/// Discrete-shells hinge energy k_b (theta - theta_bar)^2 |e_bar|^2 / A_h.
inline BendEval ds_bending(const Vec12& x, const HingeRest& rest, const Material& mat, bool want_hess,
                           bool project) {
  const Dihedral d = dihedral_with_derivatives(x, want_hess);
  const double k = mat.hinge_stiffness() * rest.edge_len * rest.edge_len / rest.hinge_area();
  const double dtheta = d.theta - rest.theta;

  BendEval out;
  out.theta = d.theta;
  out.energy = k * dtheta * dtheta;
  out.grad = 2.0 * k * dtheta * d.grad;
  if (want_hess) {
    out.hess = 2.0 * k * (d.grad * d.grad.transpose() + dtheta * d.hess);
    if (project) out.hess = project_psd(out.hess);
  }
  return out;
}

/// Rest bending form: the discrete-shells Hessian at the rest stencil, made PSD.
inline Mat12 hinge_rest_hessian(const Vec12& x_bar, double edge_len, double hinge_area, const Material& mat) {
  Dihedral d;
  try {
    d = dihedral_with_derivatives(x_bar, true);
  } catch (const Error& e) {
    fail(ErrorKind::DegenerateStencil, e.what());
  }
  const double k = mat.hinge_stiffness() * edge_len * edge_len / hinge_area;
  // theta == theta_bar here, so the curvature term of the Hessian drops out.
  const Mat12 H = 2.0 * k * d.grad * d.grad.transpose();
  return project_psd(H);
}

namespace detail {

inline Mat12 rotate_blocks(const Mat12& K, const Mat3& R) {
  Mat12 out;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out.block<3, 3>(3 * i, 3 * j) = R * K.block<3, 3>(3 * i, 3 * j) * R.transpose();
  return out;
}

}  // namespace detail

/// Shape-matched frame of a hinge, or `fallback_R` (translation refit by
/// weighted centroids) when the stencil is degenerate and a fallback is given.
inline RigidFit hinge_frame(const Vec12& x, const HingeRest& rest, const std::optional<Mat3>& fallback_R,
                            bool* used_fallback = nullptr) {
  if (used_fallback) *used_fallback = false;
  try {
    return shape_match_rotation(x, rest.positions, rest.weights);
  } catch (const Error&) {
    if (!fallback_R) throw;
  }
  if (used_fallback) *used_fallback = true;
  RigidFit fit;
  fit.R = *fallback_R;
  Vec3 c = Vec3::Zero();
  Vec3 c_bar = Vec3::Zero();
  for (int i = 0; i < 4; ++i) {
    c += rest.weights(i) * x.segment<3>(3 * i);
    c_bar += rest.weights(i) * rest.positions.segment<3>(3 * i);
  }
  fit.t = (c - fit.R * c_bar) / rest.weights.sum();
  return fit;
}

/// E = 1/2 u^T K_bar u with u_i = R^T (x_i - t) - x_bar_i for a given frame.
inline BendEval corotational_bending_in_frame(const Vec12& x, const HingeRest& rest, const RigidFit& frame,
                                              bool want_grad, bool want_hess) {
  BendEval out;
  out.R = frame.R;
  out.t = frame.t;
  for (int i = 0; i < 4; ++i) {
    out.u.segment<3>(3 * i) = out.R.transpose() * (x.segment<3>(3 * i) - out.t) - rest.positions.segment<3>(3 * i);
  }
  const Vec12 Ku = rest.bend_form * out.u;
  out.energy = 0.5 * out.u.dot(Ku);
  if (want_grad) {
    for (int i = 0; i < 4; ++i) out.grad.segment<3>(3 * i) = out.R * Ku.segment<3>(3 * i);
  }
  if (want_hess) out.hess = detail::rotate_blocks(rest.bend_form, out.R);
  return out;
}

/// Corotational hinge bending in the shape-matched frame of x.
///
/// Gradient and Hessian hold R fixed: grad = (I4 (x) R) K_bar u and
/// hess = (I4 (x) R) K_bar (I4 (x) R)^T. With a fallback rotation, a
/// degenerate stencil reuses it.
inline BendEval corotational_bending(const Vec12& x, const HingeRest& rest, bool want_grad, bool want_hess,
                                     const std::optional<Mat3>& fallback_R = std::nullopt) {
  bool fallback = false;
  const RigidFit frame = hinge_frame(x, rest, fallback_R, &fallback);
  BendEval out = corotational_bending_in_frame(x, rest, frame, want_grad, want_hess);
  out.used_fallback_rotation = fallback;
  return out;
}

inline BendEval corotational_bending(const Vec12& x, const HingeRest& rest) {
  return corotational_bending(x, rest, true, true);
}

}  // namespace corotshell
