#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "corotshell/elements/bending.hpp"
#include "corotshell/elements/membrane.hpp"
#include "corotshell/errors.hpp"
#include "corotshell/material.hpp"
#include "corotshell/mesh.hpp"
#include "corotshell/types.hpp"

namespace corotshell {

struct RestState {
  std::vector<TriangleRest> triangles;
  std::vector<HingeRest> hinges;
  Positions positions;

  double total_area() const {
    double a = 0.0;
    for (const TriangleRest& t : triangles) a += t.area;
    return a;
  }
};

inline Vec9 gather(const Positions& x, const Triangle& t) {
  Vec9 out;
  for (int k = 0; k < 3; ++k) out.segment<3>(3 * k) = x.segment<3>(3 * t[k]);
  return out;
}

inline Vec12 gather(const Positions& x, const HingeStencil& h) {
  Vec12 out;
  const auto v = h.vertices();
  for (int k = 0; k < 4; ++k) out.segment<3>(3 * k) = x.segment<3>(3 * v[k]);
  return out;
}

/// Rest quantities of one triangle. The first frame axis runs along xj - xi,
/// the second is Gram-Schmidt of xk - xi against it, which makes the rest
/// shape matrix upper triangular.
inline TriangleRest triangle_rest(const Vec3& xi, const Vec3& xj, const Vec3& xk, std::size_t index = 0) {
  const Vec3 e1 = xj - xi;
  const Vec3 e2 = xk - xi;
  const double area = 0.5 * e1.cross(e2).norm();
  const double longest = std::max({e1.norm(), e2.norm(), (xk - xj).norm()});
  if (!std::isfinite(area) || !(area >= 1e-12 * longest * longest) || !(area > 0.0)) {
    fail(ErrorKind::ZeroAreaTriangle, "triangle " + std::to_string(index) + " has (near) zero rest area", index);
  }
  TriangleRest r;
  r.area = area;
  const Vec3 a1 = e1.normalized();
  const Vec3 a2 = (e2 - e2.dot(a1) * a1).normalized();
  r.rest_frame.col(0) = a1;
  r.rest_frame.col(1) = a2;
  Mat2 D;
  D << e1.dot(a1), e2.dot(a1),
       0.0, e2.dot(a2);
  r.inv_rest_shape = D.inverse();
  return r;
}

inline HingeRest hinge_rest(const Vec12& x_bar, double area0, double area1, const Material& mat) {
  HingeRest h;
  h.positions = x_bar;
  h.tri_areas = {area0, area1};
  h.edge_len = (x_bar.segment<3>(3) - x_bar.segment<3>(0)).norm();
  h.heights = {2.0 * area0 / h.edge_len, 2.0 * area1 / h.edge_len};
  h.theta = signed_dihedral(x_bar);
  h.weights << (area0 + area1) / 3.0, (area0 + area1) / 3.0, area0 / 3.0, area1 / 3.0;
  h.bend_form = hinge_rest_hessian(x_bar, h.edge_len, h.hinge_area(), mat);
  return h;
}

inline RestState compute_rest_state(const TriMesh& mesh, const Positions& rest_positions, const Material& mat) {
  if (rest_positions.size() != 3 * mesh.vertex_count) {
    fail(ErrorKind::ZeroAreaTriangle, "rest positions do not match the vertex count");
  }
  if (!rest_positions.allFinite()) fail(ErrorKind::ZeroAreaTriangle, "rest positions are not finite");

  RestState rest;
  rest.positions = rest_positions;
  rest.triangles.reserve(mesh.triangles.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    rest.triangles.push_back(triangle_rest(vertex(rest_positions, tri[0]), vertex(rest_positions, tri[1]),
                                           vertex(rest_positions, tri[2]), t));
  }
  rest.hinges.reserve(mesh.hinges.size());
  for (const HingeStencil& h : mesh.hinges) {
    rest.hinges.push_back(hinge_rest(gather(rest_positions, h), rest.triangles[h.tri_pair[0]].area,
                                     rest.triangles[h.tri_pair[1]].area, mat));
  }
  return rest;
}

/// Area-lumped vertex masses: each triangle gives rho h A / 3 to its corners.
inline Eigen::VectorXd lumped_mass(const TriMesh& mesh, const RestState& rest, const Material& mat) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(mesh.vertex_count);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const double share = mat.density * mat.thickness * rest.triangles[t].area / 3.0;
    for (int v : mesh.triangles[t]) m(v) += share;
  }
  return m;
}

}  // namespace corotshell
