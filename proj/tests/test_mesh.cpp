#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "corotshell/dihedral.hpp"
#include "corotshell/harness/generators.hpp"
#include "corotshell/mesh.hpp"
#include "corotshell/rest_state.hpp"
#include "support/oracles.hpp"

using namespace corotshell;
namespace t = corotshell::testing;

namespace {

MeshData octahedron() {
  MeshData m;
  m.positions.resize(18);
  m.positions << 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1;
  m.triangles = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4}, {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
  return m;
}

Material unit_material() { return derive_moduli(1.0, 0.3, 0.01, 1.0); }

}  // namespace

TEST(Topology, TwoTrianglesShareOneHinge) {
  const std::vector<Triangle> tris = {{0, 1, 2}, {0, 2, 3}};
  const TriMesh m = build_topology(4, tris);
  EXPECT_EQ(m.edges.size(), 5u);
  ASSERT_EQ(m.hinges.size(), 1u);
  const HingeStencil& h = m.hinges[0];
  EXPECT_EQ(h.v_edge[0], 0);
  EXPECT_EQ(h.v_edge[1], 2);
  EXPECT_EQ(h.v_opp[0], 1);
  EXPECT_EQ(h.v_opp[1], 3);
  EXPECT_EQ(h.tri_pair[0], 0);
  EXPECT_EQ(h.tri_pair[1], 1);
}

TEST(Topology, SingleTriangle) {
  const std::vector<Triangle> tris = {{0, 1, 2}};
  const TriMesh m = build_topology(3, tris);
  EXPECT_EQ(m.edges.size(), 3u);
  EXPECT_TRUE(m.hinges.empty());
}

TEST(Topology, GridEdgeCensusMatchesBruteForce) {
  for (GridPattern p : {GridPattern::Regular, GridPattern::Alternating, GridPattern::Rows}) {
    for (int n = 1; n <= 7; ++n) {
      const MeshData g = make_grid(n, n, 1.0, 1.0, p);
      const TriMesh m = build_topology(g.vertex_count(), g.triangles);
      // Brute force: count every unordered vertex pair that is a triangle side.
      std::map<std::pair<int, int>, int> census;
      for (const Triangle& tri : g.triangles)
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b)
            if (a < b) ++census[{std::min(tri[a], tri[b]), std::max(tri[a], tri[b])}];
      std::size_t interior = 0;
      for (const auto& [e, c] : census) interior += (c == 2);
      EXPECT_EQ(m.edges.size(), census.size());
      EXPECT_EQ(m.hinges.size(), interior);
      EXPECT_EQ(interior, static_cast<std::size_t>(3 * n * n - 2 * n));
    }
  }
}

TEST(Topology, HingeInvariants) {
  const MeshData g = make_equilateral_grid(6, 4, 1.0);
  const TriMesh m = build_topology(g.vertex_count(), g.triangles);
  for (const HingeStencil& h : m.hinges) {
    const auto v = h.vertices();
    EXPECT_EQ(std::set<int>(v.begin(), v.end()).size(), 4u);
    EXPECT_LT(h.v_edge[0], h.v_edge[1]);
    EXPECT_LT(h.tri_pair[0], h.tri_pair[1]);
    for (int k = 0; k < 2; ++k) {
      const Triangle& tri = m.triangles[h.tri_pair[k]];
      int shared = 0;
      for (int x : tri) shared += (x == h.v_edge[0] || x == h.v_edge[1]);
      EXPECT_EQ(shared, 2);
      EXPECT_TRUE(tri[0] == h.v_opp[k] || tri[1] == h.v_opp[k] || tri[2] == h.v_opp[k]);
    }
  }
}

TEST(Topology, Deterministic) {
  const MeshData g = make_grid(5, 3, 2.0, 1.0, GridPattern::Alternating);
  const TriMesh a = build_topology(g.vertex_count(), g.triangles);
  const TriMesh b = build_topology(g.vertex_count(), g.triangles);
  ASSERT_EQ(a.hinges.size(), b.hinges.size());
  for (std::size_t i = 0; i < a.hinges.size(); ++i) {
    EXPECT_EQ(a.hinges[i].vertices(), b.hinges[i].vertices());
    EXPECT_EQ(a.hinges[i].tri_pair, b.hinges[i].tri_pair);
  }
}

TEST(Topology, EulerCharacteristicOfClosedMesh) {
  const MeshData o = octahedron();
  const TriMesh m = build_topology(o.vertex_count(), o.triangles);
  const long V = m.vertex_count, E = static_cast<long>(m.edges.size()), F = static_cast<long>(m.triangles.size());
  EXPECT_EQ(V - E + F, 2);
  EXPECT_EQ(m.hinges.size(), m.edges.size());
}

TEST(Topology, Errors) {
  auto kind_of = [](int n, std::vector<Triangle> tris) {
    try {
      build_topology(n, tris);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::IoError;
  };
  EXPECT_EQ(kind_of(3, {{0, 1, 1}}), ErrorKind::DegenerateTriangle);
  EXPECT_EQ(kind_of(3, {{0, 1, 5}}), ErrorKind::DegenerateTriangle);
  EXPECT_EQ(kind_of(5, {{0, 1, 2}, {1, 0, 3}, {0, 1, 4}}), ErrorKind::NonManifoldEdge);
  EXPECT_EQ(kind_of(4, {{0, 1, 2}, {0, 1, 3}}), ErrorKind::InconsistentOrientation);
  EXPECT_THROW(build_topology(3, std::vector<Triangle>{}), Error);
}

TEST(Dihedral, PlanarIsZero) {
  EXPECT_DOUBLE_EQ(signed_dihedral(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0.3, 1, 0), Vec3(0.6, -0.8, 0)), 0.0);
}

TEST(Dihedral, BookConfiguration) {
  const Vec3 x0(0, 0, 0), x1(1, 0, 0), x2(0.5, 1, 0);
  EXPECT_NEAR(signed_dihedral(x0, x1, x2, Vec3(0.5, 0, 1)), std::numbers::pi / 2, 1e-14);
  EXPECT_NEAR(signed_dihedral(x0, x1, x2, Vec3(0.5, 0, -1)), -std::numbers::pi / 2, 1e-14);
}

TEST(Dihedral, MatchesNormalAngleOracle) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::VectorXd x = t::random_vector(rng, 12);
    const Vec3 x0 = x.segment<3>(0), x1 = x.segment<3>(3), x2 = x.segment<3>(6), x3 = x.segment<3>(9);
    const double oracle = t::normal_angle_dihedral(x0, x1, x2, x3);
    if (std::abs(std::abs(oracle) - std::numbers::pi) < 1e-3 || std::abs(oracle) < 1e-3) continue;
    EXPECT_NEAR(signed_dihedral(x0, x1, x2, x3), oracle, 1e-12);
  }
}

TEST(Dihedral, SignFlipsUnderApexReflection) {
  const Vec3 x0(0, 0, 0), x1(1, 0, 0), x2(0.4, 1, 0);
  const Vec3 x3(0.6, -0.7, 0.3);
  const Vec3 x3_reflected(0.6, -0.7, -0.3);
  EXPECT_NEAR(signed_dihedral(x0, x1, x2, x3), -signed_dihedral(x0, x1, x2, x3_reflected), 1e-15);
}

TEST(Dihedral, RigidInvariance) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::VectorXd x = t::random_vector(rng, 12);
    const Eigen::VectorXd y = t::rigid_transform(x, t::random_rotation(rng), t::random_vector(rng, 3, 5.0));
    EXPECT_LT(std::abs(signed_dihedral(Vec12(x)) - signed_dihedral(Vec12(y))), 1e-10);
  }
}

TEST(Dihedral, DegenerateTriangleRejected) {
  EXPECT_THROW(signed_dihedral(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0), Vec3(0.5, -1, 0)), Error);
}

TEST(RestState, FlatPlateHasZeroRestAngles) {
  const MeshData g = make_grid(4, 3, 1.0, 0.7, GridPattern::Alternating);
  const TriMesh m = build_topology(g.vertex_count(), g.triangles);
  const RestState r = compute_rest_state(m, g.positions, unit_material());
  for (const HingeRest& h : r.hinges) EXPECT_EQ(h.theta, 0.0);
}

TEST(RestState, UnitRightTriangle) {
  const TriangleRest r = triangle_rest(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0));
  EXPECT_DOUBLE_EQ(r.area, 0.5);
  EXPECT_TRUE(r.inv_rest_shape.isApprox(Mat2::Identity(), 1e-15));
  EXPECT_TRUE(r.rest_frame.col(0).isApprox(Vec3(1, 0, 0)));
  EXPECT_TRUE(r.rest_frame.col(1).isApprox(Vec3(0, 1, 0)));
}

TEST(RestState, FrameAndInverseShape) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd x = t::random_vector(rng, 9);
    const Vec3 xi = x.segment<3>(0), xj = x.segment<3>(3), xk = x.segment<3>(6);
    const TriangleRest r = triangle_rest(xi, xj, xk);
    EXPECT_TRUE((r.rest_frame.transpose() * r.rest_frame).isApprox(Mat2::Identity(), 1e-12));
    const Vec3 n = (xj - xi).cross(xk - xi).normalized();
    EXPECT_LT((n.transpose() * r.rest_frame).norm(), 1e-12);
    Mat2 D;
    D.col(0) = r.rest_frame.transpose() * (xj - xi);
    D.col(1) = r.rest_frame.transpose() * (xk - xi);
    EXPECT_LT((r.inv_rest_shape * D - Mat2::Identity()).norm(), 1e-12);
  }
}

TEST(RestState, CylinderRestAnglesMatchChordGeometry) {
  const double radius = 0.8;
  const int n_around = 12;
  const MeshData c = make_cylinder(radius, 2.0, n_around, 5);
  const TriMesh m = build_topology(c.vertex_count(), c.triangles);
  const RestState r = compute_rest_state(m, c.positions, unit_material());
  const double chord = 2.0 * radius * std::sin(std::numbers::pi / n_around);
  const double expected = 2.0 * std::asin(chord / (2.0 * radius));
  int circumferential = 0;
  for (std::size_t i = 0; i < m.hinges.size(); ++i) {
    const Vec3 a = vertex(c.positions, m.hinges[i].v_edge[0]);
    const Vec3 b = vertex(c.positions, m.hinges[i].v_edge[1]);
    const Vec3 dir = (b - a).normalized();
    const Vec12 xs = gather(c.positions, m.hinges[i]);
    const double oracle = t::normal_angle_dihedral(xs.segment<3>(0), xs.segment<3>(3), xs.segment<3>(6), xs.segment<3>(9));
    EXPECT_NEAR(r.hinges[i].theta, oracle, 1e-12);
    if (std::abs(std::abs(dir.x()) - 1.0) < 1e-12) {
      ++circumferential;
      EXPECT_NEAR(std::abs(r.hinges[i].theta), expected, 1e-12);
    } else {
      EXPECT_NEAR(r.hinges[i].theta, 0.0, 1e-12);
    }
  }
  EXPECT_EQ(circumferential, n_around * 5);
}

TEST(RestState, ZeroAreaTriangleReported) {
  MeshData g = make_grid(2, 1, 1.0, 1.0);
  g.positions.segment<3>(3 * 4) = Vec3(0.5, 0.0, 0.0);  // (1,1) onto segment (0,0)-(1,0)
  g.positions.segment<3>(3 * 1) = Vec3(0.25, 0.0, 0.0);
  const TriMesh m = build_topology(g.vertex_count(), g.triangles);
  try {
    compute_rest_state(m, g.positions, unit_material());
    FAIL() << "expected ZeroAreaTriangle";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroAreaTriangle);
    EXPECT_TRUE(e.index().has_value());
  }
}

TEST(RestState, BendFormIsSymmetricPsdAndAnnihilatesRigidModes) {
  const MeshData c = make_cylinder(0.5, 1.0, 8, 3);
  const TriMesh m = build_topology(c.vertex_count(), c.triangles);
  const RestState r = compute_rest_state(m, c.positions, unit_material());
  for (const HingeRest& h : r.hinges) {
    const Mat12& K = h.bend_form;
    EXPECT_LE((K - K.transpose()).norm(), 1e-12 * K.norm());
    EXPECT_GE(t::jacobi_eigenvalues(K).minCoeff(), -1e-10 * K.norm());
    for (int axis = 0; axis < 3; ++axis) {
      Vec12 trans = Vec12::Zero();
      Vec12 rot = Vec12::Zero();
      Vec3 w = Vec3::Zero();
      w(axis) = 1.0;
      for (int i = 0; i < 4; ++i) {
        trans(3 * i + axis) = 1.0;
        rot.segment<3>(3 * i) = w.cross(Vec3(h.positions.segment<3>(3 * i)));
      }
      EXPECT_LE((K * trans).norm(), 1e-8 * K.norm() * trans.norm());
      EXPECT_LE((K * rot).norm(), 1e-8 * K.norm() * rot.norm());
    }
  }
}
