#include <gtest/gtest.h>

#include <random>

#include "corotshell/harness/generators.hpp"
#include "corotshell/material.hpp"
#include "corotshell/mesh.hpp"
#include "corotshell/rest_state.hpp"
#include "support/oracles.hpp"

using namespace corotshell;

TEST(Material, NuZeroClosedForm) {
  const Material m = derive_moduli(1.0, 0.0, 1.0, 1.0);
  EXPECT_DOUBLE_EQ(m.mu, 0.5);
  EXPECT_DOUBLE_EQ(m.lambda_ps, 0.0);
  EXPECT_DOUBLE_EQ(m.flexural, 1.0 / 12.0);
}

TEST(Material, FlexuralRigidity) {
  const Material m = derive_moduli(1e6, 0.3, 1e-3, 1000.0);
  const double expected = 1e6 * 1e-9 / (12.0 * 0.91);
  EXPECT_NEAR(m.flexural, expected, 1e-15 * expected);
  EXPECT_NEAR(m.flexural, 9.1575e-5, 1e-8);
}

TEST(Material, RangeChecks) {
  auto kind = [](double E, double nu, double h, double rho) {
    try {
      derive_moduli(E, nu, h, rho);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::IoError;
  };
  EXPECT_EQ(kind(1.0, 0.5, 1.0, 1.0), ErrorKind::OutOfRangeParameter);
  EXPECT_EQ(kind(1.0, -1.0, 1.0, 1.0), ErrorKind::OutOfRangeParameter);
  EXPECT_EQ(kind(0.0, 0.3, 1.0, 1.0), ErrorKind::OutOfRangeParameter);
  EXPECT_EQ(kind(1.0, 0.3, -1.0, 1.0), ErrorKind::OutOfRangeParameter);
  EXPECT_EQ(kind(1.0, 0.3, 1.0, 0.0), ErrorKind::OutOfRangeParameter);
  EXPECT_THROW(derive_moduli(1.0, 0.3, 1.0, 1.0, -1.0), Error);
}

TEST(Material, ModuliRoundTrip) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> E(1e2, 1e9), nu(-0.9, 0.49);
  for (int i = 0; i < 200; ++i) {
    const double e = E(rng), n = nu(rng);
    const Material m = derive_moduli(e, n, 0.01, 1.0);
    // Invert mu = E/(2(1+nu)), lambda = E nu/(1-nu^2): lambda/mu = 2 nu/(1-nu).
    const double r = m.lambda_ps / m.mu;
    const double nu_back = r / (2.0 + r);
    const double e_back = 2.0 * m.mu * (1.0 + nu_back);
    EXPECT_NEAR(nu_back, n, 1e-12 * std::max(1.0, std::abs(n)));
    EXPECT_NEAR(e_back, e, 1e-12 * e);
  }
}

TEST(Material, HingeStiffnessScales) {
  const Material a = derive_moduli(2.0, 0.25, 0.1, 1.0, 1.0);
  const Material b = derive_moduli(2.0, 0.25, 0.1, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(a.hinge_stiffness(), a.flexural);
  EXPECT_DOUBLE_EQ(b.hinge_stiffness(), 0.5 * a.flexural);
}

TEST(LumpedMass, SingleTriangle) {
  Positions x(9);
  x << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  const std::vector<Triangle> tris = {{0, 1, 2}};
  const TriMesh mesh = build_topology(3, tris);
  const Material mat = derive_moduli(1.0, 0.3, 1.0, 1.0);
  const RestState rest = compute_rest_state(mesh, x, mat);
  const Eigen::VectorXd m = lumped_mass(mesh, rest, mat);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(m(i), 1.0 / 6.0, 1e-15);
}

TEST(LumpedMass, SquareSharedEdgeVerticesCarryDouble) {
  Positions x(12);
  x << 0, 0, 0, 1, 0, 0, 1, 1, 0, 0, 1, 0;
  const std::vector<Triangle> tris = {{0, 1, 2}, {0, 2, 3}};
  const TriMesh mesh = build_topology(4, tris);
  const Material mat = derive_moduli(1.0, 0.3, 1.0, 1.0);
  const Eigen::VectorXd m = lumped_mass(mesh, compute_rest_state(mesh, x, mat), mat);
  EXPECT_NEAR(m(0), 2.0 * m(1), 1e-15);
  EXPECT_NEAR(m(2), 2.0 * m(3), 1e-15);
}

TEST(LumpedMass, TotalMatchesIndependentAreaSum) {
  std::mt19937 rng(9);
  MeshData g = make_grid(7, 5, 1.3, 0.9, GridPattern::Alternating);
  g.positions += corotshell::testing::random_vector(rng, g.positions.size(), 0.03);
  const TriMesh mesh = build_topology(g.vertex_count(), g.triangles);
  const Material mat = derive_moduli(3.0, 0.2, 0.02, 750.0);
  const Eigen::VectorXd m = lumped_mass(mesh, compute_rest_state(mesh, g.positions, mat), mat);
  double area = 0.0;
  for (const Triangle& t : g.triangles) {
    const Vec3 a = vertex(g.positions, t[0]), b = vertex(g.positions, t[1]), c = vertex(g.positions, t[2]);
    area += 0.5 * (b - a).cross(c - a).norm();
  }
  const double expected = mat.density * mat.thickness * area;
  EXPECT_NEAR(m.sum(), expected, 1e-12 * expected);
  EXPECT_GT(m.minCoeff(), 0.0);
}
