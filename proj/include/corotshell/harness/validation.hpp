#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "corotshell/harness/oracles.hpp"
#include "corotshell/harness/scene.hpp"

namespace corotshell {

// ---------------------------------------------------------------------------
// Benchmark runners. Each builds its scene, solves it and reports raw numbers;
// comparing against analytic values is left to the caller.

struct PlateRun {
  int n = 0;
  double a = 0.0;  // plate size in x
  double b = 0.0;  // plate size in y
  double q = 0.0;  // load per area
  double flexural = 0.0;
  double center_deflection = 0.0;
  NewtonResult newton;
};

/// Simply supported plate on an n-column equilateral mesh (near square, width
/// 1), every boundary vertex pinned, uniform load q from gravity.
inline PlateRun run_ss_plate(int n, BendingModel bending) {
  const double E = 1e7, nu = 0.3, h = 1e-2, rho = 1000.0;
  const Material mat = derive_moduli(E, nu, h, rho);
  PlateRun r;
  r.n = n;
  r.a = 1.0;
  r.flexural = mat.flexural;
  // Center deflection about h / 100: far inside the linear regime.
  r.q = 1e-2 * h * mat.flexural / (0.00406 * std::pow(r.a, 4));

  Scene s;
  s.data = make_equilateral_grid(n, equilateral_rows_for(n), r.a);
  s.mesh = build_topology(s.data.vertex_count(), s.data.triangles);
  s.material = mat;
  s.rest = compute_rest_state(s.mesh, s.data.positions, mat);
  s.mass = lumped_mass(s.mesh, s.rest, mat);
  r.b = s.data.positions(3 * (s.mesh.vertex_count - 1) + 1);
  s.f_ext = gravity_load(s.mass, Vec3(0.0, 0.0, -r.q / (rho * h)));
  s.pins = ConstraintSet::pin_at(s.mesh.boundary_vertices(), s.data.positions);
  const int center = nearest_vertex(s.data.positions, Vec3(0.5 * r.a, 0.5 * r.b, 0.0));

  ElasticObjective elastic(s.model(bending, 1.0));
  StaticPotential<ElasticObjective> potential(elastic, s.f_ext);
  SolverOpts opts;
  opts.newton_tol = std::max(1e-9 * s.f_ext.norm(), roundoff_force_floor(mat, s.rest));
  r.newton = newton_minimize(potential, s.data.positions, s.pins, opts);
  r.center_deflection = -r.newton.x(3 * center + 2);
  return r;
}

struct CantileverRun {
  double length = 1.0;
  double width = 0.125;
  double q = 0.0;
  double flexural = 0.0;
  double tip_deflection = 0.0;  // mean over the free edge
  double newton_tol = 0.0;
  NewtonResult newton;
};

/// Strip along x clamped by pinning its first two vertex columns, uniform
/// load q from gravity, row-alternating grid.
inline CantileverRun run_cantilever(int nx, int ny, BendingModel bending = BendingModel::Corotational) {
  const double E = 1e7, nu = 0.3, h = 1e-2, rho = 1000.0;
  const Material mat = derive_moduli(E, nu, h, rho);
  CantileverRun r;
  r.flexural = mat.flexural;
  r.q = 8.0 * 1e-2 * h * mat.flexural / std::pow(r.length, 4);  // tip deflection about h / 100

  Scene s;
  s.data = make_grid(nx, ny, r.length, r.width, GridPattern::Rows);
  s.mesh = build_topology(s.data.vertex_count(), s.data.triangles);
  s.material = mat;
  s.rest = compute_rest_state(s.mesh, s.data.positions, mat);
  s.mass = lumped_mass(s.mesh, s.rest, mat);
  s.f_ext = gravity_load(s.mass, Vec3(0.0, 0.0, -r.q / (rho * h)));
  std::vector<int> clamp, tip;
  const double ds = r.length / nx;
  for (int v = 0; v < s.mesh.vertex_count; ++v) {
    const double x = s.data.positions(3 * v);
    if (x <= ds * (1.0 + 1e-9)) clamp.push_back(v);
    if (x >= r.length * (1.0 - 1e-12)) tip.push_back(v);
  }
  s.pins = ConstraintSet::pin_at(clamp, s.data.positions);

  ElasticObjective elastic(s.model(bending, 1.0));
  StaticPotential<ElasticObjective> potential(elastic, s.f_ext);
  SolverOpts opts;
  opts.newton_tol = std::max(1e-6 * s.f_ext.norm(), roundoff_force_floor(mat, s.rest));
  r.newton_tol = opts.newton_tol;
  r.newton = newton_minimize(potential, s.data.positions, s.pins, opts);
  for (int v : tip) r.tip_deflection -= r.newton.x(3 * v + 2) / static_cast<double>(tip.size());
  return r;
}

struct DynamicsRun {
  std::vector<Vec3> momentum;          // per step, starting with the initial state
  std::vector<double> total_energy;    // kinetic + elastic
  std::vector<double> step_tolerance;  // allowed energy rise per step from the Newton residual
  int steps = 0;
};

/// Free-floating curved sheet, no external force, random initial velocity.
inline DynamicsRun run_free_floating(int steps, unsigned seed = 7) {
  Scene s;
  s.data = make_cylinder(0.4, 1.0, 12, 6);
  s.mesh = build_topology(s.data.vertex_count(), s.data.triangles);
  s.material = derive_moduli(1e5, 0.3, 1e-2, 1000.0);
  s.rest = compute_rest_state(s.mesh, s.data.positions, s.material);
  s.mass = lumped_mass(s.mesh, s.rest, s.material);
  ElasticObjective elastic(s.model(BendingModel::Corotational, 1.0));

  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SimState st{s.data.positions, Eigen::VectorXd(s.data.positions.size()), 0.0, 0};
  for (Eigen::Index i = 0; i < st.v.size(); ++i) st.v(i) = 0.05 * u(rng);
  for (Eigen::Index i = 0; i < st.v.size() / 3; ++i) st.v(3 * i) += 0.5;  // net drift

  const Eigen::VectorXd dof_mass = expand_to_dofs(s.mass);
  auto momentum = [&](const Eigen::VectorXd& v) {
    Vec3 p = Vec3::Zero();
    for (Eigen::Index i = 0; i < s.mass.size(); ++i) p += s.mass(i) * v.segment<3>(3 * i);
    return p;
  };
  auto total = [&](const SimState& x) { return 0.5 * x.v.dot(dof_mass.cwiseProduct(x.v)) + elastic.energy(x.x); };

  SolverOpts opts;
  opts.newton_tol = 1e-10;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(st.x.size());
  DynamicsRun r;
  r.steps = steps;
  r.momentum.push_back(momentum(st.v));
  r.total_energy.push_back(total(st));
  for (int k = 0; k < steps; ++k) {
    const StepReport step = implicit_euler_step(elastic, st, 1e-2, s.mass, zero, ConstraintSet{}, opts);
    // A residual g in the step equations shifts the energy by at most |g| |dx|.
    r.step_tolerance.push_back(step.newton.gradient_norm * (step.state.x - st.x).norm() + 1e-12 * r.total_energy.back());
    st = step.state;
    r.momentum.push_back(momentum(st.v));
    r.total_energy.push_back(total(st));
  }
  return r;
}

struct BallisticRun {
  double max_velocity_error = 0.0;  // max |v_{n+1} - v_n - dt g|
  double velocity_scale = 0.0;
};

/// Zero-stiffness free mesh under gravity.
inline BallisticRun run_ballistic(int steps) {
  Scene s;
  s.data = make_grid(6, 4, 1.0, 0.6, GridPattern::Alternating);
  s.mesh = build_topology(s.data.vertex_count(), s.data.triangles);
  s.material = derive_moduli(1e6, 0.3, 1e-2, 1000.0);
  s.rest = compute_rest_state(s.mesh, s.data.positions, s.material);
  s.mass = lumped_mass(s.mesh, s.rest, s.material);
  const Vec3 g(0.3, -0.2, -9.81);
  const double dt = 1e-2;
  ElasticObjective elastic(s.model(BendingModel::Corotational, 0.0));
  SimState st{s.data.positions, Eigen::VectorXd::Zero(s.data.positions.size()), 0.0, 0};
  for (Eigen::Index i = 0; i < st.v.size() / 3; ++i) st.v.segment<3>(3 * i) = Vec3(1.0, 0.5 * (i % 3), -0.25);
  const Eigen::VectorXd f = gravity_load(s.mass, g);
  BallisticRun r;
  for (int k = 0; k < steps; ++k) {
    const SimState next = implicit_euler_step(elastic, st, dt, s.mass, f, ConstraintSet{}, SolverOpts{}).state;
    for (Eigen::Index i = 0; i < st.v.size() / 3; ++i) {
      const Vec3 expected = st.v.segment<3>(3 * i) + dt * g;
      r.max_velocity_error = std::max(r.max_velocity_error, (next.v.segment<3>(3 * i) - expected).norm());
      r.velocity_scale = std::max(r.velocity_scale, expected.norm());
    }
    st = next;
  }
  return r;
}

struct RollRun {
  std::vector<double> tip_angle_deg;
  std::vector<double> membrane;
  std::vector<double> bending;
  bool all_converged = true;
};

/// Rolls a strip into a circular arc: the first two and last two vertex
/// columns are pinned on the arc of curvature phi / L, phi raised in
/// increments up to `final_deg`; everything else is solved quasi-statically.
inline RollRun run_roll(int nx, int ny, double final_deg, int increments, BendingModel bending = BendingModel::Corotational) {
  const double L = 1.0, W = L * ny / nx;
  Scene s;
  s.data = make_grid(nx, ny, L, W, GridPattern::Rows);
  s.mesh = build_topology(s.data.vertex_count(), s.data.triangles);
  s.material = derive_moduli(1e7, 0.3, 1e-2, 1000.0);
  s.rest = compute_rest_state(s.mesh, s.data.positions, s.material);
  ElasticObjective elastic(s.model(bending, 1.0));

  const double ds = L / nx;
  std::vector<int> ends;
  for (int v = 0; v < s.mesh.vertex_count; ++v) {
    const double x = s.data.positions(3 * v);
    if (x <= ds * (1.0 + 1e-9) || x >= L - ds * (1.0 + 1e-9)) ends.push_back(v);
  }
  auto on_arc = [&](const Vec3& p, double kappa) -> Vec3 {
    if (kappa == 0.0) return p;
    return Vec3(std::sin(kappa * p.x()) / kappa, p.y(), (1.0 - std::cos(kappa * p.x())) / kappa);
  };

  SolverOpts opts;
  opts.newton_tol = 1e-8 * s.material.youngs * s.material.thickness * std::sqrt(L * W);
  opts.max_newton = 200;
  Positions x = s.data.positions;
  RollRun r;
  for (int k = 1; k <= increments; ++k) {
    const double phi = final_deg * std::numbers::pi / 180.0 * k / increments;
    const double kappa = phi / L;
    ConstraintSet pins;
    for (int v : ends) {
      pins.pinned.push_back(v);
      pins.targets.push_back(on_arc(vertex(s.data.positions, v), kappa));
    }
    const NewtonResult n = newton_minimize(elastic, x, pins, opts);
    r.all_converged = r.all_converged && n.converged;
    x = n.x;
    const EnergyBreakdown e = elastic.energy_terms(x);
    r.tip_angle_deg.push_back(phi * 180.0 / std::numbers::pi);
    r.membrane.push_back(e.membrane);
    r.bending.push_back(e.bending);
  }
  return r;
}

/// Small dynamic cantilever scene used for the reproducibility check.
inline std::string determinism_scene_text(const std::filesystem::path& out_dir) {
  return "mesh.kind = strip\n"
         "mesh.nx = 16\n"
         "mesh.ny = 2\n"
         "material.youngs = 1e5\n"
         "material.thickness = 1e-2\n"
         "load.gravity = 0 0 -9.81\n"
         "pin.box = -1 -1 -1 0.07 1 1\n"
         "sim.mode = dynamic\n"
         "sim.dt = 0.01\n"
         "sim.frames = 20\n"
         "output.dir = " +
         out_dir.string() + "\n";
}

// ---------------------------------------------------------------------------
// Checks for the `validate` command.

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

namespace validation_detail {

inline Eigen::VectorXd central_gradient(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x,
                                        double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x(i);
    x(i) = xi + h;
    const double fp = f(x);
    x(i) = xi - h;
    const double fm = f(x);
    x(i) = xi;
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline Eigen::MatrixXd central_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                                        Eigen::VectorXd x, double h) {
  Eigen::MatrixXd J(x.size(), x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x(i);
    x(i) = xi + h;
    const Eigen::VectorXd fp = f(x);
    x(i) = xi - h;
    const Eigen::VectorXd fm = f(x);
    x(i) = xi;
    J.col(i) = (fp - fm) / (2.0 * h);
  }
  return J;
}

inline double relative(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double d = std::max(a.norm(), b.norm());
  return d > 0.0 ? (a - b).norm() / d : 0.0;
}

inline Mat3 random_rotation(std::mt19937& rng) {
  std::normal_distribution<double> n;
  return Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized().toRotationMatrix();
}

inline Eigen::VectorXd random_vector(std::mt19937& rng, Eigen::Index n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

inline Eigen::VectorXd rigid(const Eigen::VectorXd& x, const Mat3& R, const Vec3& t) {
  Eigen::VectorXd y(x.size());
  for (Eigen::Index i = 0; i < x.size() / 3; ++i) y.segment<3>(3 * i) = R * x.segment<3>(3 * i) + t;
  return y;
}

/// Random triangle with area bounded away from zero.
inline Vec9 random_triangle(std::mt19937& rng) {
  for (;;) {
    const Vec9 x = random_vector(rng, 9, 1.0);
    if ((x.segment<3>(3) - x.segment<3>(0)).cross(x.segment<3>(6) - x.segment<3>(0)).norm() > 0.2) return x;
  }
}

/// Random hinge stencil with well-shaped triangles and a random fold.
inline Vec12 random_stencil(std::mt19937& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double fold = 2.0 * u(rng);
  Vec12 x;
  x << 0, 0, 0, 1, 0, 0, 0.5 + 0.3 * u(rng), 0.8 + 0.2 * u(rng), 0.1 * u(rng), 0.5 + 0.3 * u(rng),
      -0.8 * std::cos(fold), -0.8 * std::sin(fold);
  return rigid(x, random_rotation(rng), random_vector(rng, 3, 1.0));
}

inline HingeRest stencil_rest(const Vec12& x, const Material& mat) {
  auto area = [&](int a, int b, int c) {
    return 0.5 * (x.segment<3>(3 * b) - x.segment<3>(3 * a)).cross(x.segment<3>(3 * c) - x.segment<3>(3 * a)).norm();
  };
  return hinge_rest(x, area(0, 1, 2), area(0, 3, 1), mat);
}

inline std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

}  // namespace validation_detail

inline CheckResult check_derivatives() {
  using namespace validation_detail;
  std::mt19937 rng(101);
  const Material mat = derive_moduli(2.0, 0.3, 0.1, 1.0);
  double worst_g = 0.0, worst_h = 0.0;
  for (int i = 0; i < 100; ++i) {
    // membrane
    const Vec9 tx = random_triangle(rng);
    const TriangleRest tr = triangle_rest(tx.segment<3>(0), tx.segment<3>(3), tx.segment<3>(6));
    const Vec9 x9 = tx + random_vector(rng, 9, 0.3);
    const MembraneEval me = membrane_eval(x9, tr, mat, true, true, false);
    worst_g = std::max(worst_g, relative(me.grad, central_gradient([&](const Eigen::VectorXd& y) {
                                           return membrane_eval(Vec9(y), tr, mat, false, false, false).energy;
                                         }, x9, 1e-5)));
    worst_h = std::max(worst_h, relative(me.hess, central_jacobian([&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
                                           return membrane_eval(Vec9(y), tr, mat, true, false, false).grad;
                                         }, x9, 1e-5)));
    // bending stencils
    const Vec12 xb = random_stencil(rng);
    const HingeRest hr = stencil_rest(xb, mat);
    const Vec12 x12 = xb + random_vector(rng, 12, 0.2);
    const BendEval ds = ds_bending(x12, hr, mat, true, false);
    worst_g = std::max(worst_g, relative(ds.grad, central_gradient([&](const Eigen::VectorXd& y) {
                                           return ds_bending(Vec12(y), hr, mat, false, false).energy;
                                         }, x12, 1e-6)));
    worst_h = std::max(worst_h, relative(ds.hess, central_jacobian([&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
                                           return ds_bending(Vec12(y), hr, mat, false, false).grad;
                                         }, x12, 1e-6)));
    const BendEval cb = corotational_bending(x12, hr);
    const RigidFit frame{cb.R, cb.t};
    worst_g = std::max(worst_g, relative(cb.grad, central_gradient([&](const Eigen::VectorXd& y) {
                                           return corotational_bending_in_frame(Vec12(y), hr, frame, false, false).energy;
                                         }, x12, 1e-5)));
    worst_h = std::max(worst_h, relative(cb.hess, central_jacobian([&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
                                           return corotational_bending_in_frame(Vec12(y), hr, frame, true, false).grad;
                                         }, x12, 1e-5)));
  }
  CheckResult r;
  r.name = "derivatives";
  r.passed = worst_g < 1e-6 && worst_h < 1e-5;
  r.detail = fmt("worst gradient rel err %.2e (< 1e-6), worst hessian rel err %.2e (< 1e-5)", worst_g, worst_h);
  return r;
}

inline CheckResult check_rigid_invariance() {
  using namespace validation_detail;
  std::mt19937 rng(202);
  const Material mat = derive_moduli(2.0, 0.3, 0.1, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Mat3 Q = random_rotation(rng);
    const Vec3 t = random_vector(rng, 3, 5.0);
    const Vec9 tx = random_triangle(rng);
    const TriangleRest tr = triangle_rest(tx.segment<3>(0), tx.segment<3>(3), tx.segment<3>(6));
    const Vec9 x9 = tx + random_vector(rng, 9, 0.3);
    const double em = membrane_eval(x9, tr, mat, false, false, false).energy;
    worst = std::max(worst, std::abs(membrane_eval(rigid(x9, Q, t), tr, mat, false, false, false).energy - em) / (1.0 + em));
    const Vec12 xb = random_stencil(rng);
    const HingeRest hr = stencil_rest(xb, mat);
    const Vec12 x12 = xb + random_vector(rng, 12, 0.2);
    const Vec12 y12 = rigid(x12, Q, t);
    const double ec = corotational_bending(x12, hr, false, false).energy;
    const double ed = ds_bending(x12, hr, mat, false, false).energy;
    worst = std::max(worst, std::abs(corotational_bending(y12, hr, false, false).energy - ec) / (1.0 + ec));
    worst = std::max(worst, std::abs(ds_bending(y12, hr, mat, false, false).energy - ed) / (1.0 + ed));
  }

  const MeshData cyl = make_cylinder(0.4, 1.0, 10, 5);
  const TriMesh mesh = build_topology(cyl.vertex_count(), cyl.triangles);
  const Material shell = derive_moduli(1e6, 0.3, 1e-2, 1000.0);
  const RestState rest = compute_rest_state(mesh, cyl.positions, shell);
  const double stiffness = shell.youngs * shell.thickness;
  double worst_grad = 0.0;
  for (BendingModel b : {BendingModel::Corotational, BendingModel::DiscreteShells}) {
    ElasticModel m;
    m.mesh = &mesh;
    m.rest = &rest;
    m.material = &shell;
    m.bending = b;
    for (int i = 0; i < 50; ++i) {
      const Positions y = rigid(cyl.positions, random_rotation(rng), random_vector(rng, 3, 5.0));
      worst_grad = std::max(worst_grad, assemble_gradient(y, m).norm() / stiffness);
    }
  }
  CheckResult r;
  r.name = "rigid_invariance";
  r.passed = worst < 1e-10 && worst_grad < 1e-10;
  r.detail = fmt("worst energy change %.2e (< 1e-10 (1+|E|)), worst rest gradient %.2e (< 1e-10 E h)", worst, worst_grad);
  return r;
}

inline CheckResult check_psd() {
  using namespace validation_detail;
  std::mt19937 rng(303);
  const Material mat = derive_moduli(2.0, 0.3, 0.1, 1.0);
  double worst = 0.0;
  auto score = [&](const Eigen::MatrixXd& H) {
    const double n = H.norm();
    if (n == 0.0) return;
    const double lo = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    worst = std::max(worst, -lo / n);
  };
  for (int count = 0; count < 1000; ++count) {
    if (count % 3 == 0) {
      const Vec9 tx = random_triangle(rng);
      const TriangleRest tr = triangle_rest(tx.segment<3>(0), tx.segment<3>(3), tx.segment<3>(6));
      score(membrane_eval(tx + random_vector(rng, 9, 0.6), tr, mat, false, true, true).hess);
      continue;
    }
    const Vec12 xb = random_stencil(rng);
    const HingeRest hr = stencil_rest(xb, mat);
    const Vec12 x12 = xb + random_vector(rng, 12, 0.4);
    score(count % 3 == 1 ? ds_bending(x12, hr, mat, true, true).hess : corotational_bending(x12, hr, false, true).hess);
  }
  CheckResult r;
  r.name = "psd";
  r.passed = worst <= 1e-10;
  r.detail = fmt("1000 projected hessians, worst -min_eig/|H| %.2e (<= 1e-10)", worst);
  return r;
}

inline CheckResult check_ss_plate() {
  using namespace validation_detail;
  std::ostringstream detail;
  bool ok = true;
  for (BendingModel b : {BendingModel::Corotational, BendingModel::DiscreteShells}) {
    double prev = 1e300;
    detail << (b == BendingModel::Corotational ? "corot" : "discrete_shells") << ":";
    for (int n : {16, 32, 64}) {
      const PlateRun p = run_ss_plate(n, b);
      const double oracle = navier_plate_deflection(p.q, p.a, p.b, p.flexural, 99);
      const double err = std::abs(p.center_deflection - oracle) / oracle;
      detail << fmt(" n=%.0f err=%.2f%%", n, 100.0 * err);
      ok = ok && p.newton.converged && err < prev && p.center_deflection < 0.01 * p.a;
      if (n == 64) ok = ok && err < 0.05;
      prev = err;
    }
    detail << "; ";
  }
  CheckResult r;
  r.name = "ss_plate";
  r.passed = ok;
  r.detail = detail.str() + "need < 5% at n=64, decreasing";
  return r;
}

inline CheckResult check_cantilever() {
  using namespace validation_detail;
  const CantileverRun c = run_cantilever(64, 8);
  const double oracle = cantilever_deflection(c.q, c.length, c.flexural);
  const double err = std::abs(c.tip_deflection - oracle) / oracle;
  CheckResult r;
  r.name = "cantilever";
  r.passed = c.newton.converged && err < 0.05;
  r.detail = fmt("tip %.6e vs q L^4/(8 D) %.6e, err %.2f%% (< 5%%)", c.tip_deflection, oracle, 100.0 * err);
  return r;
}

inline CheckResult check_dynamics() {
  using namespace validation_detail;
  const DynamicsRun d = run_free_floating(100);
  double worst_p = 0.0, worst_rise = 0.0;
  bool energy_ok = true;
  const double p0 = d.momentum.front().norm();
  for (int k = 0; k < d.steps; ++k) {
    worst_p = std::max(worst_p, (d.momentum[k + 1] - d.momentum[k]).norm() / p0);
    const double rise = d.total_energy[k + 1] - d.total_energy[k];
    worst_rise = std::max(worst_rise, rise);
    energy_ok = energy_ok && rise <= d.step_tolerance[k];
  }
  const BallisticRun b = run_ballistic(100);
  const double ballistic = b.max_velocity_error / b.velocity_scale;
  CheckResult r;
  r.name = "dynamics";
  r.passed = worst_p <= 1e-8 && energy_ok && ballistic <= 1e-12;
  r.detail = fmt("momentum drift/step %.2e (<= 1e-8), largest energy rise %.2e, ballistic rel err %.2e", worst_p,
                 worst_rise, ballistic);
  return r;
}

inline CheckResult check_newton() {
  using namespace validation_detail;
  // 1/2 x^T A x - b^T x with a fixed SPD A.
  struct Quadratic {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    double energy(const Positions& x) const { return 0.5 * x.dot(A * x) - b.dot(x); }
    Eigen::VectorXd gradient(const Positions& x) const { return A * x - b; }
    TripletMatrix hessian(const Positions&, bool) const {
      TripletMatrix H(static_cast<int>(A.rows()));
      for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j) H.add(i, j, A(i, j));
      return H;
    }
  };
  std::mt19937 rng(404);
  const Eigen::MatrixXd M = Eigen::Map<const Eigen::MatrixXd>(random_vector(rng, 144, 1.0).data(), 12, 12);
  Quadratic q{M * M.transpose() + 12.0 * Eigen::MatrixXd::Identity(12, 12), random_vector(rng, 12, 1.0)};
  SolverOpts opts;
  opts.newton_tol = 1e-10;
  const NewtonResult nq = newton_minimize(q, random_vector(rng, 12, 1.0), ConstraintSet{}, opts);

  const CantileverRun c = run_cantilever(64, 8);
  bool monotone = true;
  for (std::size_t i = 1; i < c.newton.energies.size(); ++i) {
    const double prev = c.newton.energies[i - 1];
    monotone = monotone && c.newton.energies[i] <= prev + 16.0 * std::numeric_limits<double>::epsilon() * std::abs(prev);
  }
  CheckResult r;
  r.name = "newton";
  r.passed = nq.iterations == 1 && nq.converged && monotone && c.newton.gradient_norm <= c.newton_tol;
  r.detail = fmt("quadratic iterations %.0f (== 1); cantilever grad %.2e (<= %.2e)", nq.iterations, c.newton.gradient_norm,
                 c.newton_tol) +
             (monotone ? ", energy monotone" : ", energy NOT monotone");
  return r;
}

inline CheckResult check_large_rotation() {
  using namespace validation_detail;
  const RollRun roll = run_roll(64, 8, 90.0, 18);
  double worst = 0.0;
  for (std::size_t i = 0; i < roll.membrane.size(); ++i) worst = std::max(worst, roll.membrane[i] / roll.bending[i]);
  CheckResult r;
  r.name = "large_rotation";
  r.passed = roll.all_converged && roll.tip_angle_deg.back() >= 90.0 && worst < 0.01;
  r.detail = fmt("tip rotation %.0f deg, worst membrane/bending %.2e (< 1e-2)", roll.tip_angle_deg.back(), worst);
  return r;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline CheckResult check_determinism() {
  const auto base = std::filesystem::temp_directory_path() / ("corotshell_det_" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  std::string csv[2];
  for (int run = 0; run < 2; ++run) {
    const auto dir = base / ("run" + std::to_string(run));
    const SceneConfig c = parse_scene_config(determinism_scene_text(dir));
    csv[run] = read_file(run_scene(c).metrics_path);
  }
  std::error_code ec;
  std::filesystem::remove_all(base, ec);
  CheckResult r;
  r.name = "determinism";
  r.passed = !csv[0].empty() && csv[0] == csv[1];
  r.detail = r.passed ? "metrics identical across two runs" : "metrics differ between runs";
  return r;
}

struct NamedCheck {
  const char* name;
  CheckResult (*run)();
};

inline const std::vector<NamedCheck>& validation_checks() {
  static const std::vector<NamedCheck> checks = {
      {"derivatives", check_derivatives}, {"rigid_invariance", check_rigid_invariance},
      {"psd", check_psd},                 {"ss_plate", check_ss_plate},
      {"cantilever", check_cantilever},   {"dynamics", check_dynamics},
      {"newton", check_newton},           {"large_rotation", check_large_rotation},
      {"determinism", check_determinism},
  };
  return checks;
}

/// Runs every check whose name contains `filter` (all when empty). A check
/// that throws counts as failed.
inline std::vector<CheckResult> run_validation(const std::string& filter,
                                               const std::function<void(const CheckResult&)>& on_result = {}) {
  std::vector<CheckResult> out;
  for (const NamedCheck& c : validation_checks()) {
    if (!filter.empty() && std::string(c.name).find(filter) == std::string::npos) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r.name = c.name;
      r.passed = false;
      r.detail = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_result) on_result(r);
    out.push_back(r);
  }
  return out;
}

}  // namespace corotshell
