#pragma once

#include <cstdio>
#include <filesystem>
#include <memory>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "corotshell/harness/config.hpp"
#include "corotshell/harness/generators.hpp"
#include "corotshell/harness/obj_io.hpp"
#include "corotshell/solver/implicit_euler.hpp"

namespace corotshell {

inline MeshData make_mesh(const MeshSpec& m) {
  switch (m.kind) {
    case MeshKind::Grid:
    case MeshKind::Strip:
      return make_grid(m.nx, m.ny, m.lx, m.ly, m.pattern);
    case MeshKind::TriGrid:
      return make_equilateral_grid(m.nx, m.ny, m.lx);
    case MeshKind::Cylinder:
      return make_cylinder(m.radius, m.length, m.around, m.along);
    case MeshKind::Obj:
      return load_obj(m.path);
  }
  fail(ErrorKind::ConfigError, "unhandled mesh kind");
}

/// Closest vertex to p; ties go to the lowest index.
inline int nearest_vertex(const Positions& x, const Vec3& p) {
  int best = -1;
  double best_d = 0.0;
  for (Eigen::Index i = 0; i < x.size() / 3; ++i) {
    const double d = (x.segment<3>(3 * i) - p).squaredNorm();
    if (best < 0 || d < best_d) {
      best = static_cast<int>(i);
      best_d = d;
    }
  }
  return best;
}

inline Eigen::VectorXd gravity_load(const Eigen::VectorXd& vertex_mass, const Vec3& g) {
  Eigen::VectorXd f(3 * vertex_mass.size());
  for (Eigen::Index i = 0; i < vertex_mass.size(); ++i) f.segment<3>(3 * i) = vertex_mass(i) * g;
  return f;
}

/// Everything derived from a SceneConfig before time stepping.
struct Scene {
  MeshData data;
  TriMesh mesh;
  Material material;
  RestState rest;
  Eigen::VectorXd mass;
  ConstraintSet pins;
  int probe = 0;
  Eigen::VectorXd f_ext;

  ElasticModel model(BendingModel bending, double scale) const {
    ElasticModel m;
    m.mesh = &mesh;
    m.rest = &rest;
    m.material = &material;
    m.bending = bending;
    m.scale = scale;
    return m;
  }
};

inline std::unique_ptr<Scene> build_scene(const SceneConfig& c) {
  auto s = std::make_unique<Scene>();
  s->data = make_mesh(c.mesh);
  s->mesh = build_topology(s->data.vertex_count(), s->data.triangles);
  s->material = derive_moduli(c.youngs, c.poisson, c.thickness, c.density, c.bend_scale);
  s->rest = compute_rest_state(s->mesh, s->data.positions, s->material);
  s->mass = lumped_mass(s->mesh, s->rest, s->material);
  s->f_ext = gravity_load(s->mass, c.gravity);

  std::vector<char> pinned(static_cast<std::size_t>(s->mesh.vertex_count), 0);
  for (int v : c.pin_indices) {
    if (v >= s->mesh.vertex_count) fail(ErrorKind::ConfigError, "pin index " + std::to_string(v) + " out of range");
    pinned[static_cast<std::size_t>(v)] = 1;
  }
  for (int v = 0; v < s->mesh.vertex_count; ++v) {
    for (const PinBox& b : c.pin_boxes)
      if (b.contains(vertex(s->data.positions, v))) pinned[static_cast<std::size_t>(v)] = 1;
  }
  std::vector<int> list;
  for (int v = 0; v < s->mesh.vertex_count; ++v)
    if (pinned[static_cast<std::size_t>(v)]) list.push_back(v);
  s->pins = ConstraintSet::pin_at(list, s->data.positions);

  if (c.probe) {
    s->probe = nearest_vertex(s->data.positions, *c.probe);
  } else {
    const Eigen::Map<const Eigen::Matrix3Xd> pts(s->data.positions.data(), 3, s->mesh.vertex_count);
    s->probe = nearest_vertex(s->data.positions, 0.5 * (pts.rowwise().minCoeff() + pts.rowwise().maxCoeff()));
  }
  return s;
}

struct MetricsRow {
  int step = 0;
  double time = 0.0;
  double total_energy = 0.0;  // membrane + bending
  double membrane_energy = 0.0;
  double bending_energy = 0.0;
  double grad_norm = 0.0;
  int newton_iters = 0;
  int ls_steps = 0;
  double max_deflection = 0.0;  // largest vertex displacement norm
  double probe_disp = 0.0;      // displacement norm of the probe vertex
};

inline const char* metrics_header() {
  return "step,time,total_energy,membrane_energy,bending_energy,grad_norm,newton_iters,ls_steps,max_deflection,"
         "probe_disp";
}

inline std::string format_row(const MetricsRow& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%.17g,%.17g", r.step, r.time, r.total_energy,
                r.membrane_energy, r.bending_energy, r.grad_norm, r.newton_iters, r.ls_steps, r.max_deflection,
                r.probe_disp);
  return buf;
}

struct SceneReport {
  std::vector<MetricsRow> rows;
  int frames_written = 0;
  std::filesystem::path metrics_path;
  bool converged = true;  // every Newton solve met its tolerance (or ran in fixed mode)
  Positions final_positions;
  double newton_tol = 0.0;
};

/// Smallest gradient norm the assembled forces can resolve: internal forces
/// carry round-off of order eps E h sqrt(area).
inline double roundoff_force_floor(const Material& mat, const RestState& rest) {
  double area = 0.0;
  for (const TriangleRest& t : rest.triangles) area += t.area;
  return 100.0 * std::numeric_limits<double>::epsilon() * mat.youngs * mat.thickness * std::sqrt(area);
}

/// Absolute Newton tolerance: explicit, or rtol times the characteristic force
/// |f_ext| (E h sqrt(area) when there is no load), never below the round-off
/// floor.
inline double newton_tolerance(const SceneConfig& c, const Scene& s) {
  if (c.newton_tol) return *c.newton_tol;
  double scale = s.f_ext.norm();
  if (!(scale > 0.0)) {
    double area = 0.0;
    for (const TriangleRest& t : s.rest.triangles) area += t.area;
    scale = c.youngs * c.thickness * std::sqrt(area);
  }
  return std::max(c.newton_rtol * scale, roundoff_force_floor(s.material, s.rest));
}

/// Runs a scene and writes metrics.csv plus frame_NNNN.obj into the output
/// directory. Warnings (iteration caps) go to `log` as JSON lines.
inline SceneReport run_scene(const SceneConfig& c, std::ostream* log = nullptr) {
  const auto scene = build_scene(c);
  const Scene& s = *scene;
  ElasticObjective elastic(s.model(c.bending, c.elastic_scale));
  SolverOpts opts = c.solver;
  opts.newton_tol = newton_tolerance(c, s);

  SceneReport report;
  report.newton_tol = opts.newton_tol;
  std::error_code ec;
  std::filesystem::create_directories(c.output_dir, ec);
  if (ec) fail(ErrorKind::IoError, "cannot create '" + c.output_dir.string() + "': " + ec.message());
  report.metrics_path = c.output_dir / "metrics.csv";
  std::ofstream csv(report.metrics_path);
  if (!csv) fail(ErrorKind::IoError, "cannot write '" + report.metrics_path.string() + "'");
  csv << metrics_header() << '\n';

  const Positions& X = s.rest.positions;
  auto measure = [&](int step, double time, const Positions& x, const NewtonResult* n) {
    MetricsRow r;
    r.step = step;
    r.time = time;
    const EnergyBreakdown e = elastic.energy_terms(x);
    r.membrane_energy = e.membrane;
    r.bending_energy = e.bending;
    r.total_energy = e.total();
    if (n) {
      r.grad_norm = n->gradient_norm;
      r.newton_iters = n->iterations;
      r.ls_steps = n->line_search_steps;
      if (n->hit_iteration_cap) {
        report.converged = false;
        if (log) {
          *log << "{\"warning\":\"newton iteration cap\",\"step\":" << step << ",\"grad_norm\":" << n->gradient_norm
               << ",\"tolerance\":" << opts.newton_tol << "}\n";
        }
      }
    }
    for (Eigen::Index i = 0; i < x.size() / 3; ++i) {
      r.max_deflection = std::max(r.max_deflection, (x.segment<3>(3 * i) - X.segment<3>(3 * i)).norm());
    }
    r.probe_disp = (x.segment<3>(3 * s.probe) - X.segment<3>(3 * s.probe)).norm();
    report.rows.push_back(r);
    csv << format_row(r) << '\n';
  };
  auto write_frame = [&](int index, const Positions& x) {
    if (!c.write_frames) return;
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04d.obj", index);
    save_obj(c.output_dir / name, x, s.data.triangles);
    ++report.frames_written;
  };

  if (c.mode == SimMode::Quasistatic) {
    Positions x = X;
    for (int k = 1; k <= c.load_steps; ++k) {
      const double fraction = static_cast<double>(k) / c.load_steps;
      StaticPotential<ElasticObjective> potential(elastic, fraction * s.f_ext);
      SolverOpts step_opts = opts;
      step_opts.newton_tol = std::max(fraction * opts.newton_tol, roundoff_force_floor(s.material, s.rest));
      if (!(step_opts.newton_tol > 0.0)) step_opts.newton_tol = opts.newton_tol;
      NewtonResult n;
      try {
        n = newton_minimize(potential, x, s.pins, step_opts);
      } catch (const Error& e) {
        throw Error(e.kind(), "load step " + std::to_string(k) + ": " + e.what(), static_cast<std::size_t>(k));
      }
      x = n.x;
      measure(k, 0.0, x, &n);
    }
    write_frame(0, x);
    report.final_positions = x;
  } else {
    SimState state{X, Eigen::VectorXd::Zero(X.size()), 0.0, 0};
    std::vector<char> pinned(static_cast<std::size_t>(s.mesh.vertex_count), 0);
    for (int v : s.pins.pinned) pinned[static_cast<std::size_t>(v)] = 1;
    for (int v = 0; v < s.mesh.vertex_count; ++v)
      if (!pinned[static_cast<std::size_t>(v)]) state.v.segment<3>(3 * v) = c.initial_velocity;
    measure(0, 0.0, state.x, nullptr);
    write_frame(0, state.x);
    for (int k = 1; k <= c.frames; ++k) {
      const StepReport step = implicit_euler_step(elastic, state, c.dt, s.mass, s.f_ext, s.pins, opts);
      state = step.state;
      measure(state.step, state.time, state.x, &step.newton);
      write_frame(k, state.x);
    }
    report.final_positions = state.x;
  }
  csv.flush();
  if (!csv) fail(ErrorKind::IoError, "write failed for '" + report.metrics_path.string() + "'");
  return report;
}

}  // namespace corotshell
