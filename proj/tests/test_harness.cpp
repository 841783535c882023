#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "corotshell/harness/obj_io.hpp"
#include "corotshell/harness/oracles.hpp"
#include "corotshell/harness/scene.hpp"

using namespace corotshell;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("corotshell_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::IoError;
}

std::vector<std::string> csv_lines(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  return lines;
}

}  // namespace

// --- OBJ ---

TEST(Obj, ReadsQuadAsTwoTriangles) {
  std::istringstream in("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3\nf 1 3 4\n");
  const MeshData m = read_obj(in);
  EXPECT_EQ(m.vertex_count(), 4);
  ASSERT_EQ(m.triangles.size(), 2u);
  EXPECT_EQ(m.triangles[1], (Triangle{0, 2, 3}));
  EXPECT_EQ(vertex(m.positions, 2), Vec3(1, 1, 0));
}

TEST(Obj, SlashFormatAttributesIgnored) {
  std::istringstream in("# comment\nv 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvn 0 0 1\nf 1/1/1 2/2/2 3/3/3\n");
  const MeshData m = read_obj(in);
  ASSERT_EQ(m.triangles.size(), 1u);
  EXPECT_EQ(m.triangles[0], (Triangle{0, 1, 2}));
}

TEST(Obj, NegativeIndicesCountFromEnd) {
  std::istringstream in("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n");
  EXPECT_EQ(read_obj(in).triangles[0], (Triangle{0, 1, 2}));
}

TEST(Obj, RoundTripIsBitExact) {
  MeshData m = make_cylinder(0.3, 1.0, 7, 3);
  m.positions(4) = 0.1 + 1e-17;
  std::stringstream buf;
  write_obj(buf, m.positions, m.triangles);
  const MeshData back = read_obj(buf);
  EXPECT_EQ(back.triangles, m.triangles);
  EXPECT_EQ(back.positions, m.positions);
}

TEST(Obj, MalformedInputErrors) {
  EXPECT_EQ(kind_of([] {
              std::istringstream in("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3 4\n");
              read_obj(in);
            }),
            ErrorKind::NonTriangleFace);
  EXPECT_EQ(kind_of([] {
              std::istringstream in("v 0 0 x\n");
              read_obj(in);
            }),
            ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] {
              std::istringstream in("v 0 0 0\nf 1 2 3\n");
              read_obj(in);
            }),
            ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { load_obj("/nonexistent/dir/mesh.obj"); }), ErrorKind::IoError);
}

TEST(Obj, ParseErrorCarriesLineNumber) {
  std::istringstream in("v 0 0 0\n\nv 1 zz 0\n");
  try {
    read_obj(in);
    FAIL();
  } catch (const Error& e) {
    ASSERT_TRUE(e.index().has_value());
    EXPECT_EQ(*e.index(), 3u);
  }
}

// --- Analytic oracles ---

TEST(Oracles, NavierSquarePlateTableValue) {
  // Classical coefficient for the square plate: w = 0.00406 q a^4 / D.
  EXPECT_NEAR(navier_plate_deflection(1.0, 1.0, 1.0, 1.0), 0.00406, 1e-5);
  // Aspect ratio b/a = 2: 0.01013 q a^4 / D.
  EXPECT_NEAR(navier_plate_deflection(1.0, 1.0, 2.0, 1.0), 0.01013, 1e-5);
}

TEST(Oracles, NavierZeroLoadAndLinearity) {
  EXPECT_EQ(navier_plate_deflection(0.0, 1.0, 1.0, 1.0), 0.0);
  const double w = navier_plate_deflection(1.0, 1.3, 0.9, 2.0);
  EXPECT_NEAR(navier_plate_deflection(3.0, 1.3, 0.9, 2.0), 3.0 * w, 1e-15);
  EXPECT_NEAR(navier_plate_deflection(1.0, 1.3, 0.9, 4.0), 0.5 * w, 1e-15);
  // Scaling both sides by s scales the deflection by s^4.
  EXPECT_NEAR(navier_plate_deflection(1.0, 2.6, 1.8, 2.0), 16.0 * w, 1e-12);
}

TEST(Oracles, CantileverClosedForm) {
  EXPECT_DOUBLE_EQ(cantilever_deflection(8.0, 1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(cantilever_deflection(8.0, 2.0, 1.0), 16.0);
}

// --- Config ---

TEST(Config, DefaultsAndOverrides) {
  const SceneConfig c = parse_scene_config(
      "mesh.kind = strip\n"
      "material.youngs = 2e6  # comment\n"
      "load.gravity = 0 0 -9.81\n"
      "pin.box = -1 -1 -1 0.1 1 1; 0.9 -1 -1 2 1 1\n"
      "sim.mode = dynamic\n"
      "solver.iteration_mode = fixed\n");
  EXPECT_EQ(c.mesh.kind, MeshKind::Strip);
  EXPECT_EQ(c.mesh.nx, 64);
  EXPECT_EQ(c.mesh.ny, 8);
  EXPECT_DOUBLE_EQ(c.mesh.ly, 0.125);
  EXPECT_EQ(c.youngs, 2e6);
  EXPECT_EQ(c.gravity, Vec3(0, 0, -9.81));
  EXPECT_EQ(c.pin_boxes.size(), 2u);
  EXPECT_EQ(c.mode, SimMode::Dynamic);
  EXPECT_EQ(c.frames, 100);
  EXPECT_EQ(c.solver.iteration_mode, IterationMode::FixedIterations);
  EXPECT_EQ(c.bending, BendingModel::Corotational);
}

TEST(Config, ErrorsNameTheLine) {
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_scene_config(text);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::ConfigError) << e.what();
      return e.index().value_or(0);
    }
    ADD_FAILURE() << "accepted: " << text;
    return 0;
  };
  EXPECT_EQ(line_of("mesh.nx = 4\nmesh.bogus = 1\n"), 2u);
  EXPECT_EQ(line_of("\nmodel.bending = plates\n"), 2u);
  EXPECT_EQ(line_of("mesh.nx = 4.5\n"), 1u);
  EXPECT_EQ(line_of("mesh.nx = 4\nmesh.nx = 5\n"), 2u);
  EXPECT_EQ(line_of("no equals sign\n"), 1u);
  EXPECT_EQ(line_of("pin.box = 0 0 0 1 1\n"), 1u);
}

TEST(Config, OutOfRangeMaterial) {
  EXPECT_EQ(kind_of([] { parse_scene_config("material.poisson = 0.5\n"); }), ErrorKind::OutOfRangeParameter);
  EXPECT_EQ(kind_of([] { parse_scene_config("material.thickness = -1\n"); }), ErrorKind::OutOfRangeParameter);
}

TEST(Config, ObjPathRelativeToConfig) {
  const fs::path dir = scratch("objpath");
  const MeshData m = make_grid(2, 2, 1.0, 1.0);
  save_obj(dir / "m.obj", m.positions, m.triangles);
  std::ofstream(dir / "scene.cfg") << "mesh.kind = obj\nmesh.path = m.obj\n";
  const SceneConfig c = load_scene_config(dir / "scene.cfg");
  EXPECT_EQ(make_mesh(c.mesh).triangles, m.triangles);
  EXPECT_EQ(kind_of([] { parse_scene_config("mesh.kind = obj\nmesh.path = missing.obj\n"); }), ErrorKind::ConfigError);
}

// --- Scenes ---

TEST(Scene, UnloadedPlateStaysAtRest) {
  const fs::path dir = scratch("rest");
  SceneConfig c = parse_scene_config("mesh.nx = 6\nmesh.ny = 6\npin.box = -1 -1 -1 0.01 2 1\n");
  c.output_dir = dir;
  const SceneReport r = run_scene(c);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].newton_iters, 0);
  EXPECT_EQ(r.rows[0].max_deflection, 0.0);
  EXPECT_LT(r.rows[0].total_energy, 1e-20);
  EXPECT_TRUE(fs::exists(dir / "frame_0000.obj"));
}

TEST(Scene, FreeFallMatchesImplicitEulerRecurrence) {
  // Zero stiffness: x_n = x_0 + dt^2 g n (n + 1) / 2 for every vertex.
  const fs::path dir = scratch("fall");
  SceneConfig c = parse_scene_config(
      "mesh.nx = 3\nmesh.ny = 3\nmodel.elastic_scale = 0\nload.gravity = 0 0 -9.81\n"
      "sim.mode = dynamic\nsim.dt = 0.02\nsim.frames = 10\noutput.frames = false\n");
  c.output_dir = dir;
  const SceneReport r = run_scene(c);
  ASSERT_EQ(r.rows.size(), 11u);
  EXPECT_EQ(r.frames_written, 0);
  for (const MetricsRow& row : r.rows) {
    const double n = row.step;
    const double expected = 0.02 * 0.02 * 9.81 * n * (n + 1.0) / 2.0;
    EXPECT_NEAR(row.probe_disp, expected, 1e-12 * (1.0 + expected));
    EXPECT_NEAR(row.max_deflection, expected, 1e-12 * (1.0 + expected));
    EXPECT_NEAR(row.time, 0.02 * n, 1e-15);
  }
}

TEST(Scene, MetricsSchemaIsStable) {
  const fs::path dir = scratch("schema");
  SceneConfig c = parse_scene_config(
      "mesh.kind = strip\nmesh.nx = 8\nmesh.ny = 2\nload.gravity = 0 0 -1\npin.box = -1 -1 -1 0.13 1 1\n"
      "sim.load_steps = 3\n");
  c.output_dir = dir;
  run_scene(c);
  const auto lines = csv_lines(dir / "metrics.csv");
  ASSERT_EQ(lines.size(), 4u);
  EXPECT_EQ(lines[0],
            "step,time,total_energy,membrane_energy,bending_energy,grad_norm,newton_iters,ls_steps,max_deflection,"
            "probe_disp");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    EXPECT_EQ(std::count(lines[i].begin(), lines[i].end(), ','), 9);
    EXPECT_EQ(lines[i].substr(0, 2), std::to_string(i) + ",");
  }
}

TEST(Scene, QuasistaticLoadStepsReachFullLoad) {
  auto tip = [](int steps) {
    SceneConfig c = parse_scene_config(
        "mesh.kind = strip\nmesh.nx = 16\nmesh.ny = 2\nmaterial.thickness = 1e-2\nload.gravity = 0 0 -1\n"
        "pin.box = -1 -1 -1 0.07 1 1\noutput.frames = false\n");
    c.load_steps = steps;
    c.output_dir = scratch("steps" + std::to_string(steps));
    return run_scene(c).rows.back().max_deflection;
  };
  EXPECT_NEAR(tip(1), tip(4), 1e-8 * tip(1));
}

TEST(Scene, RunsAreReproducible) {
  const std::string text =
      "mesh.kind = cylinder\nmesh.around = 8\nmesh.along = 3\nmaterial.thickness = 1e-2\n"
      "load.gravity = 0 0 -9.81\npin.indices = 0 1\nsim.mode = dynamic\nsim.frames = 5\n";
  SceneConfig a = parse_scene_config(text), b = parse_scene_config(text);
  a.output_dir = scratch("repro_a");
  b.output_dir = scratch("repro_b");
  run_scene(a);
  run_scene(b);
  EXPECT_EQ(slurp(a.output_dir / "metrics.csv"), slurp(b.output_dir / "metrics.csv"));
  EXPECT_EQ(slurp(a.output_dir / "frame_0005.obj"), slurp(b.output_dir / "frame_0005.obj"));
}

TEST(Scene, PinIndexOutOfRange) {
  SceneConfig c = parse_scene_config("mesh.nx = 2\nmesh.ny = 2\npin.indices = 99\n");
  c.output_dir = scratch("badpin");
  EXPECT_EQ(kind_of([&] { run_scene(c); }), ErrorKind::ConfigError);
}

TEST(Scene, NearestVertexTiesGoToLowestIndex) {
  Positions x(9);
  x << 0, 0, 0, 2, 0, 0, 1, 0, 0;
  EXPECT_EQ(nearest_vertex(x, Vec3(0.5, 0, 0)), 0);
  EXPECT_EQ(nearest_vertex(x, Vec3(1.6, 0, 0)), 1);
}
