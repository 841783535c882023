#pragma once

#include <array>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "corotshell/assembly.hpp"
#include "corotshell/errors.hpp"
#include "corotshell/harness/generators.hpp"
#include "corotshell/material.hpp"
#include "corotshell/solver/options.hpp"

namespace corotshell {

/// Flat `key = value` text: one entry per line, `#` starts a comment, keys are
/// dotted paths. Values keep their raw text until a typed getter reads them.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::istream& in) {
    KeyValueFile kv;
    std::string raw;
    std::size_t line = 0;
    while (std::getline(in, raw)) {
      ++line;
      if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
      const std::string text = trim(raw);
      if (text.empty()) continue;
      const auto eq = text.find('=');
      if (eq == std::string::npos) fail(ErrorKind::ConfigError, "line " + std::to_string(line) + ": expected key = value", line);
      const std::string key = trim(text.substr(0, eq));
      const std::string value = trim(text.substr(eq + 1));
      if (key.empty()) fail(ErrorKind::ConfigError, "line " + std::to_string(line) + ": empty key", line);
      if (kv.values_.count(key)) fail(ErrorKind::ConfigError, "line " + std::to_string(line) + ": duplicate key '" + key + "'", line);
      kv.values_[key] = value;
      kv.lines_[key] = line;
    }
    return kv;
  }

  static KeyValueFile load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IoError, "cannot open config '" + path.string() + "'");
    return parse(in);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string str(const std::string& key, const std::string& fallback) const {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double num(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    const auto v = numbers(key);
    if (v.size() != 1) bad(key, "expected one number");
    return v[0];
  }

  int integer(const std::string& key, int fallback) const {
    const double v = num(key, fallback);
    if (v != static_cast<double>(static_cast<int>(v))) bad(key, "expected an integer");
    return static_cast<int>(v);
  }

  bool flag(const std::string& key, bool fallback) const {
    const std::string v = str(key, fallback ? "true" : "false");
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    bad(key, "expected true or false");
  }

  std::vector<double> numbers(const std::string& key) const {
    std::vector<double> out;
    std::istringstream ss(str(key, ""));
    for (std::string tok; ss >> tok;) {
      if (tok.back() == ',') tok.pop_back();
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) bad(key, "bad number '" + tok + "'");
      out.push_back(v);
    }
    return out;
  }

  Vec3 vec3(const std::string& key, const Vec3& fallback) const {
    if (!has(key)) return fallback;
    const auto v = numbers(key);
    if (v.size() != 3) bad(key, "expected three numbers");
    return Vec3(v[0], v[1], v[2]);
  }

  /// Keys present in the file that no getter asked for.
  std::vector<std::string> unused() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_)
      if (!used_.count(k)) out.push_back(k);
    return out;
  }

  [[noreturn]] void bad(const std::string& key, const std::string& what) const {
    const auto it = lines_.find(key);
    const std::size_t line = it == lines_.end() ? 0 : it->second;
    fail(ErrorKind::ConfigError, "line " + std::to_string(line) + ": " + key + ": " + what, line);
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  std::map<std::string, std::string> values_;
  std::map<std::string, std::size_t> lines_;
  mutable std::set<std::string> used_;
};

enum class MeshKind { Grid, TriGrid, Strip, Cylinder, Obj };
enum class SimMode { Quasistatic, Dynamic };

struct MeshSpec {
  MeshKind kind = MeshKind::Grid;
  std::filesystem::path path;
  int nx = 16;
  int ny = 16;
  double lx = 1.0;
  double ly = 1.0;
  GridPattern pattern = GridPattern::Regular;
  double radius = 0.5;
  double length = 1.0;
  int around = 16;
  int along = 8;
};

/// Axis-aligned box, inclusive.
struct PinBox {
  Vec3 lo;
  Vec3 hi;
  bool contains(const Vec3& p) const { return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all(); }
};

struct SceneConfig {
  MeshSpec mesh;
  double youngs = 1e6;
  double poisson = 0.3;
  double thickness = 1e-3;
  double density = 1000.0;
  double bend_scale = 1.0 / 6.0;
  BendingModel bending = BendingModel::Corotational;
  double elastic_scale = 1.0;
  Vec3 gravity = Vec3::Zero();
  std::vector<int> pin_indices;
  std::vector<PinBox> pin_boxes;
  std::optional<Vec3> probe;
  SimMode mode = SimMode::Quasistatic;
  double dt = 1e-2;
  int frames = 1;
  int load_steps = 1;
  Vec3 initial_velocity = Vec3::Zero();
  SolverOpts solver;
  std::optional<double> newton_tol;  // absolute; otherwise newton_rtol * characteristic force
  double newton_rtol = 1e-6;
  std::filesystem::path output_dir = "out";
  bool write_frames = true;
};

inline MeshKind parse_mesh_kind(const std::string& s) {
  if (s == "grid") return MeshKind::Grid;
  if (s == "trigrid") return MeshKind::TriGrid;
  if (s == "strip") return MeshKind::Strip;
  if (s == "cylinder") return MeshKind::Cylinder;
  if (s == "obj") return MeshKind::Obj;
  fail(ErrorKind::ConfigError, "unknown mesh.kind '" + s + "' (grid|trigrid|strip|cylinder|obj)");
}

/// Rows for a near-square equilateral grid: a multiple of four, so there is
/// a vertex at the center.
inline int equilateral_rows_for(int nx) {
  const int rows = 4 * static_cast<int>(std::lround(2.0 * nx / std::sqrt(3.0) / 4.0));
  return std::max(rows, 2);
}

inline SceneConfig scene_from_keys(const KeyValueFile& kv, const std::filesystem::path& base_dir = {}) {
  SceneConfig c;
  MeshSpec& m = c.mesh;
  m.kind = parse_mesh_kind(kv.str("mesh.kind", "grid"));
  m.pattern = parse_grid_pattern(kv.str("mesh.pattern", m.kind == MeshKind::Strip ? "rows" : "regular"));
  m.nx = kv.integer("mesh.nx", m.kind == MeshKind::Strip ? 64 : 16);
  m.ny = kv.integer("mesh.ny", m.kind == MeshKind::Strip ? 8 : (m.kind == MeshKind::TriGrid ? equilateral_rows_for(m.nx) : 16));
  m.lx = kv.num("mesh.lx", 1.0);
  m.ly = kv.num("mesh.ly", m.kind == MeshKind::Strip ? m.lx / 8.0 : 1.0);
  m.radius = kv.num("mesh.radius", m.radius);
  m.length = kv.num("mesh.length", m.length);
  m.around = kv.integer("mesh.around", m.around);
  m.along = kv.integer("mesh.along", m.along);
  const std::string p = kv.str("mesh.path", "");
  if (m.kind == MeshKind::Obj) {
    if (p.empty()) fail(ErrorKind::ConfigError, "mesh.kind = obj needs mesh.path");
    m.path = std::filesystem::path(p).is_absolute() ? std::filesystem::path(p) : base_dir / p;
    if (!std::filesystem::exists(m.path)) fail(ErrorKind::ConfigError, "mesh.path '" + m.path.string() + "' does not exist");
  }

  c.youngs = kv.num("material.youngs", c.youngs);
  c.poisson = kv.num("material.poisson", c.poisson);
  c.thickness = kv.num("material.thickness", c.thickness);
  c.density = kv.num("material.density", c.density);
  c.bend_scale = kv.num("material.bend_scale", c.bend_scale);
  derive_moduli(c.youngs, c.poisson, c.thickness, c.density, c.bend_scale);  // range checks

  const std::string bending = kv.str("model.bending", "corot");
  if (bending == "corot") {
    c.bending = BendingModel::Corotational;
  } else if (bending == "discrete_shells") {
    c.bending = BendingModel::DiscreteShells;
  } else {
    kv.bad("model.bending", "expected corot or discrete_shells");
  }
  c.elastic_scale = kv.num("model.elastic_scale", c.elastic_scale);
  if (!(c.elastic_scale >= 0.0)) kv.bad("model.elastic_scale", "must be non-negative");

  c.gravity = kv.vec3("load.gravity", c.gravity);

  for (double v : kv.numbers("pin.indices")) {
    if (v < 0 || v != static_cast<double>(static_cast<int>(v))) kv.bad("pin.indices", "expected vertex indices");
    c.pin_indices.push_back(static_cast<int>(v));
  }
  if (kv.has("pin.box")) {
    // One or more boxes: xmin ymin zmin xmax ymax zmax, separated by ';'.
    std::istringstream boxes(kv.str("pin.box", ""));
    for (std::string one; std::getline(boxes, one, ';');) {
      std::istringstream ss(one);
      std::vector<double> v;
      for (double d; ss >> d;) v.push_back(d);
      if (!ss.eof()) kv.bad("pin.box", "bad number");
      if (v.empty()) continue;
      if (v.size() != 6) kv.bad("pin.box", "each box needs six numbers");
      c.pin_boxes.push_back({Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5])});
    }
  }
  if (kv.has("probe.point")) c.probe = kv.vec3("probe.point", Vec3::Zero());

  const std::string mode = kv.str("sim.mode", "quasistatic");
  if (mode == "quasistatic") {
    c.mode = SimMode::Quasistatic;
  } else if (mode == "dynamic") {
    c.mode = SimMode::Dynamic;
  } else {
    kv.bad("sim.mode", "expected quasistatic or dynamic");
  }
  c.dt = kv.num("sim.dt", c.dt);
  if (!(c.dt > 0.0)) kv.bad("sim.dt", "must be positive");
  c.frames = kv.integer("sim.frames", c.mode == SimMode::Dynamic ? 100 : 1);
  if (c.frames < 1) kv.bad("sim.frames", "must be at least 1");
  c.load_steps = kv.integer("sim.load_steps", 1);
  if (c.load_steps < 1) kv.bad("sim.load_steps", "must be at least 1");
  c.initial_velocity = kv.vec3("init.velocity", c.initial_velocity);

  SolverOpts& s = c.solver;
  if (kv.has("solver.newton_tol")) c.newton_tol = kv.num("solver.newton_tol", 0.0);
  c.newton_rtol = kv.num("solver.newton_rtol", c.newton_rtol);
  s.max_newton = kv.integer("solver.max_newton", s.max_newton);
  s.ls_beta = kv.num("solver.ls_beta", s.ls_beta);
  s.ls_c = kv.num("solver.ls_c", s.ls_c);
  s.linear_tol = kv.num("solver.linear_tol", s.linear_tol);
  s.linear_max_iter = kv.integer("solver.linear_max_iter", s.linear_max_iter);
  s.project_hessian = kv.flag("solver.project_hessian", s.project_hessian);
  const std::string mode_it = kv.str("solver.iteration_mode", "converge");
  if (mode_it == "converge") {
    s.iteration_mode = IterationMode::ToConvergence;
  } else if (mode_it == "fixed") {
    s.iteration_mode = IterationMode::FixedIterations;
  } else {
    kv.bad("solver.iteration_mode", "expected converge or fixed");
  }
  const std::string linear = kv.str("solver.linear_solver", "ldlt");
  if (linear == "ldlt") {
    s.linear_method = LinearMethod::Direct;
  } else if (linear == "cg") {
    s.linear_method = LinearMethod::ConjugateGradient;
  } else {
    kv.bad("solver.linear_solver", "expected ldlt or cg");
  }
  s.validate();

  c.output_dir = kv.str("output.dir", c.output_dir.string());
  c.write_frames = kv.flag("output.frames", c.write_frames);

  if (const auto extra = kv.unused(); !extra.empty()) kv.bad(extra.front(), "unknown key");
  return c;
}

inline SceneConfig load_scene_config(const std::filesystem::path& path) {
  return scene_from_keys(KeyValueFile::load(path), path.parent_path());
}

inline SceneConfig parse_scene_config(const std::string& text, const std::filesystem::path& base_dir = {}) {
  std::istringstream in(text);
  return scene_from_keys(KeyValueFile::parse(in), base_dir);
}

}  // namespace corotshell
