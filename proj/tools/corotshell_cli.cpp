#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "corotshell/harness/scene.hpp"
#include "corotshell/harness/validation.hpp"

using namespace corotshell;

namespace {

void report_error(const Error& e) {
  nlohmann::json j;
  j["error"] = to_string(e.kind());
  j["message"] = e.what();
  if (e.index()) j["index"] = *e.index();
  std::cerr << j.dump() << '\n';
}

void report_error(const std::exception& e) {
  nlohmann::json j;
  j["error"] = "InternalError";
  j["message"] = e.what();
  std::cerr << j.dump() << '\n';
}

int simulate(const std::string& path) {
  const SceneConfig config = load_scene_config(path);
  const SceneReport r = run_scene(config, &std::cerr);
  const MetricsRow& last = r.rows.back();
  std::printf("wrote %s (%zu rows, %d frames)\n", r.metrics_path.string().c_str(), r.rows.size(), r.frames_written);
  std::printf("final: total_energy=%.6e max_deflection=%.6e grad_norm=%.3e%s\n", last.total_energy,
              last.max_deflection, last.grad_norm, r.converged ? "" : " (iteration cap reached)");
  return 0;
}

int validate(const std::string& filter) {
  int ran = 0, failed = 0;
  run_validation(filter, [&](const CheckResult& r) {
    if (ran++ == 0) std::printf("%-18s %-6s %9s  %s\n", "check", "result", "seconds", "detail");
    if (!r.passed) ++failed;
    std::printf("%-18s %-6s %9.2f  %s\n", r.name.c_str(), r.passed ? "PASS" : "FAIL", r.seconds, r.detail.c_str());
    std::fflush(stdout);
  });
  if (ran == 0) {
    std::fprintf(stderr, "no check matches '%s'\n", filter.c_str());
    return 2;
  }
  std::printf("%d/%d checks passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}

// Parameters use the same names as the mesh.* config keys, e.g. nx=32 lx=2.
int mesh_gen(const std::string& kind, const std::vector<std::string>& params, const std::string& out) {
  std::string text = "mesh.kind = " + kind + "\n";
  for (const std::string& p : params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) fail(ErrorKind::ConfigError, "expected key=value, got '" + p + "'");
    text += "mesh." + p.substr(0, eq) + " = " + p.substr(eq + 1) + "\n";
  }
  const SceneConfig config = parse_scene_config(text, std::filesystem::current_path());
  const MeshData mesh = make_mesh(config.mesh);
  build_topology(mesh.vertex_count(), mesh.triangles);  // reject broken meshes before writing
  save_obj(out, mesh.positions, mesh.triangles);
  std::printf("wrote %s (%d vertices, %zu triangles)\n", out.c_str(), mesh.vertex_count(), mesh.triangles.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thin shell simulator with corotational membrane and bending elements"};
  app.require_subcommand(1);

  std::string config_path;
  auto* sim = app.add_subcommand("simulate", "Run a scene config, writing metrics.csv and OBJ frames");
  sim->add_option("config", config_path, "Scene config file")->required();

  std::string filter;
  auto* val = app.add_subcommand("validate", "Run the built-in validation checks");
  val->add_option("--filter", filter, "Only run checks whose name contains this text");

  std::string kind, out;
  std::vector<std::string> params;
  auto* gen = app.add_subcommand("mesh-gen", "Write a generated mesh as OBJ");
  gen->add_option("kind", kind, "grid | trigrid | strip | cylinder")->required();
  gen->add_option("params", params, "key=value mesh parameters (nx, ny, lx, ly, pattern, radius, length, around, along)");
  gen->add_option("-o,--output", out, "Output OBJ path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) return simulate(config_path);
    if (*val) return validate(filter);
    if (*gen) return mesh_gen(kind, params, out);
  } catch (const Error& e) {
    report_error(e);
    return 1;
  } catch (const std::exception& e) {
    report_error(e);
    return 1;
  }
  return 0;
}
