#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "corotshell/errors.hpp"
#include "corotshell/harness/generators.hpp"

namespace corotshell {

namespace detail {

inline double parse_double(const std::string& tok, std::size_t line) {
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  const auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) fail(ErrorKind::ParseError, "bad number '" + tok + "'", line);
  return v;
}

// "7", "7/1", "7//3", "7/1/3" -> 7. Negative indices count back from the end.
inline int parse_face_index(const std::string& tok, std::size_t line, int vertex_count) {
  const std::string head = tok.substr(0, tok.find('/'));
  long v = 0;
  const char* end = head.data() + head.size();
  const auto [ptr, ec] = std::from_chars(head.data(), end, v);
  if (head.empty() || ec != std::errc() || ptr != end || v == 0) {
    fail(ErrorKind::ParseError, "bad face index '" + tok + "'", line);
  }
  const long idx = v > 0 ? v - 1 : vertex_count + v;
  if (idx < 0) fail(ErrorKind::ParseError, "face index '" + tok + "' out of range", line);
  return static_cast<int>(idx);
}

}  // namespace detail

/// ASCII OBJ reader: `v` and triangular `f` records, everything else ignored.
/// Errors carry the 1-based line number as their index.
inline MeshData read_obj(std::istream& in) {
  std::vector<double> coords;
  MeshData mesh;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream ls(raw);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "v") {
      std::string a, b, c;
      if (!(ls >> a >> b >> c)) fail(ErrorKind::ParseError, "vertex needs three coordinates", line);
      for (const std::string* s : {&a, &b, &c}) coords.push_back(detail::parse_double(*s, line));
    } else if (tag == "f") {
      std::vector<std::string> toks;
      for (std::string s; ls >> s;) toks.push_back(s);
      if (toks.size() != 3) {
        fail(ErrorKind::NonTriangleFace, "face with " + std::to_string(toks.size()) + " vertices", line);
      }
      const int n = static_cast<int>(coords.size() / 3);
      Triangle t{};
      for (int k = 0; k < 3; ++k) t[k] = detail::parse_face_index(toks[k], line, n);
      mesh.triangles.push_back(t);
    }
  }
  mesh.positions = Eigen::Map<const Positions>(coords.data(), static_cast<Eigen::Index>(coords.size()));
  for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
    for (int v : mesh.triangles[f]) {
      if (v >= mesh.vertex_count()) fail(ErrorKind::ParseError, "face references a missing vertex", f);
    }
  }
  return mesh;
}

inline MeshData load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open '" + path.string() + "'");
  return read_obj(in);
}

inline void write_obj(std::ostream& out, const Positions& x, const std::vector<Triangle>& triangles) {
  char buf[96];
  for (Eigen::Index i = 0; i < x.size() / 3; ++i) {
    std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", x(3 * i), x(3 * i + 1), x(3 * i + 2));
    out << buf;
  }
  for (const Triangle& t : triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

inline void save_obj(const std::filesystem::path& path, const Positions& x, const std::vector<Triangle>& triangles) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoError, "cannot write '" + path.string() + "'");
  write_obj(out, x, triangles);
  if (!out) fail(ErrorKind::IoError, "write failed for '" + path.string() + "'");
}

}  // namespace corotshell
