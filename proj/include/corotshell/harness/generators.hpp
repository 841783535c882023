#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "corotshell/errors.hpp"
#include "corotshell/mesh.hpp"
#include "corotshell/types.hpp"

namespace corotshell {

struct MeshData {
  Positions positions;
  std::vector<Triangle> triangles;

  int vertex_count() const { return static_cast<int>(positions.size() / 3); }
};

/// Diagonal layout of a rectangular grid.
///  - Regular: every cell split along (i, j)-(i+1, j+1).
///  - Alternating: checkerboard of the two diagonals.
///  - Rows: diagonal direction flips from one row of cells to the next.
enum class GridPattern { Regular, Alternating, Rows };

inline GridPattern parse_grid_pattern(const std::string& s) {
  if (s == "regular") return GridPattern::Regular;
  if (s == "alternating") return GridPattern::Alternating;
  if (s == "rows") return GridPattern::Rows;
  fail(ErrorKind::ConfigError, "unknown grid pattern '" + s + "' (regular|alternating|rows)");
}

/// nx-by-ny cells over [0, lx] x [0, ly] in the z = 0 plane, normals +z.
/// Vertex (i, j) has index j * (nx + 1) + i.
inline MeshData make_grid(int nx, int ny, double lx, double ly, GridPattern pattern = GridPattern::Regular) {
  if (nx < 1 || ny < 1 || !(lx > 0.0) || !(ly > 0.0)) fail(ErrorKind::ConfigError, "grid needs nx, ny >= 1 and positive size");
  MeshData m;
  m.positions.resize(3 * (nx + 1) * (ny + 1));
  auto idx = [nx](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      m.positions.segment<3>(3 * idx(i, j)) = Vec3(lx * i / nx, ly * j / ny, 0.0);

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = idx(i, j), b = idx(i + 1, j), c = idx(i + 1, j + 1), d = idx(i, j + 1);
      bool main_diagonal = true;
      if (pattern == GridPattern::Alternating) main_diagonal = (i + j) % 2 == 0;
      if (pattern == GridPattern::Rows) main_diagonal = j % 2 == 0;
      if (main_diagonal) {
        m.triangles.push_back({a, b, c});
        m.triangles.push_back({a, c, d});
      } else {
        m.triangles.push_back({a, b, d});
        m.triangles.push_back({b, c, d});
      }
    }
  }
  return m;
}

/// Equilateral triangles in ny rows of height (lx / nx) * sqrt(3) / 2. Odd
/// rows are shifted by half a spacing and closed with extra vertices at x = 0
/// and x = lx so the left and right sides stay straight.
inline MeshData make_equilateral_grid(int nx, int ny, double lx) {
  if (nx < 1 || ny < 1 || !(lx > 0.0)) fail(ErrorKind::ConfigError, "equilateral grid needs nx, ny >= 1 and positive width");
  const double s = lx / nx;
  const double dy = s * std::sqrt(3.0) / 2.0;
  std::vector<Vec3> pts;
  std::vector<std::vector<int>> rows(static_cast<std::size_t>(ny + 1));
  for (int j = 0; j <= ny; ++j) {
    std::vector<double> xs;
    if (j % 2 == 0) {
      for (int i = 0; i <= nx; ++i) xs.push_back(s * i);
    } else {
      xs.push_back(0.0);
      for (int i = 0; i < nx; ++i) xs.push_back(s * (i + 0.5));
      xs.push_back(lx);
    }
    for (double x : xs) {
      rows[static_cast<std::size_t>(j)].push_back(static_cast<int>(pts.size()));
      pts.emplace_back(x, dy * j, 0.0);
    }
  }

  MeshData m;
  m.positions.resize(3 * static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) m.positions.segment<3>(3 * static_cast<Eigen::Index>(i)) = pts[i];

  for (int j = 0; j < ny; ++j) {
    const auto& lo = rows[static_cast<std::size_t>(j)];
    const auto& hi = rows[static_cast<std::size_t>(j + 1)];
    std::size_t a = 0, b = 0;
    while (a + 1 < lo.size() || b + 1 < hi.size()) {
      const bool advance_lo =
          b + 1 == hi.size() || (a + 1 < lo.size() && pts[static_cast<std::size_t>(lo[a + 1])].x() <
                                                           pts[static_cast<std::size_t>(hi[b + 1])].x() - 1e-12 * lx);
      if (advance_lo) {
        m.triangles.push_back({lo[a], lo[a + 1], hi[b]});
        ++a;
      } else {
        m.triangles.push_back({lo[a], hi[b + 1], hi[b]});
        ++b;
      }
    }
  }
  return m;
}

/// Open tube around the x axis: n_along + 1 rings of n_around vertices,
/// outward-facing triangles.
inline MeshData make_cylinder(double radius, double length, int n_around, int n_along) {
  if (n_around < 3 || n_along < 1 || !(radius > 0.0) || !(length > 0.0)) {
    fail(ErrorKind::ConfigError, "cylinder needs n_around >= 3, n_along >= 1 and positive size");
  }
  MeshData m;
  m.positions.resize(3 * n_around * (n_along + 1));
  auto idx = [n_around](int k, int j) { return j * n_around + (k % n_around); };
  for (int j = 0; j <= n_along; ++j) {
    for (int k = 0; k < n_around; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / n_around;
      m.positions.segment<3>(3 * idx(k, j)) = Vec3(length * j / n_along, radius * std::cos(phi), radius * std::sin(phi));
    }
  }
  for (int j = 0; j < n_along; ++j) {
    for (int k = 0; k < n_around; ++k) {
      const int a = idx(k, j), b = idx(k + 1, j), c = idx(k + 1, j + 1), d = idx(k, j + 1);
      m.triangles.push_back({a, b, c});
      m.triangles.push_back({a, c, d});
    }
  }
  return m;
}

}  // namespace corotshell
