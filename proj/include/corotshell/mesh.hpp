#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "corotshell/errors.hpp"

namespace corotshell {

using Triangle = std::array<int, 3>;
using Edge = std::array<int, 2>;

/// Four-vertex bending stencil around an interior edge.
///
/// Stencil coordinate order everywhere is (v_edge[0], v_edge[1], v_opp[0],
/// v_opp[1]); v_opp[k] is the apex of tri_pair[k].
struct HingeStencil {
  std::array<int, 2> v_edge{};
  std::array<int, 2> v_opp{};
  std::array<int, 2> tri_pair{};

  std::array<int, 4> vertices() const { return {v_edge[0], v_edge[1], v_opp[0], v_opp[1]}; }
};

struct TriMesh {
  int vertex_count = 0;
  std::vector<Triangle> triangles;
  std::vector<Edge> edges;
  std::vector<HingeStencil> hinges;

  std::size_t boundary_edge_count() const { return edges.size() - hinges.size(); }

  /// Vertices lying on at least one boundary edge, ascending.
  std::vector<int> boundary_vertices() const;
};

namespace detail {

struct EdgeUse {
  int tri;
  int from;  // directed half-edge from -> to inside `tri`
  int opposite;
};

}  // namespace detail

/// Builds edges and hinge stencils for a consistently oriented manifold
/// triangle mesh. Edges come out sorted by (min, max) vertex index, hinges in
/// edge order.
inline TriMesh build_topology(int vertex_count, std::span<const Triangle> triangles) {
  if (vertex_count <= 0) fail(ErrorKind::DegenerateTriangle, "mesh has no vertices");
  if (triangles.empty()) fail(ErrorKind::DegenerateTriangle, "mesh has no triangles");

  std::map<std::pair<int, int>, std::vector<detail::EdgeUse>> uses;
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const Triangle& tri = triangles[t];
    for (int v : tri) {
      if (v < 0 || v >= vertex_count) {
        fail(ErrorKind::DegenerateTriangle,
             "triangle " + std::to_string(t) + " references vertex " + std::to_string(v) +
                 " out of range",
             t);
      }
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      fail(ErrorKind::DegenerateTriangle, "triangle " + std::to_string(t) + " repeats a vertex", t);
    }
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k];
      const int b = tri[(k + 1) % 3];
      const int c = tri[(k + 2) % 3];
      uses[{std::min(a, b), std::max(a, b)}].push_back({static_cast<int>(t), a, c});
    }
  }

  TriMesh mesh;
  mesh.vertex_count = vertex_count;
  mesh.triangles.assign(triangles.begin(), triangles.end());
  mesh.edges.reserve(uses.size());

  std::size_t edge_index = 0;
  for (const auto& [key, list] : uses) {
    mesh.edges.push_back({key.first, key.second});
    if (list.size() > 2) {
      fail(ErrorKind::NonManifoldEdge,
           "edge (" + std::to_string(key.first) + ", " + std::to_string(key.second) + ") is shared by " +
               std::to_string(list.size()) + " triangles",
           edge_index);
    }
    if (list.size() == 2) {
      if (list[0].from == list[1].from) {
        fail(ErrorKind::InconsistentOrientation,
             "triangles " + std::to_string(list[0].tri) + " and " + std::to_string(list[1].tri) +
                 " traverse edge (" + std::to_string(key.first) + ", " + std::to_string(key.second) +
                 ") in the same direction",
             edge_index);
      }
      // Uses are recorded in triangle order, so list[0].tri < list[1].tri.
      HingeStencil h;
      h.v_edge = {key.first, key.second};
      h.tri_pair = {list[0].tri, list[1].tri};
      h.v_opp = {list[0].opposite, list[1].opposite};
      mesh.hinges.push_back(h);
    }
    ++edge_index;
  }
  return mesh;
}

inline TriMesh build_topology(int vertex_count, const std::vector<Triangle>& triangles) {
  return build_topology(vertex_count, std::span<const Triangle>(triangles));
}

inline std::vector<int> TriMesh::boundary_vertices() const {
  std::map<std::pair<int, int>, int> count;
  for (const Triangle& t : triangles) {
    for (int k = 0; k < 3; ++k) {
      const int a = t[k];
      const int b = t[(k + 1) % 3];
      ++count[{std::min(a, b), std::max(a, b)}];
    }
  }
  std::vector<char> flag(static_cast<std::size_t>(vertex_count), 0);
  for (const auto& [key, n] : count) {
    if (n == 1) {
      flag[static_cast<std::size_t>(key.first)] = 1;
      flag[static_cast<std::size_t>(key.second)] = 1;
    }
  }
  std::vector<int> out;
  for (int v = 0; v < vertex_count; ++v) {
    if (flag[static_cast<std::size_t>(v)]) out.push_back(v);
  }
  return out;
}

}  // namespace corotshell
