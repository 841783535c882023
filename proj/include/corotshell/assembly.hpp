#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "corotshell/elements/bending.hpp"
#include "corotshell/elements/membrane.hpp"
#include "corotshell/errors.hpp"
#include "corotshell/mesh.hpp"
#include "corotshell/rest_state.hpp"

namespace corotshell {

enum class BendingModel { Corotational, DiscreteShells };

/// Symmetric sparse matrix in coordinate form; duplicates add up.
class TripletMatrix {
 public:
  TripletMatrix() = default;
  explicit TripletMatrix(int n) : n_(n) {}

  int dimension() const { return n_; }
  const std::vector<Eigen::Triplet<double>>& entries() const { return entries_; }
  void reserve(std::size_t count) { entries_.reserve(count); }

  void add(int row, int col, double value) { entries_.emplace_back(row, col, value); }

  template <int N>
  void add_block(const Eigen::Matrix<double, N, N>& block, const std::array<int, N / 3>& vertices) {
    for (int a = 0; a < N / 3; ++a)
      for (int b = 0; b < N / 3; ++b)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) add(3 * vertices[a] + i, 3 * vertices[b] + j, block(3 * a + i, 3 * b + j));
  }

  Eigen::SparseMatrix<double> to_sparse() const {
    Eigen::SparseMatrix<double> m(n_, n_);
    m.setFromTriplets(entries_.begin(), entries_.end());
    return m;
  }

  Eigen::MatrixXd to_dense() const { return Eigen::MatrixXd(to_sparse()); }

 private:
  int n_ = 0;
  std::vector<Eigen::Triplet<double>> entries_;
};

/// Hard pins: every listed vertex has all three coordinates prescribed.
struct ConstraintSet {
  std::vector<int> pinned;
  std::vector<Vec3> targets;

  void validate(int vertex_count) const {
    if (pinned.size() != targets.size()) fail(ErrorKind::ConfigError, "pin targets do not match pinned vertices");
    std::vector<int> sorted = pinned;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      fail(ErrorKind::ConfigError, "pinned vertex listed twice");
    }
    for (int v : pinned) {
      if (v < 0 || v >= vertex_count) fail(ErrorKind::ConfigError, "pinned vertex " + std::to_string(v) + " out of range");
    }
  }

  void apply(Positions& x) const {
    for (std::size_t k = 0; k < pinned.size(); ++k) x.segment<3>(3 * pinned[k]) = targets[k];
  }

  static ConstraintSet pin_at(const std::vector<int>& vertices, const Positions& x) {
    ConstraintSet c;
    c.pinned = vertices;
    for (int v : vertices) c.targets.push_back(x.segment<3>(3 * v));
    return c;
  }
};

/// Last valid element rotations, used when an element degenerates.
struct RotationCache {
  std::vector<Mat32> membrane;
  std::vector<Mat3> hinge;

  static RotationCache from_rest(const RestState& rest) {
    RotationCache c;
    c.membrane.reserve(rest.triangles.size());
    for (const TriangleRest& t : rest.triangles) c.membrane.push_back(t.rest_frame);
    c.hinge.assign(rest.hinges.size(), Mat3::Identity());
    return c;
  }
};

/// Everything the global assembly needs besides the positions.
struct ElasticModel {
  const TriMesh* mesh = nullptr;
  const RestState* rest = nullptr;
  const Material* material = nullptr;
  BendingModel bending = BendingModel::Corotational;
  double scale = 1.0;  // multiplies all elastic terms; 0 disables elasticity
  const RotationCache* rotations = nullptr;
  // When set, corotational hinge energies use these frames instead of
  // shape matching at x (the frozen-rotation model used by the line search).
  const std::vector<RigidFit>* frames = nullptr;
};

struct EnergyBreakdown {
  double membrane = 0.0;
  double bending = 0.0;
  double total() const { return membrane + bending; }
};

namespace detail {

template <typename Fn>
auto with_element_index(const char* kind, std::size_t index, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(kind) + " element " + std::to_string(index) + ": " + e.what(), index);
  }
}

inline std::optional<Mat32> membrane_fallback(const ElasticModel& m, std::size_t t) {
  if (m.rotations) return m.rotations->membrane[t];
  return std::nullopt;
}

inline std::optional<Mat3> hinge_fallback(const ElasticModel& m, std::size_t h) {
  if (m.rotations) return m.rotations->hinge[h];
  return std::nullopt;
}

}  // namespace detail

/// Membrane and bending sums, accumulated in element index order.
inline EnergyBreakdown assemble_energy_terms(const Positions& x, const ElasticModel& m) {
  EnergyBreakdown e;
  if (m.scale == 0.0) return e;
  const TriMesh& mesh = *m.mesh;
  const RestState& rest = *m.rest;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    e.membrane += detail::with_element_index("membrane", t, [&] {
      return membrane_eval(gather(x, mesh.triangles[t]), rest.triangles[t], *m.material, false, false, false,
                           detail::membrane_fallback(m, t))
          .energy;
    });
  }
  for (std::size_t h = 0; h < mesh.hinges.size(); ++h) {
    e.bending += detail::with_element_index("bending", h, [&] {
      const Vec12 xh = gather(x, mesh.hinges[h]);
      if (m.bending == BendingModel::DiscreteShells) return ds_bending(xh, rest.hinges[h], *m.material, false, false).energy;
      if (m.frames) return corotational_bending_in_frame(xh, rest.hinges[h], (*m.frames)[h], false, false).energy;
      return corotational_bending(xh, rest.hinges[h], false, false, detail::hinge_fallback(m, h)).energy;
    });
  }
  e.membrane *= m.scale;
  e.bending *= m.scale;
  return e;
}

inline double assemble_energy(const Positions& x, const ElasticModel& m) {
  return assemble_energy_terms(x, m).total();
}

inline Eigen::VectorXd assemble_gradient(const Positions& x, const ElasticModel& m) {
  const TriMesh& mesh = *m.mesh;
  const RestState& rest = *m.rest;
  Eigen::VectorXd g = Eigen::VectorXd::Zero(3 * mesh.vertex_count);
  if (m.scale == 0.0) return g;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Vec9 ge = detail::with_element_index("membrane", t, [&] {
      return membrane_eval(gather(x, mesh.triangles[t]), rest.triangles[t], *m.material, true, false, false,
                           detail::membrane_fallback(m, t))
          .grad;
    });
    for (int k = 0; k < 3; ++k) g.segment<3>(3 * mesh.triangles[t][k]) += m.scale * ge.segment<3>(3 * k);
  }
  for (std::size_t h = 0; h < mesh.hinges.size(); ++h) {
    const Vec12 ge = detail::with_element_index("bending", h, [&] {
      const Vec12 xh = gather(x, mesh.hinges[h]);
      if (m.bending == BendingModel::DiscreteShells) return ds_bending(xh, rest.hinges[h], *m.material, false, false).grad;
      return corotational_bending(xh, rest.hinges[h], true, false, detail::hinge_fallback(m, h)).grad;
    });
    const auto v = mesh.hinges[h].vertices();
    for (int k = 0; k < 4; ++k) g.segment<3>(3 * v[k]) += m.scale * ge.segment<3>(3 * k);
  }
  return g;
}

/// Element Hessians emitted as triplets in element index order
/// (all membranes, then all hinges).
inline TripletMatrix assemble_hessian(const Positions& x, const ElasticModel& m, bool project) {
  const TriMesh& mesh = *m.mesh;
  const RestState& rest = *m.rest;
  TripletMatrix H(3 * mesh.vertex_count);
  if (m.scale == 0.0) return H;
  H.reserve(81 * mesh.triangles.size() + 144 * mesh.hinges.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Mat9 he = detail::with_element_index("membrane", t, [&] {
      return membrane_eval(gather(x, mesh.triangles[t]), rest.triangles[t], *m.material, false, true, project,
                           detail::membrane_fallback(m, t))
          .hess;
    });
    H.add_block<9>(m.scale * he, mesh.triangles[t]);
  }
  for (std::size_t h = 0; h < mesh.hinges.size(); ++h) {
    const Mat12 he = detail::with_element_index("bending", h, [&] {
      const Vec12 xh = gather(x, mesh.hinges[h]);
      if (m.bending == BendingModel::DiscreteShells) return ds_bending(xh, rest.hinges[h], *m.material, true, project).hess;
      return corotational_bending(xh, rest.hinges[h], false, true, detail::hinge_fallback(m, h)).hess;
    });
    H.add_block<12>(m.scale * he, mesh.hinges[h].vertices());
  }
  return H;
}

/// Shape-matched frame of every hinge at x.
inline std::vector<RigidFit> hinge_frames(const Positions& x, const ElasticModel& m) {
  std::vector<RigidFit> frames(m.mesh->hinges.size());
  for (std::size_t h = 0; h < frames.size(); ++h) {
    frames[h] = detail::with_element_index("bending", h, [&] {
      return hinge_frame(gather(x, m.mesh->hinges[h]), m.rest->hinges[h], detail::hinge_fallback(m, h));
    });
  }
  return frames;
}

/// Stores the rotations of every non-degenerate element at x.
inline void refresh_rotations(const Positions& x, const ElasticModel& m, RotationCache& cache) {
  const TriMesh& mesh = *m.mesh;
  const RestState& rest = *m.rest;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Vec9 xt = gather(x, mesh.triangles[t]);
    const Mat32 F = deformation_gradient(xt.segment<3>(0), xt.segment<3>(3), xt.segment<3>(6),
                                         rest.triangles[t].inv_rest_shape);
    try {
      cache.membrane[t] = polar_rotation(F).R;
    } catch (const Error&) {
    }
  }
  for (std::size_t h = 0; h < mesh.hinges.size(); ++h) {
    try {
      cache.hinge[h] = shape_match_rotation(gather(x, mesh.hinges[h]), rest.hinges[h].positions,
                                            rest.hinges[h].weights)
                           .R;
    } catch (const Error&) {
    }
  }
}

/// Free-free block of a system after eliminating pinned vertices.
struct ReducedSystem {
  Eigen::SparseMatrix<double> H;
  Eigen::VectorXd g;
  std::vector<int> free_dofs;     // reduced index -> full index
  std::vector<int> full_to_free;  // full index -> reduced index, -1 when pinned

  Eigen::VectorXd scatter(const Eigen::VectorXd& reduced) const {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(full_to_free.size()));
    for (std::size_t i = 0; i < free_dofs.size(); ++i) full(free_dofs[i]) = reduced(static_cast<Eigen::Index>(i));
    return full;
  }

  Eigen::VectorXd restrict(const Eigen::VectorXd& full) const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(free_dofs.size()));
    for (std::size_t i = 0; i < free_dofs.size(); ++i) r(static_cast<Eigen::Index>(i)) = full(free_dofs[i]);
    return r;
  }
};

inline std::vector<int> free_dof_map(int dof_count, const ConstraintSet& c, std::vector<int>* full_to_free = nullptr) {
  std::vector<char> pinned(static_cast<std::size_t>(dof_count), 0);
  for (int v : c.pinned)
    for (int k = 0; k < 3; ++k) pinned[static_cast<std::size_t>(3 * v + k)] = 1;
  std::vector<int> free;
  if (full_to_free) full_to_free->assign(static_cast<std::size_t>(dof_count), -1);
  for (int i = 0; i < dof_count; ++i) {
    if (!pinned[static_cast<std::size_t>(i)]) {
      if (full_to_free) (*full_to_free)[static_cast<std::size_t>(i)] = static_cast<int>(free.size());
      free.push_back(i);
    }
  }
  return free;
}

inline ReducedSystem reduce_system(const TripletMatrix& H, const Eigen::VectorXd& g, const ConstraintSet& c) {
  const int n = H.dimension();
  c.validate(n / 3);
  ReducedSystem r;
  r.free_dofs = free_dof_map(n, c, &r.full_to_free);
  if (r.free_dofs.empty()) fail(ErrorKind::AllPinned, "every vertex is pinned");

  const int nf = static_cast<int>(r.free_dofs.size());
  std::vector<Eigen::Triplet<double>> kept;
  kept.reserve(H.entries().size());
  for (const auto& e : H.entries()) {
    const int i = r.full_to_free[static_cast<std::size_t>(e.row())];
    const int j = r.full_to_free[static_cast<std::size_t>(e.col())];
    if (i >= 0 && j >= 0) kept.emplace_back(i, j, e.value());
  }
  r.H.resize(nf, nf);
  r.H.setFromTriplets(kept.begin(), kept.end());
  r.g = r.restrict(g);
  return r;
}

}  // namespace corotshell
