#pragma once

#include <utility>

#include "corotshell/assembly.hpp"

namespace corotshell {

/// Elastic energy of a mesh plus the cache of last valid element rotations.
class ElasticObjective {
 public:
  explicit ElasticObjective(ElasticModel model) : model_(std::move(model)) {
    cache_ = RotationCache::from_rest(*model_.rest);
    model_.rotations = &cache_;
  }
  ElasticObjective(const ElasticObjective& other) : model_(other.model_), cache_(other.cache_) {
    model_.rotations = &cache_;
  }
  ElasticObjective& operator=(const ElasticObjective&) = delete;

  const ElasticModel& model() const { return model_; }

  double energy(const Positions& x) const { return assemble_energy(x, model_); }
  EnergyBreakdown energy_terms(const Positions& x) const { return assemble_energy_terms(x, model_); }
  Eigen::VectorXd gradient(const Positions& x) const { return assemble_gradient(x, model_); }
  TripletMatrix hessian(const Positions& x, bool project) const { return assemble_hessian(x, model_, project); }
  void accept(const Positions& x) {
    if (model_.scale != 0.0) refresh_rotations(x, model_, cache_);
  }

  /// Freezes the hinge frames at x. merit(y) is then the energy whose
  /// gradient at x is exactly gradient(x), including the frozen-rotation
  /// corotational bending terms.
  void freeze(const Positions& x) {
    frames_.clear();
    if (model_.scale != 0.0 && model_.bending == BendingModel::Corotational) frames_ = hinge_frames(x, model_);
  }
  double merit(const Positions& x) const {
    if (frames_.empty()) return energy(x);
    ElasticModel frozen = model_;
    frozen.frames = &frames_;
    return assemble_energy(x, frozen);
  }

 private:
  ElasticModel model_;
  RotationCache cache_;
  std::vector<RigidFit> frames_;
};

namespace detail {

template <typename Inner>
void freeze_inner(Inner& inner, const Positions& x) {
  if constexpr (requires { inner.freeze(x); }) inner.freeze(x);
}

template <typename Inner>
double inner_merit(const Inner& inner, const Positions& x) {
  if constexpr (requires { inner.merit(x); }) {
    return inner.merit(x);
  } else {
    return inner.energy(x);
  }
}

}  // namespace detail

/// E(x) - f . x
template <typename Inner>
class StaticPotential {
 public:
  StaticPotential(Inner& inner, Eigen::VectorXd force) : inner_(&inner), force_(std::move(force)) {}

  double energy(const Positions& x) const { return inner_->energy(x) - force_.dot(x); }
  Eigen::VectorXd gradient(const Positions& x) const { return inner_->gradient(x) - force_; }
  TripletMatrix hessian(const Positions& x, bool project) const { return inner_->hessian(x, project); }
  void accept(const Positions& x) {
    if constexpr (requires { inner_->accept(x); }) inner_->accept(x);
  }
  void freeze(const Positions& x) { detail::freeze_inner(*inner_, x); }
  double merit(const Positions& x) const { return detail::inner_merit(*inner_, x) - force_.dot(x); }

 private:
  Inner* inner_;
  Eigen::VectorXd force_;
};

/// 1/(2 dt^2) |x - x_hat|_M^2 + E(x); its minimizer is the implicit Euler step.
template <typename Inner>
class IncrementalPotential {
 public:
  IncrementalPotential(Inner& inner, Eigen::VectorXd dof_mass, Positions x_hat, double dt)
      : inner_(&inner), mass_(std::move(dof_mass)), x_hat_(std::move(x_hat)), inv_dt2_(1.0 / (dt * dt)) {}

  double inertia(const Positions& x) const {
    const Eigen::VectorXd dx = x - x_hat_;
    return 0.5 * inv_dt2_ * dx.dot(mass_.cwiseProduct(dx));
  }
  double energy(const Positions& x) const { return inertia(x) + inner_->energy(x); }
  Eigen::VectorXd gradient(const Positions& x) const {
    return inv_dt2_ * mass_.cwiseProduct(x - x_hat_) + inner_->gradient(x);
  }
  TripletMatrix hessian(const Positions& x, bool project) const {
    TripletMatrix H = inner_->hessian(x, project);
    for (Eigen::Index i = 0; i < mass_.size(); ++i) H.add(static_cast<int>(i), static_cast<int>(i), inv_dt2_ * mass_(i));
    return H;
  }
  void accept(const Positions& x) {
    if constexpr (requires { inner_->accept(x); }) inner_->accept(x);
  }
  void freeze(const Positions& x) { detail::freeze_inner(*inner_, x); }
  double merit(const Positions& x) const { return inertia(x) + detail::inner_merit(*inner_, x); }

 private:
  Inner* inner_;
  Eigen::VectorXd mass_;
  Positions x_hat_;
  double inv_dt2_;
};

/// Per-vertex masses repeated for each coordinate.
inline Eigen::VectorXd expand_to_dofs(const Eigen::VectorXd& per_vertex) {
  Eigen::VectorXd out(3 * per_vertex.size());
  for (Eigen::Index i = 0; i < per_vertex.size(); ++i) out.segment<3>(3 * i).setConstant(per_vertex(i));
  return out;
}

}  // namespace corotshell
