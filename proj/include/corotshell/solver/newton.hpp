#pragma once

#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "corotshell/assembly.hpp"
#include "corotshell/errors.hpp"
#include "corotshell/solver/linear_solve.hpp"
#include "corotshell/solver/options.hpp"

namespace corotshell {

/// Anything Newton can minimize. `accept(x)` is optional and is called on
/// every accepted iterate (used to refresh cached element rotations).
template <typename O>
concept Objective = requires(const O& o, const Positions& x) {
  { o.energy(x) } -> std::convertible_to<double>;
  { o.gradient(x) } -> std::convertible_to<Eigen::VectorXd>;
  { o.hessian(x, true) } -> std::same_as<TripletMatrix>;
};

struct LineSearchResult {
  double alpha = 1.0;
  double energy = 0.0;
  int backtracks = 0;
};

/// Backtracking Armijo search over alpha in {1, beta, beta^2, ...}.
/// Requires a descent direction (g.d < 0).
inline LineSearchResult line_search(const std::function<double(const Positions&)>& energy, const Positions& x,
                                    const Eigen::VectorXd& d, double energy0, double g_dot_d,
                                    const SolverOpts& opts) {
  if (!(g_dot_d < 0.0)) fail(ErrorKind::LineSearchFailure, "direction is not a descent direction");
  LineSearchResult r;
  double alpha = 1.0;
  while (alpha >= opts.ls_min_step) {
    double trial = std::numeric_limits<double>::infinity();
    try {
      trial = energy(x + alpha * d);
    } catch (const Error& e) {
      // Degenerate trial geometry counts as a rejected step.
      if (e.kind() != ErrorKind::DegenerateElement && e.kind() != ErrorKind::DegenerateStencil &&
          e.kind() != ErrorKind::DegenerateDihedral) {
        throw;
      }
    }
    // Allow for round-off in the energy itself once decreases get that small.
    const double noise = 16.0 * std::numeric_limits<double>::epsilon() * std::abs(energy0);
    if (std::isfinite(trial) && trial <= energy0 + opts.ls_c * alpha * g_dot_d + noise) {
      r.alpha = alpha;
      r.energy = trial;
      return r;
    }
    alpha *= opts.ls_beta;
    ++r.backtracks;
  }
  fail(ErrorKind::LineSearchFailure, "no Armijo step above " + std::to_string(opts.ls_min_step));
}

struct NewtonResult {
  Positions x;
  int iterations = 0;
  int line_search_steps = 0;  // total backtracks
  bool converged = false;     // reduced gradient norm <= newton_tol
  bool hit_iteration_cap = false;
  double gradient_norm = 0.0;
  double max_regularization = 0.0;
  int steepest_descent_fallbacks = 0;
  std::vector<double> energies;  // initial energy, then one entry per accepted step
};

/// Damped Newton on the free DOFs. Pinned vertices are moved to their targets
/// first and held there.
template <Objective O>
NewtonResult newton_minimize(O& objective, const Positions& x0, const ConstraintSet& constraints,
                             const SolverOpts& opts) {
  opts.validate();
  NewtonResult res;
  res.x = x0;
  constraints.apply(res.x);
  constraints.validate(static_cast<int>(res.x.size() / 3));
  std::vector<int> full_to_free;
  const std::vector<int> free = free_dof_map(static_cast<int>(res.x.size()), constraints, &full_to_free);
  if (free.empty()) fail(ErrorKind::AllPinned, "every vertex is pinned");

  auto accept = [&](const Positions& x) {
    if constexpr (requires { objective.accept(x); }) objective.accept(x);
  };
  auto energy_fn = [&](const Positions& x) { return static_cast<double>(objective.energy(x)); };

  accept(res.x);
  double energy = energy_fn(res.x);
  if (!std::isfinite(energy)) fail(ErrorKind::LineSearchFailure, "objective is not finite at the initial point");
  res.energies.push_back(energy);

  for (;;) {
    const Eigen::VectorXd g = objective.gradient(res.x);
    const ReducedSystem sys = reduce_system(objective.hessian(res.x, opts.project_hessian), g, constraints);
    res.gradient_norm = sys.g.norm();
    if (res.gradient_norm <= opts.newton_tol) {
      res.converged = true;
      break;
    }
    if (res.iterations >= opts.max_newton) {
      res.hit_iteration_cap = opts.iteration_mode == IterationMode::ToConvergence;
      break;
    }

    LinearSolveReport solve = regularized_solve(sys.H, -sys.g, opts);
    if (sys.g.dot(solve.solution) >= 0.0) {
      // Not a descent direction: climb the regularization ladder from the top.
      const double base = 1e-6 * std::abs(sys.H.diagonal().sum()) / static_cast<double>(sys.H.rows());
      try {
        solve = regularized_solve(sys.H, -sys.g, opts, base > 0.0 ? base : 1e-6);
      } catch (const Error&) {
      }
      if (sys.g.dot(solve.solution) >= 0.0) {
        solve.solution = -sys.g;
        ++res.steepest_descent_fallbacks;
      }
    }
    res.max_regularization = std::max(res.max_regularization, solve.regularization);

    const Eigen::VectorXd d = sys.scatter(solve.solution);
    LineSearchResult ls;
    if constexpr (requires { objective.freeze(res.x); objective.merit(res.x); }) {
      // Search on the model whose gradient at x is exactly g.
      objective.freeze(res.x);
      auto merit = [&](const Positions& y) { return static_cast<double>(objective.merit(y)); };
      ls = line_search(merit, res.x, d, merit(res.x), sys.g.dot(solve.solution), opts);
      res.x += ls.alpha * d;
      constraints.apply(res.x);
      energy = energy_fn(res.x);
    } else {
      ls = line_search(energy_fn, res.x, d, energy, sys.g.dot(solve.solution), opts);
      res.x += ls.alpha * d;
      constraints.apply(res.x);
      energy = ls.energy;
    }
    accept(res.x);
    res.energies.push_back(energy);
    res.line_search_steps += ls.backtracks;
    ++res.iterations;
  }
  return res;
}

}  // namespace corotshell
