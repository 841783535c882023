#pragma once

#include "corotshell/errors.hpp"

namespace corotshell {

enum class LinearMethod { Direct, ConjugateGradient };

/// ToConvergence iterates until the tolerance; FixedIterations takes exactly
/// max_newton steps (unless already converged) and does not count the cap as a
/// failure to converge.
enum class IterationMode { ToConvergence, FixedIterations };

struct SolverOpts {
  double newton_tol = 1e-6;  // on the reduced gradient 2-norm
  int max_newton = 100;
  double ls_beta = 0.5;
  double ls_c = 1e-4;
  double ls_min_step = 1e-12;
  double linear_tol = 1e-10;  // normwise backward error of the linear solve
  int linear_max_iter = 2000;
  LinearMethod linear_method = LinearMethod::Direct;
  IterationMode iteration_mode = IterationMode::ToConvergence;
  bool project_hessian = true;

  void validate() const {
    if (!(ls_c > 0.0 && ls_c < 0.5)) fail(ErrorKind::OutOfRangeParameter, "ls_c must lie in (0, 0.5)");
    if (!(ls_beta > 0.0 && ls_beta < 1.0)) fail(ErrorKind::OutOfRangeParameter, "ls_beta must lie in (0, 1)");
    if (!(newton_tol >= 0.0)) fail(ErrorKind::OutOfRangeParameter, "newton_tol must be non-negative");
    if (max_newton < 0) fail(ErrorKind::OutOfRangeParameter, "max_newton must be non-negative");
    if (!(linear_tol > 0.0)) fail(ErrorKind::OutOfRangeParameter, "linear_tol must be positive");
    if (linear_max_iter <= 0) fail(ErrorKind::OutOfRangeParameter, "linear_max_iter must be positive");
  }
};

}  // namespace corotshell
