#pragma once

#include <string>

#include "corotshell/solver/newton.hpp"
#include "corotshell/solver/objectives.hpp"

namespace corotshell {

struct SimState {
  Positions x;
  Eigen::VectorXd v;
  double time = 0.0;
  int step = 0;
};

struct StepReport {
  SimState state;
  NewtonResult newton;
};

/// One implicit Euler step as minimization of the incremental potential with
/// x_hat = x_n + dt v_n + dt^2 M^-1 f_ext. Newton starts from x_hat (pins
/// applied) and v_{n+1} = (x_{n+1} - x_n) / dt.
template <typename Inner>
StepReport implicit_euler_step(Inner& elastic, const SimState& state, double dt, const Eigen::VectorXd& vertex_mass,
                               const Eigen::VectorXd& f_ext, const ConstraintSet& constraints, const SolverOpts& opts) {
  if (!(dt > 0.0)) fail(ErrorKind::OutOfRangeParameter, "time step must be positive");
  if (!(vertex_mass.minCoeff() > 0.0)) fail(ErrorKind::OutOfRangeParameter, "vertex masses must be positive");

  const Eigen::VectorXd dof_mass = expand_to_dofs(vertex_mass);
  const Positions x_hat = state.x + dt * state.v + dt * dt * f_ext.cwiseQuotient(dof_mass);
  IncrementalPotential<Inner> potential(elastic, dof_mass, x_hat, dt);

  StepReport report;
  try {
    report.newton = newton_minimize(potential, x_hat, constraints, opts);
  } catch (const Error& e) {
    throw Error(e.kind(), "step " + std::to_string(state.step + 1) + ": " + e.what(),
                static_cast<std::size_t>(state.step + 1));
  }
  report.state.x = report.newton.x;
  report.state.v = (report.state.x - state.x) / dt;
  report.state.time = state.time + dt;
  report.state.step = state.step + 1;
  return report;
}

}  // namespace corotshell
