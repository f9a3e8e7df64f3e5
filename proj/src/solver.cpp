#include "qpronto/solver.hpp"

#include <cmath>
#include <sstream>

#include "qpronto/linear_dynamics.hpp"
#include "qpronto/projection.hpp"

namespace qpronto {

namespace {

constexpr double kInitialStateTol = 1e-9;

}  // namespace

void Problem::validate() const {
  const Eigen::Index n = model.state_dim();
  const Eigen::Index m = model.input_dim();
  if (grid.steps <= 0 || !(grid.horizon > 0.0)) throw InputError("horizon: T and N must be positive");
  if (x0.size() != n) throw InputError("initial state has the wrong dimension");
  if (blocks <= 0 || n % (2 * blocks) != 0) throw InputError("state does not split into wavefunction blocks");
  for (const auto& ch : model.channels) {
    if (ch.generator.matrix.rows() != n) throw InputError("control generator has the wrong dimension");
  }
  if (terminal.weight().rows() != n || terminal.center().size() != n) {
    throw InputError("terminal cost has the wrong dimension");
  }
  incremental.validate(grid, n, m);
}

void SolverOptions::validate() const {
  if (!(tol > 0.0)) throw InputError("solver tol must be positive");
  if (max_iter < 0) throw InputError("solver max_iter must be non-negative");
  if (!(armijo.alpha > 0.0 && armijo.alpha < 1.0)) throw InputError("armijo alpha must be in (0, 1)");
  if (!(armijo.beta > 0.0 && armijo.beta < 1.0)) throw InputError("armijo beta must be in (0, 1)");
  regulator.validate();
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iterations: return "max_iterations";
    case SolveStatus::armijo_stall: return "armijo_stall";
  }
  return "unknown";
}

Curve build_initial_curve(const Problem& problem, const InitialGuess& guess) {
  const TimeGrid& grid = problem.grid;
  const Eigen::Index n = problem.model.state_dim();
  const Eigen::Index m = problem.model.input_dim();
  const bool need_states = guess.kind != InitialGuess::Kind::input_only;
  const bool need_inputs = guess.kind != InitialGuess::Kind::state_only;
  if (need_states && (guess.states.rows() != n || guess.states.cols() != grid.points())) {
    throw InputError("guess states must be " + std::to_string(n) + " x " + std::to_string(grid.points()));
  }
  if (need_inputs && (guess.inputs.rows() != m || guess.inputs.cols() != grid.points())) {
    throw InputError("guess inputs must be " + std::to_string(m) + " x " + std::to_string(grid.points()));
  }

  Curve eta{grid, {}, {}};
  eta.inputs = need_inputs ? guess.inputs : Eigen::MatrixXd::Zero(m, grid.points());
  if (need_states) {
    eta.states = guess.states;
  } else {
    const GainSchedule open_loop = GainSchedule::zero(grid, m, n);
    Curve seed{grid, Eigen::MatrixXd::Zero(n, grid.points()), eta.inputs};
    eta.states = project(problem.model, seed, open_loop, problem.x0).states;
  }
  if ((eta.states.col(0) - problem.x0).cwiseAbs().maxCoeff() > kInitialStateTol) {
    eta.states.col(0) = problem.x0;
  }
  return eta;
}

ArmijoResult armijo_search(const Problem& problem, const Trajectory& xi, const TangentCurve& zeta,
                           double Dg, double cost, const GainSchedule& regulator,
                           const ArmijoOptions& opts) {
  if (!(Dg < 0.0)) throw InputError("armijo_search requires a descent direction (Dg < 0)");
  double max_z = 0.0;
  for (Eigen::Index i = 0; i < zeta.z.cols(); ++i) max_z = std::max(max_z, zeta.z.col(i).norm());
  double sigma = 1.0;
  if (max_z > 0.0) sigma = std::min(1.0, opts.sigma_cap_coeff * problem.x0.norm() / max_z);

  ArmijoResult res;
  for (int backtracks = 0;; ++backtracks) {
    if (sigma < opts.min_step) {
      std::ostringstream msg;
      msg << "line search stalled: sigma fell below " << opts.min_step << " after " << backtracks
          << " backtracks";
      throw ArmijoStall(msg.str());
    }
    bool accepted = false;
    try {
      Trajectory trial = project(problem.model, step_along(xi, zeta, sigma), regulator, problem.x0);
      const double g = eval_cost(problem.terminal, problem.incremental, trial);
      if (std::isfinite(g) && g <= cost + opts.alpha * sigma * Dg) {
        res.trajectory = std::move(trial);
        res.cost = g;
        accepted = true;
      }
    } catch (const NonFiniteError&) {
      // Treated as insufficient decrease.
    }
    if (accepted) {
      res.sigma = sigma;
      res.backtracks = backtracks;
      return res;
    }
    sigma *= opts.beta;
  }
}

namespace {

struct Step {
  NewtonUpdate update;
  StepKind kind;
};

Step newton_step(const Problem& problem, const Trajectory& xi, const TrajectoryLinearization& lin,
                 const AdjointCurve& adjoint, const QuadraticExpansion& expansion) {
  try {
    const NewtonWeights full = full_newton_weights(problem.model, xi, adjoint, expansion);
    const LqSolution lq = solve_lq(lin, full);
    NewtonUpdate up = compute_update(lin, lq, expansion);
    // A non-descent direction means the second-order model is not convex here.
    if (up.Dg < 0.0) return {std::move(up), StepKind::full_newton};
  } catch (const RiccatiFailure&) {
  } catch (const NonFiniteError&) {
  }
  const LqSolution lq = solve_lq(lin, quasi_newton_weights(expansion));
  return {compute_update(lin, lq, expansion), StepKind::quasi_newton};
}

}  // namespace

SolveResult solve(const Problem& problem, const InitialGuess& guess, const SolverOptions& opts,
                  const IterationObserver& observer) {
  problem.validate();
  opts.validate();

  const Curve eta0 = build_initial_curve(problem, guess);
  const GainSchedule pre = solve_regulator(problem.model, eta0, opts.regulator, problem.blocks);

  SolveResult result;
  result.trajectory = project(problem.model, eta0, pre, problem.x0);
  double g = eval_cost(problem.terminal, problem.incremental, result.trajectory);

  for (int k = 0;; ++k) {
    const Trajectory& xi = result.trajectory;
    const QuadraticExpansion expansion = expand(problem.terminal, problem.incremental, xi);
    const TrajectoryLinearization lin(problem.model, xi);
    const GainSchedule regulator = solve_regulator(problem.model, xi, opts.regulator, problem.blocks);
    const AdjointCurve adjoint = solve_adjoint(lin, regulator, expansion);
    Step step = newton_step(problem, xi, lin, adjoint, expansion);

    ConvergenceRecord rec;
    rec.iteration = k;
    rec.cost = g;
    rec.Dg = step.update.Dg;
    rec.step_kind = step.kind;

    if (-step.update.Dg < opts.tol) {
      result.status = SolveStatus::converged;
    } else if (k >= opts.max_iter) {
      result.status = SolveStatus::max_iterations;
    } else {
      try {
        ArmijoResult ar = armijo_search(problem, xi, step.update.zeta, step.update.Dg, g, regulator,
                                        opts.armijo);
        rec.sigma = ar.sigma;
        rec.backtracks = ar.backtracks;
        result.records.push_back(rec);
        if (observer) observer(rec);
        result.trajectory = std::move(ar.trajectory);
        g = ar.cost;
        ++result.iterations;
        continue;
      } catch (const ArmijoStall&) {
        result.status = SolveStatus::armijo_stall;
      }
    }
    result.records.push_back(rec);
    if (observer) observer(rec);
    break;
  }
  result.cost = g;
  return result;
}

}  // namespace qpronto
