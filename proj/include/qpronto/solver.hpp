#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "qpronto/cost_model.hpp"
#include "qpronto/errors.hpp"
#include "qpronto/hamiltonian_model.hpp"
#include "qpronto/newton_core.hpp"
#include "qpronto/regulator.hpp"
#include "qpronto/time_grid.hpp"

namespace qpronto {

/// A closed-system optimal control problem in real coordinates.
struct Problem {
  ControlHamiltonian model;
  TimeGrid grid;
  RealState x0;
  TerminalCost terminal;
  IncrementalCost incremental;
  /// Number of stacked wavefunctions in the state (1 unless gate design).
  int blocks = 1;

  /// Throws InputError on inconsistent dimensions or violated cost invariants.
  void validate() const;
};

struct ArmijoOptions {
  double alpha = 0.4;            // sufficient-decrease fraction
  double beta = 0.7;             // backtracking factor
  double sigma_cap_coeff = 0.6;  // sigma_0 = min(1, coeff ||x0|| / max_t ||z(t)||)
  double min_step = 1e-8;
};

struct SolverOptions {
  double tol = 1e-6;
  int max_iter = 100;
  ArmijoOptions armijo;
  RegulatorSpec regulator;

  void validate() const;
};

struct ConvergenceRecord {
  int iteration = 0;
  double cost = 0.0;   // g_k at the start of the iteration
  double Dg = 0.0;
  double sigma = 0.0;  // accepted step, 0 on the terminating iteration
  StepKind step_kind = StepKind::quasi_newton;
  int backtracks = 0;
};

/// Starting curve eta_0. Missing parts are filled in by build_initial_curve.
struct InitialGuess {
  enum class Kind { curve, input_only, state_only };

  Kind kind = Kind::input_only;
  Eigen::MatrixXd states;  // required for curve / state_only
  Eigen::MatrixXd inputs;  // required for curve / input_only
};

/// input_only: alpha by open-loop simulation of mu; state_only: mu = 0.
Curve build_initial_curve(const Problem& problem, const InitialGuess& guess);

enum class SolveStatus { converged, max_iterations, armijo_stall };

const char* to_string(SolveStatus status);

struct SolveResult {
  Trajectory trajectory;
  std::vector<ConvergenceRecord> records;
  SolveStatus status = SolveStatus::converged;
  double cost = 0.0;
  /// Accepted Newton steps.
  int iterations = 0;
};

class ArmijoStall : public Error {
 public:
  using Error::Error;
};

struct ArmijoResult {
  Trajectory trajectory;
  double cost = 0.0;
  double sigma = 0.0;
  int backtracks = 0;
};

/// Backtracking on xi_{k+1} = P(xi_k + sigma zeta_k) until
/// g_{k+1} <= g_k + alpha sigma Dg_k. Requires Dg < 0. Throws ArmijoStall below min_step.
ArmijoResult armijo_search(const Problem& problem, const Trajectory& xi, const TangentCurve& zeta,
                           double Dg, double cost, const GainSchedule& regulator,
                           const ArmijoOptions& opts);

using IterationObserver = std::function<void(const ConvergenceRecord&)>;

/// Regulated projection-operator Newton loop. Terminates when -Dg_k < tol, after max_iter
/// Newton steps, or when the line search stalls; the status says which.
SolveResult solve(const Problem& problem, const InitialGuess& guess, const SolverOptions& opts,
                  const IterationObserver& observer = {});

}  // namespace qpronto
