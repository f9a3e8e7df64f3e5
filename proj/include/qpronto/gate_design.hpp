#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qpronto/cost_model.hpp"
#include "qpronto/hamiltonian_model.hpp"
#include "qpronto/time_grid.hpp"

namespace qpronto {

/// Unitary synthesis: drive |e_i> to the i-th target column for every active i.
struct GateProblem {
  ControlHamiltonian base;      // per-wavefunction model, real dimension 2n
  Eigen::MatrixXcd target;      // n x n, orthonormal columns
  std::vector<int> active;      // columns carrying a terminal cost

  Eigen::Index n() const { return base.state_dim() / 2; }
  /// Throws InputError on dimension mismatch, bad indices or non-orthonormal targets.
  void validate() const;
};

struct StackedGate {
  ControlHamiltonian model;  // I_n (x) H_psi(u) in real coordinates, dimension 2n^2
  RealState x0;              // stacked embed(|e_i>)
  TerminalCost terminal;     // 1/2 sum_{i in active} ||psi_i(T) - U_i||^2
};

StackedGate stack_problem(const GateProblem& gate);

/// Applies a per-wavefunction real quadratic form (2n x 2n) to every active block.
RealQuadraticCost stack_penalty(const GateProblem& gate, const RealQuadraticCost& per_block);

/// Column i of the result is psi_i at node `node` of a stacked curve.
Eigen::MatrixXcd stacked_columns(const Curve& xi, Eigen::Index n, int node);

/// (d + |Tr(U U_targ^dagger)|^2) / (d^2 + d) with U restricted to the active columns and rows.
double gate_fidelity(const Eigen::MatrixXcd& achieved, const GateProblem& gate);
double gate_fidelity(const Curve& xi, const GateProblem& gate);

}  // namespace qpronto
