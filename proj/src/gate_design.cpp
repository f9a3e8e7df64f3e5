#include "qpronto/gate_design.hpp"

#include <algorithm>
#include <set>

#include "qpronto/errors.hpp"

namespace qpronto {

namespace {

// Real generator of I_k (x) G for a real 2n x 2n matrix G acting on [Re psi; Im psi].
Eigen::MatrixXd replicate_blocks(const Eigen::MatrixXd& g, Eigen::Index n, Eigen::Index copies,
                                 const std::vector<bool>& mask) {
  const Eigen::Index total = n * copies;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * total, 2 * total);
  for (Eigen::Index c = 0; c < copies; ++c) {
    if (!mask[static_cast<std::size_t>(c)]) continue;
    const Eigen::Index o = c * n;
    out.block(o, o, n, n) = g.topLeftCorner(n, n);
    out.block(o, total + o, n, n) = g.topRightCorner(n, n);
    out.block(total + o, o, n, n) = g.bottomLeftCorner(n, n);
    out.block(total + o, total + o, n, n) = g.bottomRightCorner(n, n);
  }
  return out;
}

}  // namespace

void GateProblem::validate() const {
  const Eigen::Index dim = n();
  if (target.rows() != dim || target.cols() != dim) {
    throw InputError("gate target must be " + std::to_string(dim) + "x" + std::to_string(dim));
  }
  std::set<int> seen;
  for (int c : active) {
    if (c < 0 || c >= dim) throw InputError("gate active column " + std::to_string(c) + " out of range");
    if (!seen.insert(c).second) throw InputError("gate active column repeated");
  }
  if (active.empty()) throw InputError("gate needs at least one active column");
  const Eigen::MatrixXcd gram = target.adjoint() * target;
  const double defect = (gram - Eigen::MatrixXcd::Identity(dim, dim)).cwiseAbs().maxCoeff();
  if (defect > 1e-9) {
    throw InputError("gate target columns are not orthonormal (Gram defect " + std::to_string(defect) + ")");
  }
}

StackedGate stack_problem(const GateProblem& gate) {
  gate.validate();
  const Eigen::Index n = gate.n();
  const std::vector<bool> all(static_cast<std::size_t>(n), true);

  StackedGate s;
  s.model.drift = RealGenerator{replicate_blocks(gate.base.drift.matrix, n, n, all)};
  for (const auto& ch : gate.base.channels) {
    s.model.channels.push_back({RealGenerator{replicate_blocks(ch.generator.matrix, n, n, all)}, ch.f});
  }
  Eigen::VectorXcd psi0 = Eigen::VectorXcd::Zero(n * n);
  Eigen::VectorXcd targets(n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    psi0(i * n + i) = 1.0;
    targets.segment(i * n, n) = gate.target.col(i);
  }
  s.x0 = embed_state(psi0);
  s.terminal = TerminalCost::gate(embed_state(targets), static_cast<int>(n), gate.active);
  return s;
}

RealQuadraticCost stack_penalty(const GateProblem& gate, const RealQuadraticCost& per_block) {
  const Eigen::Index n = gate.n();
  if (per_block.matrix.rows() != 2 * n) throw InputError("per-wavefunction penalty has the wrong dimension");
  std::vector<bool> mask(static_cast<std::size_t>(n), false);
  for (int c : gate.active) mask[static_cast<std::size_t>(c)] = true;
  return RealQuadraticCost{replicate_blocks(per_block.matrix, n, n, mask)};
}

Eigen::MatrixXcd stacked_columns(const Curve& xi, Eigen::Index n, int node) {
  const WaveVector psi = extract_state(xi.states.col(node));
  if (psi.size() % n != 0) throw InputError("state does not stack columns of length n");
  const Eigen::Index cols = psi.size() / n;
  Eigen::MatrixXcd u(n, cols);
  for (Eigen::Index i = 0; i < cols; ++i) u.col(i) = psi.segment(i * n, n);
  return u;
}

double gate_fidelity(const Eigen::MatrixXcd& achieved, const GateProblem& gate) {
  const auto d = static_cast<double>(gate.active.size());
  std::complex<double> trace = 0.0;
  // Tr(U U_targ^dagger) = sum_{i,j} U_{ji} conj(T_{ji}) over the logical subspace.
  for (int i : gate.active) {
    for (int j : gate.active) trace += achieved(j, i) * std::conj(gate.target(j, i));
  }
  return (d + std::norm(trace)) / (d * d + d);
}

double gate_fidelity(const Curve& xi, const GateProblem& gate) {
  return gate_fidelity(stacked_columns(xi, gate.n(), xi.grid.steps), gate);
}

}  // namespace qpronto
