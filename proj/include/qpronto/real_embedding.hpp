#pragma once

#include <Eigen/Dense>

namespace qpronto {

/// Complex wavefunction amplitudes |psi>, or a stack of them for gate problems.
using WaveVector = Eigen::VectorXcd;

/// Real coordinates x = [Re psi; Im psi].
using RealState = Eigen::VectorXd;

/// Real generator of the embedded Schroedinger flow, x' = M x. Skew-symmetric.
struct RealGenerator {
  Eigen::MatrixXd matrix;

  /// Wraps `m`, rejecting it unless ||m + m^T||_max <= 1e-12 ||m||_max.
  static RealGenerator from_matrix(Eigen::MatrixXd m);
};

/// Real symmetric PSD matrix Q with x^T Q x = <psi|Q|psi>. Structure [[A, -B], [B, A]].
struct RealQuadraticCost {
  Eigen::MatrixXd matrix;
};

RealState embed_state(const WaveVector& psi);

/// Throws InputError on odd-length input.
WaveVector extract_state(const RealState& x);

/// Maps a Hermitian matrix to the real generator of psi' = -i H psi (hbar = 1).
/// Inputs within 1e-12 (relative) of Hermitian are symmetrized; others are rejected.
RealGenerator embed_generator(const Eigen::MatrixXcd& hamiltonian);

/// Induced real quadratic form of a Hermitian PSD matrix.
RealQuadraticCost embed_quadratic(const Eigen::MatrixXcd& q);

/// Phase-insensitive tracking weight Phi(alpha): x^T Phi x = sum_b (1 - |<phi_b|psi_b>|^2)
/// over the `blocks` stacked wavefunctions, each phi_b normalized from alpha.
/// Throws InputError if any block of alpha is zero.
RealQuadraticCost phase_projector(const RealState& alpha, int blocks = 1);

/// Relative Hermiticity defect ||H - H^dagger||_max / max(1, ||H||_max).
double hermitian_defect(const Eigen::MatrixXcd& h);

}  // namespace qpronto
