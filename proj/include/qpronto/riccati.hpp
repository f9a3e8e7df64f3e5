#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "qpronto/linear_dynamics.hpp"

namespace qpronto {

/// Weights of a finite-horizon LQ problem on the grid of a LinearDynamics.
/// Empty S/q/r/pi functions mean zero; midpoint values are linear interpolations.
struct RiccatiWeights {
  std::function<Eigen::MatrixXd(int)> Q;
  std::function<Eigen::MatrixXd(int)> R;
  std::function<Eigen::MatrixXd(int)> S;
  std::function<Eigen::VectorXd(int)> q;
  std::function<Eigen::VectorXd(int)> r;
  Eigen::MatrixXd Pi;
  Eigen::VectorXd pi;

  bool has_affine_terms() const { return static_cast<bool>(q) || static_cast<bool>(r) || pi.size() > 0; }
};

/// Node values of the backward sweep
///   -P' = A^T P + P A - K^T R K + Q,      K = R^{-1} (B^T P + S^T),
///   -p' = (A - B K)^T p - K^T r + q,       v = R^{-1} (B^T p + r),
/// with P(T) = Pi, p(T) = pi.
struct RiccatiSolution {
  std::vector<Eigen::MatrixXd> P;
  std::vector<Eigen::VectorXd> p;
  std::vector<Eigen::MatrixXd> K;
  std::vector<Eigen::VectorXd> v;
};

/// Fixed-step RK4 backward sweep, P symmetrized after every step.
/// Throws RiccatiFailure if min eig R(t_i) <= 1e-10 at any node, if P or p become
/// non-finite, or if ||P||_max exceeds 1e12.
RiccatiSolution solve_riccati(const LinearDynamics& dyn, const RiccatiWeights& w);

}  // namespace qpronto
