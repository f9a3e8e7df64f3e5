#pragma once

#include <Eigen/Dense>

namespace qpronto {

/// Uniform grid t_i = i * T / N, i = 0..N. Shared by every curve, gain and weight schedule.
struct TimeGrid {
  double horizon = 1.0;
  int steps = 1000;

  double dt() const { return horizon / steps; }
  double time(int node) const { return horizon * static_cast<double>(node) / steps; }
  int points() const { return steps + 1; }

  /// Composite trapezoid weight of `node`.
  double trapezoid_weight(int node) const {
    return (node == 0 || node == steps) ? 0.5 * dt() : dt();
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

/// Discretized state-input pair [alpha(t), mu(t)]; columns are grid nodes.
struct Curve {
  TimeGrid grid;
  Eigen::MatrixXd states;  // state_dim x points
  Eigen::MatrixXd inputs;  // input_dim x points

  Eigen::Index state_dim() const { return states.rows(); }
  Eigen::Index input_dim() const { return inputs.rows(); }
};

/// A Curve that satisfies the discrete closed-loop dynamics from the initial state.
/// Only the projection operator produces these.
struct Trajectory : Curve {};

/// Tangent direction [z(t), v(t)] on the same grid.
struct TangentCurve {
  Eigen::MatrixXd z;  // state_dim x points
  Eigen::MatrixXd v;  // input_dim x points
};

/// Gridwise affine combination xi + sigma * zeta; generally off the trajectory manifold.
inline Curve step_along(const Curve& xi, const TangentCurve& zeta, double sigma) {
  return Curve{xi.grid, xi.states + sigma * zeta.z, xi.inputs + sigma * zeta.v};
}

}  // namespace qpronto
