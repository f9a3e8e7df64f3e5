#pragma once

#include <Eigen/Dense>

#include "qpronto/hamiltonian_model.hpp"
#include "qpronto/linear_dynamics.hpp"
#include "qpronto/regulator.hpp"
#include "qpronto/time_grid.hpp"

namespace qpronto {

/// Projection onto the trajectory manifold:
///   x' = H(u) x, x(0) = x0,   u(t) = mu(t) - K_r(t) (x(t) - alpha(t)).
/// Inputs are linear in time between grid nodes and the feedback is enforced at every node.
/// alpha(0) is replaced by x0 when they differ. Throws NonFiniteError on overflow.
Trajectory project(const ControlHamiltonian& model, const Curve& eta, const GainSchedule& gains,
                   const RealState& x0);

/// Tangent map zeta = DP(xi) o gamma:
///   z' = A_xi z + B_xi v, z(0) = 0,   v = nu - K_r (z - beta),
/// using the exact stage Jacobians of the discrete flow around xi.
TangentCurve tangent_project(const TrajectoryLinearization& lin, const GainSchedule& gains,
                             const TangentCurve& gamma);

/// Forward integration of a linear system under the node feedback v_i = feedforward_i - K_i z_i
/// from z(0) = 0. Shared by the tangent map and the Newton update.
TangentCurve integrate_linear_feedback(const LinearDynamics& dyn, const std::vector<Eigen::MatrixXd>& K,
                                       const Eigen::MatrixXd& feedforward);

/// max_i ||x_{i+1} - RK4(x_i; u_i, u_{i+1})||_inf for a curve under the model.
double dynamics_residual(const ControlHamiltonian& model, const Curve& xi);

/// Largest | ||x_i|| - ||x_0|| | over the grid.
double norm_drift(const Curve& xi);

}  // namespace qpronto
