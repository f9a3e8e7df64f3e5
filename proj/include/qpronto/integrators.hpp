#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "qpronto/errors.hpp"
#include "qpronto/time_grid.hpp"

namespace qpronto {

/// One RK4 step of x' = f(stage, x, u) where u is linear in time between u0 and u1.
/// Stage indices are 0..3 (start, mid, mid, end).
template <class Field>
Eigen::VectorXd rk4_step(Field&& f, const Eigen::VectorXd& x, const Eigen::VectorXd& u0,
                         const Eigen::VectorXd& u1, double h) {
  const Eigen::VectorXd um = 0.5 * (u0 + u1);
  const Eigen::VectorXd k1 = f(0, x, u0);
  const Eigen::VectorXd k2 = f(1, x + 0.5 * h * k1, um);
  const Eigen::VectorXd k3 = f(2, x + 0.5 * h * k2, um);
  const Eigen::VectorXd k4 = f(3, x + h * k3, u1);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// Integrates x' = f(step, stage, x, u) forward over the grid with the node input given by
/// the feedback law u_i = law(i, x_i). Inputs are linear in time between nodes, so the end
/// node of every step is a small fixed-point problem; it is iterated to machine precision.
/// The result satisfies x_{i+1} = RK4(x_i; u_i, u_{i+1}) exactly up to rounding.
template <class Field, class Law>
void integrate_closed_loop(const TimeGrid& grid, const Eigen::VectorXd& x0, Field&& f, Law&& law,
                           Eigen::MatrixXd& states, Eigen::MatrixXd& inputs) {
  constexpr int kMaxSweeps = 100;
  const double h = grid.dt();
  states.col(0) = x0;
  inputs.col(0) = law(0, x0);
  for (int i = 0; i < grid.steps; ++i) {
    auto field = [&](int stage, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
      return f(i, stage, x, u);
    };
    const Eigen::VectorXd xi = states.col(i);
    const Eigen::VectorXd u0 = inputs.col(i);
    Eigen::VectorXd u1 = law(i + 1, xi);
    Eigen::VectorXd xn;
    bool settled = false;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
      xn = rk4_step(field, xi, u0, u1, h);
      if (!xn.allFinite()) {
        throw NonFiniteError("forward integration overflowed at step " + std::to_string(i));
      }
      Eigen::VectorXd next = law(i + 1, xn);
      const double change = next.size() ? (next - u1).cwiseAbs().maxCoeff() : 0.0;
      const double scale = 1.0 + (next.size() ? next.cwiseAbs().maxCoeff() : 0.0);
      u1 = std::move(next);
      if (!(change > 1e-14 * scale)) {
        if (change > 0.0) xn = rk4_step(field, xi, u0, u1, h);
        settled = true;
        break;
      }
    }
    if (!settled) {
      throw NonFiniteError("closed-loop step " + std::to_string(i) + " did not settle");
    }
    states.col(i + 1) = xn;
    inputs.col(i + 1) = u1;
  }
}

}  // namespace qpronto
