#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "qpronto/hamiltonian_model.hpp"
#include "qpronto/time_grid.hpp"

namespace qpronto {

/// (A, B) at the four RK4 stages of one grid step.
struct StageMatrices {
  std::array<Eigen::MatrixXd, 4> A;
  std::array<Eigen::MatrixXd, 4> B;
};

/// Time-varying linear system z' = A(t) z + B(t) v sampled on a grid.
/// Between nodes the matrices are linearly interpolated unless a subclass knows better.
class LinearDynamics {
 public:
  virtual ~LinearDynamics() = default;

  virtual const TimeGrid& grid() const = 0;
  virtual Eigen::Index state_dim() const = 0;
  virtual Eigen::Index input_dim() const = 0;
  virtual Eigen::MatrixXd A(int node) const = 0;
  virtual Eigen::MatrixXd B(int node) const = 0;

  /// Matrices seen by the forward RK4 step from node `step` to `step + 1`.
  virtual StageMatrices stages(int step) const;
};

/// Node samples held in memory. Used for synthetic systems.
class SampledDynamics final : public LinearDynamics {
 public:
  SampledDynamics(TimeGrid grid, std::vector<Eigen::MatrixXd> a, std::vector<Eigen::MatrixXd> b);

  const TimeGrid& grid() const override { return grid_; }
  Eigen::Index state_dim() const override { return a_.front().rows(); }
  Eigen::Index input_dim() const override { return b_.front().cols(); }
  Eigen::MatrixXd A(int node) const override { return a_[static_cast<std::size_t>(node)]; }
  Eigen::MatrixXd B(int node) const override { return b_[static_cast<std::size_t>(node)]; }

 private:
  TimeGrid grid_;
  std::vector<Eigen::MatrixXd> a_;
  std::vector<Eigen::MatrixXd> b_;
};

/// Linearization of H(u) x around an arbitrary curve [alpha, mu]: A = H(mu), B = dH/dmu alpha.
class CurveLinearization : public LinearDynamics {
 public:
  CurveLinearization(const ControlHamiltonian& model, Curve curve);

  const TimeGrid& grid() const override { return curve_.grid; }
  Eigen::Index state_dim() const override { return model_.state_dim(); }
  Eigen::Index input_dim() const override { return model_.input_dim(); }
  Eigen::MatrixXd A(int node) const override;
  Eigen::MatrixXd B(int node) const override;

  const ControlHamiltonian& model() const { return model_; }
  const Curve& curve() const { return curve_; }

 protected:
  ControlHamiltonian model_;
  Curve curve_;
};

/// Linearization around a trajectory. Its stage matrices are the exact Jacobians of the
/// discrete RK4 flow, so tangent curves are exact derivatives of the discrete projection.
class TrajectoryLinearization final : public CurveLinearization {
 public:
  TrajectoryLinearization(const ControlHamiltonian& model, const Trajectory& xi);

  StageMatrices stages(int step) const override;

  const Trajectory& trajectory() const { return trajectory_; }

 private:
  Trajectory trajectory_;
};

}  // namespace qpronto
