#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qpronto/real_embedding.hpp"
#include "qpronto/time_grid.hpp"

namespace qpronto {

/// Scalar weight as a function of time.
class Schedule {
 public:
  enum class Kind { constant, tanh_ramp, tabulated };

  Schedule() = default;
  static Schedule constant(double value);
  /// offset + scale * tanh(rate * t - shift)
  static Schedule tanh_ramp(double scale, double shift, double offset, double rate = 1.0);
  /// One value per grid node.
  static Schedule tabulated(std::vector<double> values);

  Kind kind() const { return kind_; }
  double at(const TimeGrid& grid, int node) const;
  /// Throws InputError if a tabulated schedule does not cover `grid`.
  void check_grid(const TimeGrid& grid) const;

 private:
  Kind kind_ = Kind::constant;
  double scale_ = 0.0, shift_ = 0.0, offset_ = 0.0, rate_ = 1.0;
  std::vector<double> values_;
};

/// Terminal cost m(x) = 1/2 (x - c)^T W (x - c). Every supported reformulation has this form.
class TerminalCost {
 public:
  enum class Kind { zero_phase, arbitrary_phase, gate };

  /// 1/2 ||x - x_T||^2, equal to 1 - Re<psi|psi_T> on unit states.
  static TerminalCost zero_phase(const RealState& target);
  /// 1/2 x^T Gamma_T x with Gamma_T = I - |psi_T><psi_T|.
  static TerminalCost arbitrary_phase(const RealState& target);
  /// 1/2 sum_{i in active} ||psi_i - U_i||^2 over stacked wavefunctions of size n.
  static TerminalCost gate(const RealState& stacked_targets, int n, const std::vector<int>& active);

  /// Same cost multiplied by `factor` > 0.
  TerminalCost scaled(double factor) const;

  Kind kind() const { return kind_; }
  const Eigen::MatrixXd& weight() const { return weight_; }
  const RealState& center() const { return center_; }

  double value(const RealState& x) const;
  Eigen::VectorXd gradient(const RealState& x) const { return weight_ * (x - center_); }

 private:
  Kind kind_ = Kind::zero_phase;
  Eigen::MatrixXd weight_;
  RealState center_;
};

/// 1/2 q(t) x^T Gamma x.
struct PopulationPenalty {
  Schedule weight;
  RealQuadraticCost projector;
};

/// l(x, u, t) = 1/2 u^T R(t) u + sum_k 1/2 q_k(t) x^T Gamma_k x, with R(t) = base + diag(schedules).
struct IncrementalCost {
  Eigen::MatrixXd effort_base;
  std::vector<Schedule> effort_diagonal;
  std::vector<PopulationPenalty> populations;

  Eigen::MatrixXd effort(const TimeGrid& grid, int node) const;
  Eigen::MatrixXd state_weight(const TimeGrid& grid, int node, Eigen::Index state_dim) const;
  double value(const TimeGrid& grid, int node, const Eigen::VectorXd& x,
               const Eigen::VectorXd& u) const;

  /// Throws InputError unless R(t_i) is symmetric positive definite and q_k(t_i) >= 0 at every node.
  void validate(const TimeGrid& grid, Eigen::Index state_dim, Eigen::Index input_dim) const;
};

/// First and second derivatives of the cost at a trajectory.
struct QuadraticExpansion {
  TimeGrid grid;
  Eigen::VectorXd pi;     // terminal gradient
  Eigen::MatrixXd Pi;     // terminal Hessian
  Eigen::MatrixXd q;      // state gradients, one column per node
  Eigen::MatrixXd r;      // input gradients, one column per node
  IncrementalCost incremental;

  Eigen::MatrixXd Qbar(int node) const { return incremental.state_weight(grid, node, q.rows()); }
  Eigen::MatrixXd Sbar(int) const { return Eigen::MatrixXd::Zero(q.rows(), r.rows()); }
  Eigen::MatrixXd Rbar(int node) const { return incremental.effort(grid, node); }
};

/// h(xi) = m(x(T)) + int l dt, trapezoid rule on the grid.
double eval_cost(const TerminalCost& terminal, const IncrementalCost& incremental, const Curve& xi);

QuadraticExpansion expand(const TerminalCost& terminal, const IncrementalCost& incremental,
                          const Curve& xi);

/// Dh(xi) o zeta = pi z(T) + int q z + r v dt.
double directional_derivative(const QuadraticExpansion& e, const TangentCurve& zeta);

}  // namespace qpronto
