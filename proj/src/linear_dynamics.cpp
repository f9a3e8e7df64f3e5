#include "qpronto/linear_dynamics.hpp"

#include "qpronto/errors.hpp"

namespace qpronto {

StageMatrices LinearDynamics::stages(int step) const {
  StageMatrices s;
  s.A[0] = A(step);
  s.A[3] = A(step + 1);
  s.B[0] = B(step);
  s.B[3] = B(step + 1);
  s.A[1] = 0.5 * (s.A[0] + s.A[3]);
  s.A[2] = s.A[1];
  s.B[1] = 0.5 * (s.B[0] + s.B[3]);
  s.B[2] = s.B[1];
  return s;
}

SampledDynamics::SampledDynamics(TimeGrid grid, std::vector<Eigen::MatrixXd> a,
                                 std::vector<Eigen::MatrixXd> b)
    : grid_(grid), a_(std::move(a)), b_(std::move(b)) {
  const auto points = static_cast<std::size_t>(grid_.points());
  if (a_.size() != points || b_.size() != points) {
    throw InputError("sampled dynamics must have one (A, B) pair per grid node");
  }
}

CurveLinearization::CurveLinearization(const ControlHamiltonian& model, Curve curve)
    : model_(model), curve_(std::move(curve)) {
  if (curve_.state_dim() != model_.state_dim() || curve_.input_dim() != model_.input_dim()) {
    throw InputError("curve dimensions do not match the model");
  }
}

Eigen::MatrixXd CurveLinearization::A(int node) const {
  return eval_generator(model_, curve_.inputs.col(node)).matrix;
}

Eigen::MatrixXd CurveLinearization::B(int node) const {
  return input_jacobian(model_, curve_.states.col(node), curve_.inputs.col(node));
}

TrajectoryLinearization::TrajectoryLinearization(const ControlHamiltonian& model,
                                                 const Trajectory& xi)
    : CurveLinearization(model, xi), trajectory_(xi) {}

StageMatrices TrajectoryLinearization::stages(int step) const {
  const double h = curve_.grid.dt();
  const Eigen::VectorXd x = curve_.states.col(step);
  const Eigen::VectorXd u0 = curve_.inputs.col(step);
  const Eigen::VectorXd u1 = curve_.inputs.col(step + 1);
  const Eigen::VectorXd um = 0.5 * (u0 + u1);

  StageMatrices s;
  s.A[0] = eval_generator(model_, u0).matrix;
  s.A[1] = eval_generator(model_, um).matrix;
  s.A[2] = s.A[1];
  s.A[3] = eval_generator(model_, u1).matrix;

  const Eigen::VectorXd x2 = x + 0.5 * h * (s.A[0] * x);
  const Eigen::VectorXd x3 = x + 0.5 * h * (s.A[1] * x2);
  const Eigen::VectorXd x4 = x + h * (s.A[2] * x3);
  s.B[0] = input_jacobian(model_, x, u0);
  s.B[1] = input_jacobian(model_, x2, um);
  s.B[2] = input_jacobian(model_, x3, um);
  s.B[3] = input_jacobian(model_, x4, u1);
  return s;
}

}  // namespace qpronto
