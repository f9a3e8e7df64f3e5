#include "qpronto/projection.hpp"

#include "qpronto/errors.hpp"
#include "qpronto/integrators.hpp"

namespace qpronto {

namespace {

void check_gains(const GainSchedule& gains, const TimeGrid& grid) {
  if (gains.K.size() != static_cast<std::size_t>(grid.points())) {
    throw InputError("gain schedule does not match the grid");
  }
}

}  // namespace

Trajectory project(const ControlHamiltonian& model, const Curve& eta, const GainSchedule& gains,
                   const RealState& x0) {
  const TimeGrid& grid = eta.grid;
  check_gains(gains, grid);
  if (eta.state_dim() != model.state_dim() || eta.input_dim() != model.input_dim() ||
      x0.size() != model.state_dim()) {
    throw InputError("projection: curve, model and initial state dimensions differ");
  }
  auto field = [&model](int, int, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    return apply_generator(model, u, x);
  };
  auto law = [&](int i, const Eigen::VectorXd& x) -> Eigen::VectorXd {
    const Eigen::VectorXd alpha = (i == 0) ? x0 : Eigen::VectorXd(eta.states.col(i));
    return eta.inputs.col(i) - gains.K[static_cast<std::size_t>(i)] * (x - alpha);
  };
  Trajectory xi;
  xi.grid = grid;
  xi.states.resize(model.state_dim(), grid.points());
  xi.inputs.resize(model.input_dim(), grid.points());
  integrate_closed_loop(grid, x0, field, law, xi.states, xi.inputs);
  return xi;
}

TangentCurve integrate_linear_feedback(const LinearDynamics& dyn, const std::vector<Eigen::MatrixXd>& K,
                                       const Eigen::MatrixXd& feedforward) {
  const TimeGrid& grid = dyn.grid();
  int cached_step = -1;
  StageMatrices stage;
  auto field = [&](int step, int s, const Eigen::VectorXd& z, const Eigen::VectorXd& v) {
    if (step != cached_step) {
      stage = dyn.stages(step);
      cached_step = step;
    }
    const auto idx = static_cast<std::size_t>(s);
    Eigen::VectorXd dz = stage.A[idx] * z;
    dz.noalias() += stage.B[idx] * v;
    return dz;
  };
  // Linear in z, so the implicit end node is solved directly:
  // z+ = Phi z + G0 v + G1 v+,  v+ = ff+ - K+ z+  =>  (I + G1 K+) z+ = Phi z + G0 v + G1 ff+.
  const Eigen::Index d = dyn.state_dim();
  const Eigen::Index m = dyn.input_dim();
  const double h = grid.dt();
  TangentCurve out{Eigen::MatrixXd(d, grid.points()), Eigen::MatrixXd(m, grid.points())};
  out.z.col(0).setZero();
  out.v.col(0) = feedforward.col(0);
  const Eigen::VectorXd zero_d = Eigen::VectorXd::Zero(d);
  const Eigen::VectorXd zero_m = Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd G1(d, m);
  for (int i = 0; i < grid.steps; ++i) {
    auto f = [&](int s, const Eigen::VectorXd& z, const Eigen::VectorXd& v) { return field(i, s, z, v); };
    for (Eigen::Index j = 0; j < m; ++j) {
      G1.col(j) = rk4_step(f, zero_d, zero_m, Eigen::VectorXd::Unit(m, j), h);
    }
    const Eigen::MatrixXd& Kn = K[static_cast<std::size_t>(i + 1)];
    const Eigen::VectorXd rhs = rk4_step(f, Eigen::VectorXd(out.z.col(i)), Eigen::VectorXd(out.v.col(i)), zero_m, h) +
                                G1 * feedforward.col(i + 1);
    const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(d, d) + G1 * Kn;
    out.z.col(i + 1) = lhs.partialPivLu().solve(rhs);
    out.v.col(i + 1) = feedforward.col(i + 1) - Kn * out.z.col(i + 1);
    if (!out.z.col(i + 1).allFinite() || !out.v.col(i + 1).allFinite()) {
      throw NonFiniteError("linear feedback integration overflowed at step " + std::to_string(i));
    }
  }
  return out;
}

TangentCurve tangent_project(const TrajectoryLinearization& lin, const GainSchedule& gains,
                             const TangentCurve& gamma) {
  const TimeGrid& grid = lin.grid();
  check_gains(gains, grid);
  // v = nu - K (z - beta) = (nu + K beta) - K z, with beta_0 replaced by z_0 = 0
  Eigen::MatrixXd feedforward = gamma.v;
  for (int i = 1; i < grid.points(); ++i) {
    feedforward.col(i) += gains.K[static_cast<std::size_t>(i)] * gamma.z.col(i);
  }
  return integrate_linear_feedback(lin, gains.K, feedforward);
}

double dynamics_residual(const ControlHamiltonian& model, const Curve& xi) {
  auto field = [&model](int, const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    return apply_generator(model, u, x);
  };
  double worst = 0.0;
  for (int i = 0; i < xi.grid.steps; ++i) {
    const Eigen::VectorXd next =
        rk4_step(field, xi.states.col(i), xi.inputs.col(i), xi.inputs.col(i + 1), xi.grid.dt());
    worst = std::max(worst, (next - xi.states.col(i + 1)).cwiseAbs().maxCoeff());
  }
  return worst;
}

double norm_drift(const Curve& xi) {
  const double n0 = xi.states.col(0).norm();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < xi.states.cols(); ++i) {
    worst = std::max(worst, std::abs(xi.states.col(i).norm() - n0));
  }
  return worst;
}

}  // namespace qpronto
