#include "qpronto/regulator.hpp"

#include "qpronto/errors.hpp"
#include "qpronto/linear_dynamics.hpp"
#include "qpronto/real_embedding.hpp"

namespace qpronto {

void RegulatorSpec::validate() const {
  if (!(c_R > 0.0)) throw InputError("regulator c_R must be positive");
  if (!(c_P >= 0.0)) throw InputError("regulator c_P must be non-negative");
}

GainSchedule GainSchedule::zero(const TimeGrid& grid, Eigen::Index inputs, Eigen::Index states) {
  GainSchedule g;
  g.K.assign(static_cast<std::size_t>(grid.points()), Eigen::MatrixXd::Zero(inputs, states));
  return g;
}

bool GainSchedule::is_zero() const {
  for (const auto& k : K) {
    if (k.size() > 0 && k.cwiseAbs().maxCoeff() != 0.0) return false;
  }
  return true;
}

RegulatorCosts build_regulator_costs(const RegulatorSpec& spec, const Curve& eta, Eigen::Index inputs,
                                     int blocks) {
  spec.validate();
  const Eigen::Index n = eta.state_dim();
  RegulatorCosts c;
  c.R = spec.c_R * Eigen::MatrixXd::Identity(inputs, inputs);
  if (spec.mode == RegulatorSpec::Mode::global_phase) {
    c.Q = [n](int) -> Eigen::MatrixXd { return Eigen::MatrixXd::Identity(n, n); };
    c.Pi = spec.c_P * Eigen::MatrixXd::Identity(n, n);
  } else {
    const Eigen::MatrixXd states = eta.states;
    c.Q = [states, blocks](int i) -> Eigen::MatrixXd {
      return phase_projector(states.col(i), blocks).matrix;
    };
    c.Pi = spec.c_P * phase_projector(states.col(states.cols() - 1), blocks).matrix;
  }
  return c;
}

RiccatiSolution solve_regulator_riccati(const LinearDynamics& dyn, const RegulatorCosts& costs) {
  RiccatiWeights w;
  w.Q = costs.Q;
  const Eigen::MatrixXd R = costs.R;
  w.R = [R](int) { return R; };
  w.Pi = costs.Pi;
  try {
    return solve_riccati(dyn, w);
  } catch (const RiccatiFailure& e) {
    throw NonFiniteError(std::string("regulator Riccati: ") + e.what());
  }
}

GainSchedule solve_regulator(const ControlHamiltonian& model, const Curve& eta,
                             const RegulatorSpec& spec, int blocks) {
  if (!spec.enabled) return GainSchedule::zero(eta.grid, model.input_dim(), model.state_dim());
  const CurveLinearization dyn(model, eta);
  const RegulatorCosts costs = build_regulator_costs(spec, eta, model.input_dim(), blocks);
  RiccatiSolution sol = solve_regulator_riccati(dyn, costs);
  return GainSchedule{std::move(sol.K), {}};
}

}  // namespace qpronto
