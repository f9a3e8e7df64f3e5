#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "qpronto/hamiltonian_model.hpp"
#include "qpronto/riccati.hpp"
#include "qpronto/time_grid.hpp"

namespace qpronto {

struct RegulatorSpec {
  enum class Mode { global_phase, arbitrary_phase };

  Mode mode = Mode::arbitrary_phase;
  double c_R = 1.0;
  double c_P = 1.0;
  /// false forces K_r = 0 (open-loop projection).
  bool enabled = true;

  /// Throws InputError unless c_R > 0 and c_P >= 0.
  void validate() const;
};

/// Time-indexed feedback gains. `affine` is empty for the regulator.
struct GainSchedule {
  std::vector<Eigen::MatrixXd> K;
  std::vector<Eigen::VectorXd> affine;

  static GainSchedule zero(const TimeGrid& grid, Eigen::Index inputs, Eigen::Index states);
  bool is_zero() const;
};

/// Tracking weights (Q_r(t), R_r, Pi_r) of the regulator LQ problem.
struct RegulatorCosts {
  std::function<Eigen::MatrixXd(int)> Q;
  Eigen::MatrixXd R;
  Eigen::MatrixXd Pi;
};

/// Global mode: (I, c_R I, c_P I). Arbitrary mode: (Phi(alpha(t)), c_R I, c_P Phi(alpha(T))),
/// with Phi built per stacked wavefunction (`blocks` of them).
RegulatorCosts build_regulator_costs(const RegulatorSpec& spec, const Curve& eta, Eigen::Index inputs,
                                     int blocks = 1);

/// Full backward sweep of the regulator Riccati equation around eta; exposes P_r.
/// Throws NonFiniteError if P_r leaves the finite range.
RiccatiSolution solve_regulator_riccati(const LinearDynamics& dyn, const RegulatorCosts& costs);

/// K_r(t) = R_r^{-1} B_eta^T P_r for the linearization of the model around eta.
/// Returns zero gains when the spec is disabled.
GainSchedule solve_regulator(const ControlHamiltonian& model, const Curve& eta,
                             const RegulatorSpec& spec, int blocks = 1);

}  // namespace qpronto
