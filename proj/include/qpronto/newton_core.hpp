#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qpronto/cost_model.hpp"
#include "qpronto/linear_dynamics.hpp"
#include "qpronto/regulator.hpp"
#include "qpronto/riccati.hpp"

namespace qpronto {

enum class StepKind { full_newton, quasi_newton };

const char* to_string(StepKind kind);

/// Adjoint chi(t), one column per node; chi(T) = pi.
struct AdjointCurve {
  Eigen::MatrixXd chi;
};

/// -chi' = (A - B K_r)^T chi + (q - K_r^T r),  chi(T) = pi, fixed-step RK4 backward.
/// Throws NonFiniteError on overflow.
AdjointCurve solve_adjoint(const LinearDynamics& lin, const GainSchedule& regulator,
                           const QuadraticExpansion& expansion);

/// Second-order contribution of the dynamics weighted by the adjoint:
/// chi^T Lambda(t|zeta) = 2 z^T S~ v + v^T R~ v.
struct CurvatureTerms {
  Eigen::MatrixXd S;  // state_dim x input_dim, column j = (H_j f_j'(u_j))^T chi
  Eigen::MatrixXd R;  // diagonal, entries chi^T H_j f_j''(u_j) x
};

CurvatureTerms curvature_terms(const ControlHamiltonian& model, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u, const Eigen::VectorXd& chi);

/// Weights (Q_k, S_k, R_k, Pi_k) of the LQ subproblem.
struct NewtonWeights {
  StepKind kind = StepKind::quasi_newton;
  std::vector<Eigen::MatrixXd> S_tilde;  // empty for quasi-Newton
  std::vector<Eigen::MatrixXd> R_tilde;
  QuadraticExpansion expansion;

  Eigen::MatrixXd Q(int node) const { return expansion.Qbar(node); }
  Eigen::MatrixXd S(int node) const;
  Eigen::MatrixXd R(int node) const;
  const Eigen::MatrixXd& Pi() const { return expansion.Pi; }
};

NewtonWeights quasi_newton_weights(const QuadraticExpansion& expansion);

NewtonWeights full_newton_weights(const ControlHamiltonian& model, const Trajectory& xi,
                                  const AdjointCurve& adjoint, const QuadraticExpansion& expansion);

/// Node values of the optimizer Riccati sweep.
struct LqSolution {
  std::vector<Eigen::MatrixXd> K_o;
  std::vector<Eigen::VectorXd> v_o;
  std::vector<Eigen::MatrixXd> P;
  std::vector<Eigen::VectorXd> p;
};

/// Backward sweep of the coupled (P, p) equations with P(T) = Pi_k, p(T) = pi_k.
/// Throws RiccatiFailure when R_k loses definiteness or the sweep diverges.
LqSolution solve_lq(const LinearDynamics& lin, const NewtonWeights& weights);

/// Variant taking raw weights, for synthetic LQ problems.
LqSolution solve_lq(const LinearDynamics& lin, const RiccatiWeights& weights);

struct NewtonUpdate {
  TangentCurve zeta;
  double Dg = 0.0;
};

/// z' = A z + B v, v = -v_o - K_o z, z(0) = 0; Dg = pi z(T) + int q z + r v dt.
NewtonUpdate compute_update(const LinearDynamics& lin, const LqSolution& lq,
                            const QuadraticExpansion& expansion);

}  // namespace qpronto
