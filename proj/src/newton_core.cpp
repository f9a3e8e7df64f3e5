#include "qpronto/newton_core.hpp"

#include "qpronto/errors.hpp"
#include "qpronto/projection.hpp"

namespace qpronto {

const char* to_string(StepKind kind) {
  return kind == StepKind::full_newton ? "full_newton" : "quasi_newton";
}

AdjointCurve solve_adjoint(const LinearDynamics& lin, const GainSchedule& regulator,
                           const QuadraticExpansion& expansion) {
  const TimeGrid& grid = lin.grid();
  const double h = grid.dt();
  if (regulator.K.size() != static_cast<std::size_t>(grid.points())) {
    throw InputError("adjoint: regulator gains do not match the grid");
  }

  // Closed-loop drift and forcing at a node: -chi' = F^T chi + c.
  struct Point {
    Eigen::MatrixXd Ft;
    Eigen::VectorXd c;
  };
  auto node = [&](int i) {
    const Eigen::MatrixXd& K = regulator.K[static_cast<std::size_t>(i)];
    Point p;
    p.Ft = (lin.A(i) - lin.B(i) * K).transpose();
    p.c = expansion.q.col(i) - K.transpose() * expansion.r.col(i);
    return p;
  };

  AdjointCurve out{Eigen::MatrixXd(lin.state_dim(), grid.points())};
  Eigen::VectorXd chi = expansion.pi;
  out.chi.col(grid.steps) = chi;
  Point end = node(grid.steps);
  for (int i = grid.steps - 1; i >= 0; --i) {
    Point start = node(i);
    const Point mid{0.5 * (start.Ft + end.Ft), 0.5 * (start.c + end.c)};
    const Eigen::VectorXd k1 = end.Ft * chi + end.c;
    const Eigen::VectorXd k2 = mid.Ft * (chi + 0.5 * h * k1) + mid.c;
    const Eigen::VectorXd k3 = mid.Ft * (chi + 0.5 * h * k2) + mid.c;
    const Eigen::VectorXd k4 = start.Ft * (chi + h * k3) + start.c;
    chi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!chi.allFinite()) throw NonFiniteError("adjoint overflowed at node " + std::to_string(i));
    out.chi.col(i) = chi;
    end = std::move(start);
  }
  return out;
}

CurvatureTerms curvature_terms(const ControlHamiltonian& model, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u, const Eigen::VectorXd& chi) {
  const Eigen::Index m = model.input_dim();
  CurvatureTerms t{Eigen::MatrixXd(model.state_dim(), m), Eigen::MatrixXd::Zero(m, m)};
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& ch = model.channels[static_cast<std::size_t>(j)];
    const Eigen::MatrixXd& h = ch.generator.matrix;
    t.S.col(j).noalias() = ch.f.d1(u(j)) * (h.transpose() * chi);
    const double d2 = ch.f.d2(u(j));
    t.R(j, j) = d2 == 0.0 ? 0.0 : d2 * chi.dot(h * x);
  }
  return t;
}

Eigen::MatrixXd NewtonWeights::S(int node) const {
  Eigen::MatrixXd s = expansion.Sbar(node);
  if (!S_tilde.empty()) s += S_tilde[static_cast<std::size_t>(node)];
  return s;
}

Eigen::MatrixXd NewtonWeights::R(int node) const {
  Eigen::MatrixXd r = expansion.Rbar(node);
  if (!R_tilde.empty()) r += R_tilde[static_cast<std::size_t>(node)];
  return r;
}

NewtonWeights quasi_newton_weights(const QuadraticExpansion& expansion) {
  NewtonWeights w;
  w.kind = StepKind::quasi_newton;
  w.expansion = expansion;
  return w;
}

NewtonWeights full_newton_weights(const ControlHamiltonian& model, const Trajectory& xi,
                                  const AdjointCurve& adjoint, const QuadraticExpansion& expansion) {
  NewtonWeights w;
  w.kind = StepKind::full_newton;
  w.expansion = expansion;
  const auto points = static_cast<std::size_t>(xi.grid.points());
  w.S_tilde.reserve(points);
  w.R_tilde.reserve(points);
  for (int i = 0; i < xi.grid.points(); ++i) {
    CurvatureTerms t =
        curvature_terms(model, xi.states.col(i), xi.inputs.col(i), adjoint.chi.col(i));
    w.S_tilde.push_back(std::move(t.S));
    w.R_tilde.push_back(std::move(t.R));
  }
  return w;
}

LqSolution solve_lq(const LinearDynamics& lin, const RiccatiWeights& weights) {
  RiccatiSolution sol = solve_riccati(lin, weights);
  return LqSolution{std::move(sol.K), std::move(sol.v), std::move(sol.P), std::move(sol.p)};
}

LqSolution solve_lq(const LinearDynamics& lin, const NewtonWeights& weights) {
  const NewtonWeights* w = &weights;
  const QuadraticExpansion* e = &weights.expansion;
  RiccatiWeights rw;
  rw.Q = [w](int i) { return w->Q(i); };
  rw.R = [w](int i) { return w->R(i); };
  rw.S = [w](int i) { return w->S(i); };
  rw.q = [e](int i) -> Eigen::VectorXd { return e->q.col(i); };
  rw.r = [e](int i) -> Eigen::VectorXd { return e->r.col(i); };
  rw.Pi = weights.Pi();
  rw.pi = e->pi;
  return solve_lq(lin, rw);
}

NewtonUpdate compute_update(const LinearDynamics& lin, const LqSolution& lq,
                            const QuadraticExpansion& expansion) {
  const TimeGrid& grid = lin.grid();
  Eigen::MatrixXd feedforward(lin.input_dim(), grid.points());
  for (int i = 0; i < grid.points(); ++i) feedforward.col(i) = -lq.v_o[static_cast<std::size_t>(i)];
  NewtonUpdate up;
  up.zeta = integrate_linear_feedback(lin, lq.K_o, feedforward);
  up.Dg = directional_derivative(expansion, up.zeta);
  return up;
}

}  // namespace qpronto
