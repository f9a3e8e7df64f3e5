#include "doctest.h"

#include "qpronto/cost_model.hpp"
#include "qpronto/errors.hpp"
#include "qpronto/linear_dynamics.hpp"
#include "qpronto/newton_core.hpp"
#include "qpronto/projection.hpp"
#include "qpronto/real_embedding.hpp"
#include "qpronto/regulator.hpp"
#include "test_support.hpp"

using namespace qpronto;
using namespace qpronto::testing;

namespace {

QuadraticExpansion scalar_expansion(const TimeGrid& grid, double pi) {
  QuadraticExpansion e;
  e.grid = grid;
  e.pi = Eigen::VectorXd::Constant(1, pi);
  e.Pi = Eigen::MatrixXd::Zero(1, 1);
  e.q = Eigen::MatrixXd::Zero(1, grid.points());
  e.r = Eigen::MatrixXd::Zero(1, grid.points());
  e.incremental.effort_base = Eigen::MatrixXd::Identity(1, 1);
  return e;
}

SampledDynamics scalar_system(const TimeGrid& grid, double a, double b) {
  return SampledDynamics(grid, std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(grid.points()), Eigen::MatrixXd::Constant(1, 1, a)),
                         std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(grid.points()), Eigen::MatrixXd::Constant(1, 1, b)));
}

}  // namespace

// -chi' = a chi, chi(T) = 1  =>  chi(t) = exp(a (T - t)).
TEST_CASE("adjoint of a scalar system") {
  const TimeGrid grid{2.0, 1000};
  const double a = -0.8;
  const AdjointCurve adj = solve_adjoint(scalar_system(grid, a, 1.0), GainSchedule::zero(grid, 1, 1),
                                         scalar_expansion(grid, 1.0));
  for (int i = 0; i < grid.points(); i += 100) {
    CHECK(adj.chi(0, i) == doctest::Approx(std::exp(a * (grid.horizon - grid.time(i)))).epsilon(1e-10));
  }
}

// With K_r = k: -chi' = (a - b k) chi - k r, chi(T) = pi.
TEST_CASE("adjoint sees the closed-loop matrix") {
  const TimeGrid grid{1.5, 1000};
  const double a = 0.4, b = 2.0, k = 0.7, r = 0.3, pi = 1.2;
  GainSchedule g = GainSchedule::zero(grid, 1, 1);
  for (auto& K : g.K) K(0, 0) = k;
  QuadraticExpansion e = scalar_expansion(grid, pi);
  e.r.setConstant(r);
  const AdjointCurve adj = solve_adjoint(scalar_system(grid, a, b), g, e);
  const double c = a - b * k;
  for (int i = 0; i < grid.points(); i += 125) {
    const double s = grid.horizon - grid.time(i);
    const double expected = pi * std::exp(c * s) - k * r * (std::exp(c * s) - 1.0) / c;
    CHECK(adj.chi(0, i) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("curvature terms reproduce chi^T Lambda") {
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const ControlHamiltonian model = random_model(3, 4, true);
    const Eigen::VectorXd x = random_vector(6), u = random_vector(4), chi = random_vector(6);
    const Eigen::VectorXd z = random_vector(6), v = random_vector(4);
    const CurvatureTerms c = curvature_terms(model, x, u, chi);
    Eigen::VectorXd zeta(10);
    zeta << z, v;
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(10, 10);
    block.topRightCorner(6, 4) = c.S;
    block.bottomLeftCorner(4, 6) = c.S.transpose();
    block.bottomRightCorner(4, 4) = c.R;
    const double lhs = zeta.dot(block * zeta);
    const double rhs = chi.dot(second_order_term(model, x, u, z, v));
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs)));
  }
  CHECK(worst <= 1e-10);
}

namespace {

struct NewtonFixture {
  TimeGrid grid{2.0, 400};
  ControlHamiltonian model = random_model(3, 2, true);
  RealState x0 = embed_state(random_unit(3));
  TerminalCost terminal = TerminalCost::zero_phase(embed_state(random_unit(3)));
  IncrementalCost inc;
  Trajectory xi;
  GainSchedule gains;

  NewtonFixture() {
    inc.effort_base = 0.1 * Eigen::MatrixXd::Identity(2, 2);
    const Eigen::VectorXcd e2 = Eigen::VectorXcd::Unit(3, 2);
    inc.populations.push_back({Schedule::constant(0.3), embed_quadratic(e2 * e2.adjoint())});
    const Curve open{grid, Eigen::MatrixXd::Zero(6, grid.points()), smooth_inputs(grid, 2)};
    xi = project(model, open, GainSchedule::zero(grid, 2, 6), x0);
    gains = solve_regulator(model, xi, RegulatorSpec{});
  }

  double g(const Curve& eta) const {
    return eval_cost(terminal, inc, project(model, eta, gains, x0));
  }
};

}  // namespace

TEST_CASE("Dh matches finite differences along tangent directions") {
  NewtonFixture f;
  const TrajectoryLinearization lin(f.model, f.xi);
  const QuadraticExpansion e = expand(f.terminal, f.inc, f.xi);
  for (int trial = 0; trial < 5; ++trial) {
    const TangentCurve gamma{random_matrix(6, f.grid.points()), random_matrix(2, f.grid.points())};
    const TangentCurve zeta = tangent_project(lin, f.gains, gamma);
    const double analytic = directional_derivative(e, zeta);
    const double eps = 1e-6;
    const double fd_h = (eval_cost(f.terminal, f.inc, step_along(f.xi, zeta, eps)) -
                         eval_cost(f.terminal, f.inc, step_along(f.xi, zeta, -eps))) / (2 * eps);
    CHECK(std::abs(analytic - fd_h) <= 1e-4 * std::abs(fd_h));
    // Along tangent directions D(h o P) = Dh, since DP(xi) fixes the tangent space.
    const double fd_g = (f.g(step_along(f.xi, zeta, eps)) - f.g(step_along(f.xi, zeta, -eps))) / (2 * eps);
    CHECK(std::abs(analytic - fd_g) <= 1e-4 * std::abs(fd_g));
  }
}

TEST_CASE("second derivative of g matches the full-Newton quadratic form") {
  NewtonFixture f;
  const TrajectoryLinearization lin(f.model, f.xi);
  const QuadraticExpansion e = expand(f.terminal, f.inc, f.xi);
  const AdjointCurve adj = solve_adjoint(lin, f.gains, e);
  const NewtonWeights w = full_newton_weights(f.model, f.xi, adj, e);
  // Smooth direction; node-to-node noise would dominate the quadrature error.
  const TangentCurve zeta = tangent_project(lin, f.gains, TangentCurve{Eigen::MatrixXd::Zero(6, f.grid.points()), smooth_inputs(f.grid, 2)});
  // D^2 g(xi)(zeta, zeta) = zeta^T [Q S; S^T R] zeta integrated, plus the terminal term.
  double quad = zeta.z.col(f.grid.steps).dot(w.Pi() * zeta.z.col(f.grid.steps));
  for (int i = 0; i < f.grid.points(); ++i) {
    const Eigen::VectorXd z = zeta.z.col(i), v = zeta.v.col(i);
    quad += f.grid.trapezoid_weight(i) * (z.dot(w.Q(i) * z) + 2.0 * z.dot(w.S(i) * v) + v.dot(w.R(i) * v));
  }
  const double eps = 1e-3;
  const double fd = (f.g(step_along(f.xi, zeta, eps)) - 2.0 * f.g(f.xi) + f.g(step_along(f.xi, zeta, -eps))) / (eps * eps);
  MESSAGE("second-order model " << quad << ", finite difference " << fd);
  CHECK(std::abs(quad - fd) <= 1e-3 * std::abs(fd));
}

TEST_CASE("quasi-Newton update is a descent direction") {
  NewtonFixture f;
  const TrajectoryLinearization lin(f.model, f.xi);
  const QuadraticExpansion e = expand(f.terminal, f.inc, f.xi);
  const LqSolution lq = solve_lq(lin, quasi_newton_weights(e));
  const NewtonUpdate up = compute_update(lin, lq, e);
  CHECK(up.Dg < 0.0);
  CHECK(max_abs(up.zeta.z.col(0)) == 0.0);
  const double eps = 1e-6;
  const double fd = (f.g(step_along(f.xi, up.zeta, eps)) - f.g(step_along(f.xi, up.zeta, -eps))) / (2 * eps);
  CHECK(std::abs(up.Dg - fd) <= 1e-4 * std::abs(fd));
}

TEST_CASE("quasi-Newton weights drop the curvature terms") {
  NewtonFixture f;
  const QuadraticExpansion e = expand(f.terminal, f.inc, f.xi);
  const NewtonWeights w = quasi_newton_weights(e);
  CHECK(w.kind == StepKind::quasi_newton);
  CHECK(max_abs(w.S(10)) == 0.0);
  CHECK(max_abs(w.R(10) - e.Rbar(10)) == 0.0);
  CHECK(std::string(to_string(StepKind::full_newton)) == "full_newton");
}
