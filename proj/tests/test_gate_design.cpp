#include "doctest.h"

#include <complex>

#include "qpronto/cost_model.hpp"
#include "qpronto/errors.hpp"
#include "qpronto/gate_design.hpp"
#include "qpronto/projection.hpp"
#include "qpronto/real_embedding.hpp"
#include "test_support.hpp"

using namespace qpronto;
using namespace qpronto::testing;
using cd = std::complex<double>;

namespace {

GateProblem random_gate(Eigen::Index n, std::vector<int> active) {
  GateProblem g;
  g.base = make_control_hamiltonian(random_hermitian(n), {random_hermitian(n), random_hermitian(n)},
                                    {SmoothScalarFn::identity(), SmoothScalarFn::sine()});
  g.target = Eigen::HouseholderQR<Eigen::MatrixXcd>(random_complex(n)).householderQ();
  g.active = std::move(active);
  return g;
}

// Real coordinates of wavefunction b inside a stacked state [Re psi_0..; Im psi_0..].
Eigen::VectorXd block_of(const Eigen::VectorXd& x, Eigen::Index b, Eigen::Index n) {
  const Eigen::Index total = x.size() / 2;
  Eigen::VectorXd out(2 * n);
  out << x.segment(b * n, n), x.segment(total + b * n, n);
  return out;
}

Eigen::MatrixXcd evolve(const GateProblem& g, const Curve& xi) {
  return stacked_columns(xi, g.n(), xi.grid.steps);
}

}  // namespace

TEST_CASE("one-wavefunction gate reduces to the state problem") {
  GateProblem g = random_gate(3, {0});
  const StackedGate s = stack_problem(g);
  CHECK(s.model.state_dim() == 18);
  const Eigen::MatrixXd u = random_matrix(2, 1);
  // Block 0 of the stacked generator is the single-wavefunction generator.
  const Eigen::MatrixXd full = eval_generator(s.model, u.col(0)).matrix;
  const Eigen::MatrixXd single = eval_generator(g.base, u.col(0)).matrix;
  const Eigen::VectorXd x = random_vector(18);
  for (Eigen::Index b = 0; b < 3; ++b) {
    CHECK(max_abs(block_of(full * x, b, 3) - single * block_of(x, b, 3)) <= 1e-14);
  }
  const RealState target = embed_state(g.target.col(0));
  const TerminalCost single_cost = TerminalCost::zero_phase(target);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd xs = random_vector(18);
    CHECK(s.terminal.value(xs) == doctest::Approx(single_cost.value(block_of(xs, 0, 3))).epsilon(1e-13));
  }
}

TEST_CASE("free evolution target has zero terminal cost") {
  GateProblem g = random_gate(3, {0, 1, 2});
  const TimeGrid grid{1.0, 800};
  const Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(2, grid.points());
  // Target is the RK4 propagator itself, so the reached state is the target.
  g.target = Eigen::MatrixXcd::Identity(3, 3);
  StackedGate s = stack_problem(g);
  const Trajectory xi = project(s.model, Curve{grid, Eigen::MatrixXd::Zero(18, grid.points()), mu},
                                GainSchedule::zero(grid, 2, 18), s.x0);
  g.target = evolve(g, xi);
  s = stack_problem(g);
  CHECK(s.terminal.value(xi.states.col(grid.steps)) <= 1e-24);
  CHECK(gate_fidelity(xi, g) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fidelity values") {
  GateProblem g;
  g.base = make_control_hamiltonian(Eigen::MatrixXcd::Zero(2, 2), {Eigen::MatrixXcd::Identity(2, 2)}, {SmoothScalarFn::identity()});
  g.target = Eigen::MatrixXcd::Identity(2, 2);
  g.active = {0, 1};
  CHECK(gate_fidelity(g.target, g) == doctest::Approx(1.0).epsilon(1e-15));
  Eigen::MatrixXcd x(2, 2);
  x << 0, 1, 1, 0;
  // (2 + 0) / 6
  CHECK(gate_fidelity(x, g) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXcd u = Eigen::HouseholderQR<Eigen::MatrixXcd>(random_complex(2)).householderQ();
    const cd phase = std::polar(1.0, uniform(-3.0, 3.0));
    CHECK(std::abs(gate_fidelity(u * phase, g) - gate_fidelity(u, g)) <= 1e-12);
    const double f = gate_fidelity(u, g);
    CHECK(f >= 1.0 / 3.0 - 1e-12);
    CHECK(f <= 1.0 + 1e-12);
  }
}

TEST_CASE("fidelity restricted to active columns") {
  GateProblem g;
  g.base = make_control_hamiltonian(Eigen::MatrixXcd::Zero(3, 3), {Eigen::MatrixXcd::Identity(3, 3)}, {SmoothScalarFn::identity()});
  g.target = Eigen::MatrixXcd::Identity(3, 3);
  g.active = {0, 1};
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(3, 3);
  u(2, 2) = cd(0, 1);
  CHECK(gate_fidelity(u, g) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("population penalty is stacked on active blocks only") {
  const GateProblem g = random_gate(3, {0, 2});
  const Eigen::VectorXcd e2 = Eigen::VectorXcd::Unit(3, 2);
  const RealQuadraticCost q = embed_quadratic(e2 * e2.adjoint());
  const RealQuadraticCost stacked = stack_penalty(g, q);
  REQUIRE(stacked.matrix.rows() == 18);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd x = random_vector(18);
    const double expected = block_of(x, 0, 3).dot(q.matrix * block_of(x, 0, 3)) +
                            block_of(x, 2, 3).dot(q.matrix * block_of(x, 2, 3));
    CHECK(x.dot(stacked.matrix * x) == doctest::Approx(expected).epsilon(1e-13));
  }
  Eigen::VectorXd only1 = Eigen::VectorXd::Zero(18);
  only1(3) = 0.3;
  only1(5) = 0.8;
  only1(14) = -0.5;
  CHECK((stacked.matrix * only1).norm() == 0.0);
}

TEST_CASE("gate validation") {
  GateProblem g = random_gate(3, {0, 1});
  CHECK_NOTHROW(g.validate());
  g.target(0, 0) += 0.1;
  CHECK_THROWS_AS(g.validate(), InputError);
  g = random_gate(3, {0, 3});
  CHECK_THROWS_AS(g.validate(), InputError);
  g = random_gate(3, {});
  CHECK_THROWS_AS(g.validate(), InputError);
  g = random_gate(3, {1, 1});
  CHECK_THROWS_AS(g.validate(), InputError);
}

TEST_CASE("stacked columns preserve orthonormality along a driven trajectory") {
  const GateProblem g = random_gate(3, {0, 1, 2});
  const StackedGate s = stack_problem(g);
  const TimeGrid grid{1.0, 1000};
  const Trajectory xi = project(s.model, Curve{grid, Eigen::MatrixXd::Zero(18, grid.points()), smooth_inputs(grid, 2)},
                                GainSchedule::zero(grid, 2, 18), s.x0);
  const Eigen::MatrixXcd u = evolve(g, xi);
  CHECK(max_abs((u.adjoint() * u - Eigen::MatrixXcd::Identity(3, 3)).cwiseAbs()) <= 1e-7);
  CHECK(max_abs((stacked_columns(xi, 3, 0) - Eigen::MatrixXcd::Identity(3, 3)).cwiseAbs()) == 0.0);
}
