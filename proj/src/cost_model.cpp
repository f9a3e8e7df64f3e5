#include "qpronto/cost_model.hpp"

#include <cmath>
#include <sstream>

#include "qpronto/errors.hpp"

namespace qpronto {

Schedule Schedule::constant(double value) {
  Schedule s;
  s.kind_ = Kind::constant;
  s.offset_ = value;
  return s;
}

Schedule Schedule::tanh_ramp(double scale, double shift, double offset, double rate) {
  Schedule s;
  s.kind_ = Kind::tanh_ramp;
  s.scale_ = scale;
  s.shift_ = shift;
  s.offset_ = offset;
  s.rate_ = rate;
  return s;
}

Schedule Schedule::tabulated(std::vector<double> values) {
  Schedule s;
  s.kind_ = Kind::tabulated;
  s.values_ = std::move(values);
  return s;
}

void Schedule::check_grid(const TimeGrid& grid) const {
  if (kind_ == Kind::tabulated && values_.size() != static_cast<std::size_t>(grid.points())) {
    std::ostringstream msg;
    msg << "tabulated schedule has " << values_.size() << " values, grid has " << grid.points()
        << " nodes";
    throw InputError(msg.str());
  }
}

double Schedule::at(const TimeGrid& grid, int node) const {
  switch (kind_) {
    case Kind::constant: return offset_;
    case Kind::tanh_ramp: return offset_ + scale_ * std::tanh(rate_ * grid.time(node) - shift_);
    case Kind::tabulated: return values_.at(static_cast<std::size_t>(node));
  }
  return offset_;
}

TerminalCost TerminalCost::zero_phase(const RealState& target) {
  TerminalCost c;
  c.kind_ = Kind::zero_phase;
  c.weight_ = Eigen::MatrixXd::Identity(target.size(), target.size());
  c.center_ = target;
  return c;
}

TerminalCost TerminalCost::arbitrary_phase(const RealState& target) {
  const WaveVector psi = extract_state(target);
  const double norm = psi.norm();
  if (norm == 0.0) throw InputError("arbitrary-phase target is zero");
  const Eigen::VectorXcd unit = psi / norm;
  const Eigen::MatrixXcd gamma =
      Eigen::MatrixXcd::Identity(psi.size(), psi.size()) - unit * unit.adjoint();
  TerminalCost c;
  c.kind_ = Kind::arbitrary_phase;
  c.weight_ = embed_quadratic(gamma).matrix;
  c.center_ = RealState::Zero(target.size());
  return c;
}

TerminalCost TerminalCost::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw InputError("terminal weight must be positive");
  TerminalCost c = *this;
  c.weight_ *= factor;
  return c;
}

TerminalCost TerminalCost::gate(const RealState& stacked_targets, int n,
                                const std::vector<int>& active) {
  const Eigen::Index total = stacked_targets.size() / 2;
  if (n <= 0 || total != static_cast<Eigen::Index>(n) * n) {
    throw InputError("gate target must stack n columns of length n");
  }
  Eigen::VectorXd mask = Eigen::VectorXd::Zero(2 * total);
  for (int col : active) {
    if (col < 0 || col >= n) throw InputError("gate active column out of range");
    mask.segment(static_cast<Eigen::Index>(col) * n, n).setOnes();
    mask.segment(total + static_cast<Eigen::Index>(col) * n, n).setOnes();
  }
  TerminalCost c;
  c.kind_ = Kind::gate;
  c.weight_ = mask.asDiagonal();
  c.center_ = stacked_targets.cwiseProduct(mask);
  return c;
}

double TerminalCost::value(const RealState& x) const {
  const Eigen::VectorXd d = x - center_;
  return 0.5 * d.dot(weight_ * d);
}

Eigen::MatrixXd IncrementalCost::effort(const TimeGrid& grid, int node) const {
  Eigen::MatrixXd r = effort_base;
  for (std::size_t j = 0; j < effort_diagonal.size(); ++j) {
    const auto k = static_cast<Eigen::Index>(j);
    r(k, k) += effort_diagonal[j].at(grid, node);
  }
  return r;
}

Eigen::MatrixXd IncrementalCost::state_weight(const TimeGrid& grid, int node,
                                              Eigen::Index state_dim) const {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(state_dim, state_dim);
  for (const auto& pen : populations) q += pen.weight.at(grid, node) * pen.projector.matrix;
  return q;
}

double IncrementalCost::value(const TimeGrid& grid, int node, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& u) const {
  double l = 0.5 * u.dot(effort(grid, node) * u);
  for (const auto& pen : populations) {
    l += 0.5 * pen.weight.at(grid, node) * x.dot(pen.projector.matrix * x);
  }
  return l;
}

void IncrementalCost::validate(const TimeGrid& grid, Eigen::Index state_dim,
                               Eigen::Index input_dim) const {
  if (effort_base.rows() != input_dim || effort_base.cols() != input_dim) {
    throw InputError("effort weight must be " + std::to_string(input_dim) + "x" +
                     std::to_string(input_dim));
  }
  if (static_cast<Eigen::Index>(effort_diagonal.size()) > input_dim) {
    throw InputError("more effort schedules than inputs");
  }
  for (const auto& s : effort_diagonal) s.check_grid(grid);
  for (const auto& pen : populations) {
    pen.weight.check_grid(grid);
    if (pen.projector.matrix.rows() != state_dim) {
      throw InputError("population projector has the wrong dimension");
    }
  }
  for (int i = 0; i < grid.points(); ++i) {
    const Eigen::MatrixXd r = effort(grid, i);
    if ((r - r.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, r.cwiseAbs().maxCoeff())) {
      throw InputError("effort weight is not symmetric");
    }
    const double min_eig =
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(r, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    if (!(min_eig > 0.0)) {
      std::ostringstream msg;
      msg << "effort weight is not positive definite at t = " << grid.time(i)
          << " (min eigenvalue " << min_eig << ")";
      throw InputError(msg.str());
    }
    for (const auto& pen : populations) {
      if (pen.weight.at(grid, i) < 0.0) {
        throw InputError("population penalty weight is negative at t = " + std::to_string(grid.time(i)));
      }
    }
  }
}

double eval_cost(const TerminalCost& terminal, const IncrementalCost& incremental, const Curve& xi) {
  const TimeGrid& grid = xi.grid;
  double running = 0.0;
  for (int i = 0; i < grid.points(); ++i) {
    running += grid.trapezoid_weight(i) *
               incremental.value(grid, i, xi.states.col(i), xi.inputs.col(i));
  }
  return terminal.value(xi.states.col(grid.steps)) + running;
}

QuadraticExpansion expand(const TerminalCost& terminal, const IncrementalCost& incremental,
                          const Curve& xi) {
  const TimeGrid& grid = xi.grid;
  QuadraticExpansion e;
  e.grid = grid;
  e.incremental = incremental;
  e.pi = terminal.gradient(xi.states.col(grid.steps));
  e.Pi = terminal.weight();
  e.q.resize(xi.state_dim(), grid.points());
  e.r.resize(xi.input_dim(), grid.points());
  for (int i = 0; i < grid.points(); ++i) {
    e.q.col(i) = incremental.state_weight(grid, i, xi.state_dim()) * xi.states.col(i);
    e.r.col(i) = incremental.effort(grid, i) * xi.inputs.col(i);
  }
  return e;
}

double directional_derivative(const QuadraticExpansion& e, const TangentCurve& zeta) {
  const TimeGrid& grid = e.grid;
  double d = e.pi.dot(zeta.z.col(grid.steps));
  for (int i = 0; i < grid.points(); ++i) {
    d += grid.trapezoid_weight(i) * (e.q.col(i).dot(zeta.z.col(i)) + e.r.col(i).dot(zeta.v.col(i)));
  }
  return d;
}

}  // namespace qpronto
