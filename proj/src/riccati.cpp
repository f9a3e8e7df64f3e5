#include "qpronto/riccati.hpp"

#include <sstream>

#include "qpronto/errors.hpp"

namespace qpronto {

namespace {

constexpr double kMinEigR = 1e-10;
constexpr double kMaxRiccati = 1e12;

// Data at one stage time of the sweep.
struct StagePoint {
  Eigen::MatrixXd A, B, Q, S;
  Eigen::VectorXd q, r;
  Eigen::LDLT<Eigen::MatrixXd> R_ldlt;
  Eigen::MatrixXd R;
};

struct Derivative {
  Eigen::MatrixXd dP;
  Eigen::VectorXd dp;
};

class Sweep {
 public:
  Sweep(const LinearDynamics& dyn, const RiccatiWeights& w)
      : dyn_(dyn), w_(w), n_(dyn.state_dim()), m_(dyn.input_dim()), affine_(w.has_affine_terms()) {}

  StagePoint node(int i) const {
    StagePoint s;
    s.A = dyn_.A(i);
    s.B = dyn_.B(i);
    s.Q = w_.Q ? w_.Q(i) : Eigen::MatrixXd::Zero(n_, n_);
    s.R = w_.R(i);
    s.S = w_.S ? w_.S(i) : Eigen::MatrixXd::Zero(n_, m_);
    s.q = w_.q ? w_.q(i) : Eigen::VectorXd::Zero(n_);
    s.r = w_.r ? w_.r(i) : Eigen::VectorXd::Zero(m_);
    check_positive(s.R, i);
    s.R_ldlt.compute(s.R);
    return s;
  }

  static StagePoint midpoint(const StagePoint& a, const StagePoint& b) {
    StagePoint s;
    s.A = 0.5 * (a.A + b.A);
    s.B = 0.5 * (a.B + b.B);
    s.Q = 0.5 * (a.Q + b.Q);
    s.R = 0.5 * (a.R + b.R);
    s.S = 0.5 * (a.S + b.S);
    s.q = 0.5 * (a.q + b.q);
    s.r = 0.5 * (a.r + b.r);
    s.R_ldlt.compute(s.R);
    return s;
  }

  Derivative rhs(const StagePoint& s, const Eigen::MatrixXd& P, const Eigen::VectorXd& p) const {
    Derivative d;
    const Eigen::MatrixXd M = s.B.transpose() * P + s.S.transpose();
    const Eigen::MatrixXd K = s.R_ldlt.solve(M);
    d.dP.noalias() = s.A.transpose() * P;
    d.dP += d.dP.transpose().eval();
    d.dP.noalias() -= M.transpose() * K;
    d.dP += s.Q;
    if (affine_) {
      d.dp.noalias() = s.A.transpose() * p;
      d.dp.noalias() -= K.transpose() * (s.B.transpose() * p);
      d.dp.noalias() -= K.transpose() * s.r;
      d.dp += s.q;
    } else {
      d.dp = Eigen::VectorXd::Zero(n_);
    }
    return d;
  }

  void gains(const StagePoint& s, const Eigen::MatrixXd& P, const Eigen::VectorXd& p,
             Eigen::MatrixXd& K, Eigen::VectorXd& v) const {
    K = s.R_ldlt.solve(s.B.transpose() * P + s.S.transpose());
    v = affine_ ? Eigen::VectorXd(s.R_ldlt.solve(s.B.transpose() * p + s.r))
                : Eigen::VectorXd::Zero(m_);
  }

 private:
  static void check_positive(const Eigen::MatrixXd& R, int node) {
    const double min_eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(
                               0.5 * (R + R.transpose()), Eigen::EigenvaluesOnly)
                               .eigenvalues()
                               .minCoeff();
    if (!(min_eig > kMinEigR)) {
      std::ostringstream msg;
      msg << "input weight not positive definite at node " << node << " (min eigenvalue "
          << min_eig << ")";
      throw RiccatiFailure(msg.str());
    }
  }

  const LinearDynamics& dyn_;
  const RiccatiWeights& w_;
  Eigen::Index n_, m_;
  bool affine_;
};

void check_state(const Eigen::MatrixXd& P, const Eigen::VectorXd& p, int node) {
  if (!P.allFinite() || !p.allFinite()) {
    throw RiccatiFailure("Riccati solution became non-finite at node " + std::to_string(node));
  }
  if (P.size() > 0 && P.cwiseAbs().maxCoeff() > kMaxRiccati) {
    throw RiccatiFailure("Riccati solution diverged at node " + std::to_string(node));
  }
}

}  // namespace

RiccatiSolution solve_riccati(const LinearDynamics& dyn, const RiccatiWeights& w) {
  if (!w.R) throw InputError("Riccati weights need an input weight R");
  const TimeGrid& grid = dyn.grid();
  const Eigen::Index n = dyn.state_dim();
  const auto points = static_cast<std::size_t>(grid.points());
  const double h = grid.dt();
  Sweep sweep(dyn, w);

  RiccatiSolution sol;
  sol.P.resize(points);
  sol.p.resize(points);
  sol.K.resize(points);
  sol.v.resize(points);

  Eigen::MatrixXd P = w.Pi.size() ? w.Pi : Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd p = w.pi.size() ? w.pi : Eigen::VectorXd::Zero(n);
  P = 0.5 * (P + P.transpose()).eval();

  StagePoint end = sweep.node(grid.steps);
  sol.P.back() = P;
  sol.p.back() = p;
  sweep.gains(end, P, p, sol.K.back(), sol.v.back());

  for (int i = grid.steps - 1; i >= 0; --i) {
    StagePoint start = sweep.node(i);
    const StagePoint mid = Sweep::midpoint(start, end);
    const Derivative k1 = sweep.rhs(end, P, p);
    const Derivative k2 = sweep.rhs(mid, P + 0.5 * h * k1.dP, p + 0.5 * h * k1.dp);
    const Derivative k3 = sweep.rhs(mid, P + 0.5 * h * k2.dP, p + 0.5 * h * k2.dp);
    const Derivative k4 = sweep.rhs(start, P + h * k3.dP, p + h * k3.dp);
    P += (h / 6.0) * (k1.dP + 2.0 * k2.dP + 2.0 * k3.dP + k4.dP);
    p += (h / 6.0) * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
    P = 0.5 * (P + P.transpose()).eval();
    check_state(P, p, i);

    const auto idx = static_cast<std::size_t>(i);
    sol.P[idx] = P;
    sol.p[idx] = p;
    sweep.gains(start, P, p, sol.K[idx], sol.v[idx]);
    end = std::move(start);
  }
  return sol;
}

}  // namespace qpronto
