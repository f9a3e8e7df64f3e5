#include "qpronto/real_embedding.hpp"

#include <sstream>

#include "qpronto/errors.hpp"

namespace qpronto {

namespace {

constexpr double kHermitianTol = 1e-12;

Eigen::MatrixXcd checked_hermitian(const Eigen::MatrixXcd& h, const char* what) {
  if (h.rows() != h.cols()) {
    std::ostringstream msg;
    msg << what << ": matrix is " << h.rows() << "x" << h.cols() << ", expected square";
    throw InputError(msg.str());
  }
  const double defect = hermitian_defect(h);
  if (defect > kHermitianTol) {
    std::ostringstream msg;
    msg << what << ": matrix is not Hermitian (relative defect " << defect << ")";
    throw InputError(msg.str());
  }
  return 0.5 * (h + h.adjoint());
}

// [[Re M, -Im M], [Im M, Re M]]: the real matrix acting on [Re psi; Im psi] like M acts on psi.
Eigen::MatrixXd induced_real(const Eigen::MatrixXcd& m) {
  const Eigen::Index n = m.rows();
  Eigen::MatrixXd out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = m.real();
  out.topRightCorner(n, n) = -m.imag();
  out.bottomLeftCorner(n, n) = m.imag();
  out.bottomRightCorner(n, n) = m.real();
  return out;
}

}  // namespace

RealGenerator RealGenerator::from_matrix(Eigen::MatrixXd m) {
  if (m.rows() != m.cols()) throw InputError("generator must be square");
  const double scale = m.cwiseAbs().maxCoeff();
  const double defect = (m + m.transpose()).cwiseAbs().maxCoeff();
  if (defect > 1e-12 * scale) {
    std::ostringstream msg;
    msg << "generator is not skew-symmetric (defect " << defect << ")";
    throw InputError(msg.str());
  }
  return RealGenerator{std::move(m)};
}

double hermitian_defect(const Eigen::MatrixXcd& h) {
  if (h.size() == 0) return 0.0;
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  return (h - h.adjoint()).cwiseAbs().maxCoeff() / scale;
}

RealState embed_state(const WaveVector& psi) {
  const Eigen::Index n = psi.size();
  RealState x(2 * n);
  x.head(n) = psi.real();
  x.tail(n) = psi.imag();
  return x;
}

WaveVector extract_state(const RealState& x) {
  if (x.size() % 2 != 0) {
    std::ostringstream msg;
    msg << "real state has odd length " << x.size();
    throw InputError(msg.str());
  }
  const Eigen::Index n = x.size() / 2;
  WaveVector psi(n);
  psi.real() = x.head(n);
  psi.imag() = x.tail(n);
  return psi;
}

RealGenerator embed_generator(const Eigen::MatrixXcd& hamiltonian) {
  const Eigen::MatrixXcd h = checked_hermitian(hamiltonian, "Hamiltonian");
  const Eigen::MatrixXcd minus_i_h = std::complex<double>(0.0, -1.0) * h;
  Eigen::MatrixXd g = induced_real(minus_i_h);
  // Remove rounding asymmetry so the skew invariant holds exactly.
  g = 0.5 * (g - g.transpose()).eval();
  return RealGenerator{std::move(g)};
}

RealQuadraticCost embed_quadratic(const Eigen::MatrixXcd& q) {
  const Eigen::MatrixXcd h = checked_hermitian(q, "quadratic cost");
  Eigen::MatrixXd m = induced_real(h);
  m = 0.5 * (m + m.transpose()).eval();
  return RealQuadraticCost{std::move(m)};
}

RealQuadraticCost phase_projector(const RealState& alpha, int blocks) {
  const WaveVector phi = extract_state(alpha);
  if (blocks <= 0 || phi.size() % blocks != 0) {
    throw InputError("phase_projector: state length not divisible into blocks");
  }
  const Eigen::Index n = phi.size() / blocks;
  Eigen::MatrixXcd proj = Eigen::MatrixXcd::Identity(phi.size(), phi.size());
  for (int b = 0; b < blocks; ++b) {
    const Eigen::VectorXcd seg = phi.segment(b * n, n);
    const double norm = seg.norm();
    if (norm == 0.0) throw InputError("phase_projector: zero state block");
    const Eigen::VectorXcd unit = seg / norm;
    proj.block(b * n, b * n, n, n) -= unit * unit.adjoint();
  }
  return embed_quadratic(proj);
}

}  // namespace qpronto
