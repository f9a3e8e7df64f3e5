#include "qpronto/hamiltonian_model.hpp"

#include <cmath>

#include "qpronto/errors.hpp"

namespace qpronto {

double SmoothScalarFn::value(double u) const {
  switch (kind_) {
    case Kind::identity: return u;
    case Kind::sin: return std::sin(u);
    case Kind::one_minus_cos: return 1.0 - std::cos(u);
    case Kind::scaled_affine: return a_ * u + b_;
  }
  return u;
}

double SmoothScalarFn::d1(double u) const {
  switch (kind_) {
    case Kind::identity: return 1.0;
    case Kind::sin: return std::cos(u);
    case Kind::one_minus_cos: return std::sin(u);
    case Kind::scaled_affine: return a_;
  }
  return 1.0;
}

double SmoothScalarFn::d2(double u) const {
  switch (kind_) {
    case Kind::identity: return 0.0;
    case Kind::sin: return -std::sin(u);
    case Kind::one_minus_cos: return std::cos(u);
    case Kind::scaled_affine: return 0.0;
  }
  return 0.0;
}

ControlHamiltonian make_control_hamiltonian(const Eigen::MatrixXcd& drift,
                                            const std::vector<Eigen::MatrixXcd>& controls,
                                            const std::vector<SmoothScalarFn>& fns) {
  if (controls.size() != fns.size()) {
    throw InputError("number of control matrices and scalar functions differ");
  }
  ControlHamiltonian model{embed_generator(drift), {}};
  for (std::size_t j = 0; j < controls.size(); ++j) {
    if (controls[j].rows() != drift.rows() || controls[j].cols() != drift.cols()) {
      throw InputError("control matrix " + std::to_string(j) + " has the wrong dimension");
    }
    model.channels.push_back({embed_generator(controls[j]), fns[j]});
  }
  return model;
}

RealGenerator eval_generator(const ControlHamiltonian& model, const Eigen::VectorXd& u) {
  Eigen::MatrixXd h = model.drift.matrix;
  for (Eigen::Index j = 0; j < model.input_dim(); ++j) {
    const auto& ch = model.channels[static_cast<std::size_t>(j)];
    h.noalias() += ch.f.value(u(j)) * ch.generator.matrix;
  }
  return RealGenerator{std::move(h)};
}

Eigen::VectorXd apply_generator(const ControlHamiltonian& model, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& x) {
  Eigen::VectorXd out = model.drift.matrix * x;
  for (Eigen::Index j = 0; j < model.input_dim(); ++j) {
    const auto& ch = model.channels[static_cast<std::size_t>(j)];
    out.noalias() += ch.f.value(u(j)) * (ch.generator.matrix * x);
  }
  return out;
}

Eigen::MatrixXd input_jacobian(const ControlHamiltonian& model, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u) {
  Eigen::MatrixXd b(model.state_dim(), model.input_dim());
  for (Eigen::Index j = 0; j < model.input_dim(); ++j) {
    const auto& ch = model.channels[static_cast<std::size_t>(j)];
    b.col(j).noalias() = ch.f.d1(u(j)) * (ch.generator.matrix * x);
  }
  return b;
}

Linearization linearize(const ControlHamiltonian& model, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& u) {
  return {eval_generator(model, u).matrix, input_jacobian(model, x, u)};
}

Eigen::VectorXd second_order_term(const ControlHamiltonian& model, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& u, const Eigen::VectorXd& z,
                                  const Eigen::VectorXd& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(model.state_dim());
  for (Eigen::Index i = 0; i < model.input_dim(); ++i) {
    const auto& ch = model.channels[static_cast<std::size_t>(i)];
    const Eigen::MatrixXd& h = ch.generator.matrix;
    out.noalias() += (2.0 * ch.f.d1(u(i)) * v(i)) * (h * z);
    out.noalias() += (ch.f.d2(u(i)) * v(i) * v(i)) * (h * x);
  }
  return out;
}

}  // namespace qpronto
