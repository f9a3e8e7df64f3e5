#pragma once

#include <vector>

#include <Eigen/Dense>

#include "qpronto/real_embedding.hpp"

namespace qpronto {

/// Scalar input nonlinearity f_j with its first two derivatives.
class SmoothScalarFn {
 public:
  enum class Kind { identity, sin, one_minus_cos, scaled_affine };

  SmoothScalarFn() = default;
  static SmoothScalarFn identity() { return {}; }
  static SmoothScalarFn sine() { return SmoothScalarFn(Kind::sin, 1.0, 0.0); }
  static SmoothScalarFn one_minus_cos() { return SmoothScalarFn(Kind::one_minus_cos, 1.0, 0.0); }
  /// f(u) = a u + b.
  static SmoothScalarFn scaled_affine(double a, double b) {
    return SmoothScalarFn(Kind::scaled_affine, a, b);
  }

  Kind kind() const { return kind_; }
  double a() const { return a_; }
  double b() const { return b_; }

  double value(double u) const;
  double d1(double u) const;
  double d2(double u) const;

 private:
  SmoothScalarFn(Kind kind, double a, double b) : kind_(kind), a_(a), b_(b) {}

  Kind kind_ = Kind::identity;
  double a_ = 1.0;
  double b_ = 0.0;
};

/// H(u) = H0 + sum_j H_j f_j(u_j) in real coordinates.
struct ControlHamiltonian {
  struct Channel {
    RealGenerator generator;
    SmoothScalarFn f;
  };

  RealGenerator drift;
  std::vector<Channel> channels;

  Eigen::Index state_dim() const { return drift.matrix.rows(); }
  Eigen::Index input_dim() const { return static_cast<Eigen::Index>(channels.size()); }
};

/// Builds a model from complex Hermitian matrices.
ControlHamiltonian make_control_hamiltonian(const Eigen::MatrixXcd& drift,
                                            const std::vector<Eigen::MatrixXcd>& controls,
                                            const std::vector<SmoothScalarFn>& fns);

RealGenerator eval_generator(const ControlHamiltonian& model, const Eigen::VectorXd& u);

/// H(u) x without forming H(u).
Eigen::VectorXd apply_generator(const ControlHamiltonian& model, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& x);

/// First Frechet derivative of (x, u) -> H(u) x.
struct Linearization {
  Eigen::MatrixXd A;  // H(u)
  Eigen::MatrixXd B;  // column j: H_j f_j'(u_j) x
};

Linearization linearize(const ControlHamiltonian& model, const Eigen::VectorXd& x,
                        const Eigen::VectorXd& u);

/// Input Jacobian only, [H_1 f_1'(u_1) x, ..., H_m f_m'(u_m) x].
Eigen::MatrixXd input_jacobian(const ControlHamiltonian& model, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& u);

/// Second-order term Lambda(t|zeta) = 2 sum_i dH/du_i v_i z + sum_i H_ii f_i''(u_i) x v_i^2.
/// Mixed partials vanish because every channel depends on a single input.
Eigen::VectorXd second_order_term(const ControlHamiltonian& model, const Eigen::VectorXd& x,
                                  const Eigen::VectorXd& u, const Eigen::VectorXd& z,
                                  const Eigen::VectorXd& v);

}  // namespace qpronto
