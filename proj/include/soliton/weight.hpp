#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>

#include "soliton/integration_types.hpp"
#include "soliton/polytope.hpp"

namespace soliton {

/// Closed symbolic family of weight functions v > 0 on a canonical polytope.
///
/// The family is deliberately not an arbitrary callable: keeping it symbolic
/// is what makes exact integration, serialization, and reproducible sweeps
/// possible. Values are immutable and cheap to copy.
class Weight {
 public:
  enum class Kind { Constant, ExpLinear, PowAffine, TKRS, QN, Scaled };

  static Weight constant(double c);
  /// e^{<tau, x>}
  static Weight exp_linear(Eigen::VectorXd tau);
  /// l(x)^p for an affine l; positivity of l is checked against a polytope
  /// at evaluation/integration time.
  static Weight pow_affine(AffineFn ell, double p);
  /// e^{<tau, x> / l_xi(x)} * l_xi(x)^p with l_xi(x) = <xi, x> + 1.
  static Weight tkrs(Eigen::VectorXd xi, Eigen::VectorXd tau, double p);
  /// (1 - <x, xi>/N)^{-N}, evaluated in log form for large N.
  static Weight qn(Eigen::VectorXd xi, double big_n);
  static Weight scaled(double lambda, Weight inner);

  Kind kind() const;

  double operator()(const Eigen::VectorXd& x) const;
  double log_value(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const;

  /// Throws DomainViolationError unless the weight is strictly positive and
  /// finite on the closure of P (affine parts checked at the vertices).
  void validate_on(const Polytope& p) const;

  /// True when the minimum of the weight over any polytope is attained at a
  /// vertex (monotone transforms of affine functions).
  bool vertex_extremal() const;

  // Accessors for the variant payloads; each throws std::logic_error when
  // the kind does not match.
  double constant_value() const;
  const Eigen::VectorXd& tau() const;
  const Eigen::VectorXd& xi() const;
  const AffineFn& affine() const;
  double exponent() const;
  double big_n() const;
  double scale() const;
  const Weight& inner() const;

  std::string describe() const;

 private:
  struct Data;
  std::shared_ptr<const Data> data_;
  explicit Weight(std::shared_ptr<const Data> data);
};

/// Weight together with its computed total mass over a polytope.
struct NormalizedWeight {
  Weight inner;
  double norm_constant = 1.0;  ///< integral of inner over the polytope

  double operator()(const Eigen::VectorXd& x) const {
    return inner(x) / norm_constant;
  }
};

/// Computes the normalization constant against Lebesgue measure.
NormalizedWeight normalize(const Weight& v, const Polytope& p,
                           const IntegrationConfig& cfg = {});

/// lambda0 = max(0, -inf_P(normalized v1 - normalized v0)), the openness
/// radius input. Dense-grid seeding plus Newton polish.
double weight_gap(const Weight& v0, const Weight& v1, const Polytope& p,
                  const IntegrationConfig& cfg = {});

/// Minimum of the (un-normalized) weight over P: exact vertex minimization
/// for vertex-extremal kinds, grid plus polish otherwise.
double min_on_polytope(const Weight& v, const Polytope& p);

}  // namespace soliton
