#pragma once

#include <Eigen/Dense>

#include <memory>

#include "soliton/integration_types.hpp"
#include "soliton/polytope.hpp"
#include "soliton/weight.hpp"

namespace soliton {

struct FunctionalEval {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
  bool tolerance_met = true;
};

/// The four convex functionals on the Lie-algebra side, each backed by
/// moment integrals of a derived symbolic weight over one polytope.
///
/// kind        value weight            gradient weight        hessian weight
/// TianZhu     e^{<z,x>}               same, first moment     same, second
/// VolumeN     l^{-(N-1)}, l=1-<x,z>/N ((N-1)/N) l^{-N}       ((N-1)/N) l^{-(N+1)}
/// MSY         l_z^{-(n+1)}            -(n+1) l_z^{-(n+2)}    (n+1)(n+2) l_z^{-(n+3)}
/// Sasaki(xi)  e^{<x,a>/l_xi} l_xi^{-(n+1)}   ... l_xi^{-(n+2)}   ... l_xi^{-(n+3)}
///
/// The exponent bookkeeping lives here and nowhere else; the consistency
/// tests pin each gradient to the matching Futaki moment.
class ConvexFunctional {
 public:
  enum class Kind { TianZhu, VolumeN, MSY, SasakiSoliton };

  static ConvexFunctional tian_zhu(Polytope p);
  static ConvexFunctional volume_n(Polytope p, double big_n);
  static ConvexFunctional msy(Polytope p);
  static ConvexFunctional sasaki_soliton(Polytope p, Eigen::VectorXd xi);

  Kind kind() const { return kind_; }
  int dim() const { return polytope_.dim(); }
  const Polytope& polytope() const { return polytope_; }
  double big_n() const { return big_n_; }
  const Eigen::VectorXd& xi() const { return xi_; }

  /// Strict feasibility of a point for the open domain, with margin.
  bool feasible(const Eigen::VectorXd& point, double margin = 0.0) const;

  /// Value, gradient, and Hessian. Throws DomainViolationError outside the
  /// open domain.
  FunctionalEval evaluate(const Eigen::VectorXd& point,
                          const IntegrationConfig& cfg = {}) const;

  /// Value only (cheaper for line searches).
  double value(const Eigen::VectorXd& point,
               const IntegrationConfig& cfg = {}) const;

 private:
  ConvexFunctional(Kind kind, Polytope p);
  Kind kind_;
  Polytope polytope_;
  double big_n_ = 0.0;
  Eigen::VectorXd xi_;
};

/// First-moment vector of the weight: pairing it with zeta gives the
/// weighted Futaki invariant of zeta.
Eigen::VectorXd futaki(const Polytope& p, const Weight& v,
                       const IntegrationConfig& cfg = {});

/// n! times the weighted Lebesgue mass; equals the anticanonical degree
/// c1^n for the constant weight on a canonical polytope.
double weighted_volume(const Polytope& p, const Weight& v,
                       const IntegrationConfig& cfg = {});

}  // namespace soliton
