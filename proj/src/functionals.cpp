#include "soliton/functionals.hpp"

#include <cmath>
#include <stdexcept>

#include "soliton/errors.hpp"
#include "soliton/integrate.hpp"

namespace soliton {

ConvexFunctional::ConvexFunctional(Kind kind, Polytope p)
    : kind_(kind), polytope_(std::move(p)) {}

ConvexFunctional ConvexFunctional::tian_zhu(Polytope p) {
  return ConvexFunctional(Kind::TianZhu, std::move(p));
}

ConvexFunctional ConvexFunctional::volume_n(Polytope p, double big_n) {
  if (!(big_n > 1)) throw std::invalid_argument("volume_n needs N > 1");
  ConvexFunctional f(Kind::VolumeN, std::move(p));
  f.big_n_ = big_n;
  return f;
}

ConvexFunctional ConvexFunctional::msy(Polytope p) {
  return ConvexFunctional(Kind::MSY, std::move(p));
}

ConvexFunctional ConvexFunctional::sasaki_soliton(Polytope p,
                                                  Eigen::VectorXd xi) {
  if (!dual_contains(p, xi)) {
    throw DomainViolationError(
        "sasaki functional needs xi inside the open dual polytope");
  }
  ConvexFunctional f(Kind::SasakiSoliton, std::move(p));
  f.xi_ = std::move(xi);
  return f;
}

bool ConvexFunctional::feasible(const Eigen::VectorXd& point,
                                double margin) const {
  switch (kind_) {
    case Kind::TianZhu:
    case Kind::SasakiSoliton:
      return true;
    case Kind::VolumeN:
      return dual_margin(polytope_, -point / big_n_) > margin;
    case Kind::MSY:
      return dual_margin(polytope_, point) > margin;
  }
  return false;
}

namespace {

MomentData checked(const Polytope& p, const Weight& w, int order,
                   const IntegrationConfig& cfg) {
  return integrate_weight(p, w, order, cfg);
}

}  // namespace

FunctionalEval ConvexFunctional::evaluate(const Eigen::VectorXd& point,
                                          const IntegrationConfig& cfg) const {
  if (!feasible(point, 0.0)) {
    throw DomainViolationError("point is outside the functional's domain");
  }
  const int n = dim();
  FunctionalEval out;
  switch (kind_) {
    case Kind::TianZhu: {
      const MomentData m = checked(polytope_, Weight::exp_linear(point), 2, cfg);
      out.value = m.mass;
      out.gradient = m.first;
      out.hessian = m.second;
      out.tolerance_met = m.tolerance_met;
      break;
    }
    case Kind::VolumeN: {
      const double nn = big_n_;
      const AffineFn ell{-point / nn, 1.0};
      const MomentData mv =
          checked(polytope_, Weight::pow_affine(ell, -(nn - 1.0)), 0, cfg);
      const MomentData mg = checked(polytope_, Weight::qn(point, nn), 1, cfg);
      const MomentData mh =
          checked(polytope_, Weight::pow_affine(ell, -(nn + 1.0)), 2, cfg);
      const double c = (nn - 1.0) / nn;
      out.value = mv.mass;
      out.gradient = c * mg.first;
      out.hessian = c * mh.second;
      out.tolerance_met =
          mv.tolerance_met && mg.tolerance_met && mh.tolerance_met;
      break;
    }
    case Kind::MSY: {
      const AffineFn ell{point, 1.0};
      const MomentData mv =
          checked(polytope_, Weight::pow_affine(ell, -(n + 1.0)), 0, cfg);
      const MomentData mg =
          checked(polytope_, Weight::pow_affine(ell, -(n + 2.0)), 1, cfg);
      const MomentData mh =
          checked(polytope_, Weight::pow_affine(ell, -(n + 3.0)), 2, cfg);
      out.value = mv.mass;
      out.gradient = -(n + 1.0) * mg.first;
      out.hessian = (n + 1.0) * (n + 2.0) * mh.second;
      out.tolerance_met =
          mv.tolerance_met && mg.tolerance_met && mh.tolerance_met;
      break;
    }
    case Kind::SasakiSoliton: {
      const MomentData mv =
          checked(polytope_, Weight::tkrs(xi_, point, -(n + 1.0)), 0, cfg);
      const MomentData mg =
          checked(polytope_, Weight::tkrs(xi_, point, -(n + 2.0)), 1, cfg);
      const MomentData mh =
          checked(polytope_, Weight::tkrs(xi_, point, -(n + 3.0)), 2, cfg);
      out.value = mv.mass;
      out.gradient = mg.first;
      out.hessian = mh.second;
      out.tolerance_met =
          mv.tolerance_met && mg.tolerance_met && mh.tolerance_met;
      break;
    }
  }
  out.hessian = (0.5 * (out.hessian + out.hessian.transpose())).eval();
  return out;
}

double ConvexFunctional::value(const Eigen::VectorXd& point,
                               const IntegrationConfig& cfg) const {
  if (!feasible(point, 0.0)) {
    throw DomainViolationError("point is outside the functional's domain");
  }
  const int n = dim();
  switch (kind_) {
    case Kind::TianZhu:
      return checked(polytope_, Weight::exp_linear(point), 0, cfg).mass;
    case Kind::VolumeN: {
      const AffineFn ell{-point / big_n_, 1.0};
      return checked(polytope_, Weight::pow_affine(ell, -(big_n_ - 1.0)), 0,
                     cfg)
          .mass;
    }
    case Kind::MSY: {
      const AffineFn ell{point, 1.0};
      return checked(polytope_, Weight::pow_affine(ell, -(n + 1.0)), 0, cfg)
          .mass;
    }
    case Kind::SasakiSoliton:
      return checked(polytope_, Weight::tkrs(xi_, point, -(n + 1.0)), 0, cfg)
          .mass;
  }
  return 0.0;
}

Eigen::VectorXd futaki(const Polytope& p, const Weight& v,
                       const IntegrationConfig& cfg) {
  const MomentData m = integrate_weight(p, v, 1, cfg);
  if (!m.tolerance_met) {
    throw IntegrationFailureError(
        "futaki moment did not reach the requested tolerance");
  }
  return m.first;
}

double weighted_volume(const Polytope& p, const Weight& v,
                       const IntegrationConfig& cfg) {
  const MomentData m = integrate_weight(p, v, 0, cfg);
  if (!m.tolerance_met) {
    throw IntegrationFailureError(
        "weighted volume did not reach the requested tolerance");
  }
  double nf = 1.0;
  for (int k = 2; k <= p.dim(); ++k) nf *= k;
  return nf * m.mass;
}

}  // namespace soliton
