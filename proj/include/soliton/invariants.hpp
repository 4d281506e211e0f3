#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>

#include <json.hpp>

#include "soliton/integration_types.hpp"
#include "soliton/polytope.hpp"
#include "soliton/solve.hpp"
#include "soliton/weight.hpp"

namespace soliton {

/// Pass/fail verdict with a signed slack and every intermediate quantity.
/// passed tracks margin > 0 (or >= 0 up to tolerance where the underlying
/// inequality is non-strict, as for the Fujita and beta bounds).
struct ObstructionReport {
  enum class Kind {
    Lichnerowicz,
    Fujita,
    FutakiVanishing,
    Beta,
    CoercivityRadius,
    ProductCY,
  };
  Kind kind = Kind::Lichnerowicz;
  bool passed = false;
  double margin = 0.0;
  nlohmann::json details;
};

std::string to_string(ObstructionReport::Kind kind);

/// Vertex bound n * l_xi(V) - <tau, V> > 0 (xi defaults to zero, giving the
/// bound <tau, x> < n). The margin is the exact vertex minimum; details
/// carry the full per-vertex table and the argmin vertex.
ObstructionReport lichnerowicz_check(
    const Polytope& p, const Eigen::VectorXd& tau,
    const std::optional<Eigen::VectorXd>& xi = std::nullopt);

/// Volume bound c1^n <= ((n+1)/m_v)^n after rescaling v to unit mean;
/// equality is attained (projective spaces), so passed uses a 1e-10 slack.
ObstructionReport fujita_check(const Polytope& p, const Weight& v,
                               const IntegrationConfig& cfg = {});

/// Valuative invariant A * Vol_v - integral of truncated weighted volumes,
/// with g(x) = <u, x> + c >= 0 on P defining the truncation levels. The
/// outer integral runs adaptive Simpson with exact dyadic clip levels;
/// details include the truncation table and a monotonicity audit.
ObstructionReport beta_v(const Polytope& p, const RationalVector& u,
                         const Rational& c, double a_disc, const Weight& v,
                         const IntegrationConfig& cfg = {});

/// lambda0 = weight_gap(v0, v1); passes when lambda0 < lambda_big (the
/// user-supplied coercivity slope; it is analytic data and never estimated
/// here). Details include the residual slope and a Futaki-vanishing check
/// of v1.
ObstructionReport coercivity_radius(const Weight& v0, const Weight& v1,
                                    const Polytope& p, double lambda_big,
                                    const IntegrationConfig& cfg = {});

/// margin = tolerance - ||futaki(P, v)||; details flag predicted existence
/// in the toric dictionary when the moment vanishes within tolerance.
ObstructionReport futaki_vanishing_report(const Polytope& p, const Weight& v,
                                          const IntegrationConfig& cfg = {},
                                          double tolerance = 1e-9);

/// End-to-end product construction: computes xi_N on P, forms the product
/// with the k-dimensional reflexive simplex, and verifies that
/// (-xi_N/N, 0) is the product's volume-minimizing Reeb field:
/// (a) dual containment, (b) vanishing of the inverse-power Futaki moment,
/// (c) agreement with the product's own minimizer. Sub-check failures are
/// reported, not raised.
ObstructionReport product_cy_pipeline(const Polytope& p, int k,
                                      const SolverConfig& cfg = {});

nlohmann::json report_to_json(const ObstructionReport& report);

}  // namespace soliton
