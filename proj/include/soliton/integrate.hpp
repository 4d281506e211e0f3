#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>

#include "soliton/integration_types.hpp"
#include "soliton/polytope.hpp"
#include "soliton/weight.hpp"

namespace soliton {

/// Polynomial of total degree <= 2: q(x) = c0 + <lin, x> + x^T quad x.
/// Empty lin/quad mean zero.
struct QuadPoly {
  double c0 = 0.0;
  Eigen::VectorXd lin;
  Eigen::MatrixXd quad;
};

/// Exact integral of q(x) e^{<zeta, x>} over a simplex via divided
/// differences of the exponential at the vertex values, with a series
/// fallback when vertex values cluster. Polynomial factors are handled by
/// lifting vertices into repeated divided-difference nodes.
double simplex_exp_poly(const Simplex& s, const Eigen::VectorXd& zeta,
                        const QuadPoly& q);

/// Divided difference of exp over the given nodes (any order, repeats
/// allowed). Exposed for oracle tests.
double exp_divided_difference(std::span<const double> nodes);

/// Exact moments (orders 0..2) of e^{<zeta, x>} over one simplex.
MomentData explinear_simplex_moments(const Simplex& s,
                                     const Eigen::VectorXd& zeta, int order);

/// Exact moments of (<slope, x> + constant)^p over one simplex; requires p
/// to be a negative integer with p <= -(n + order + 1) so the antiderivative
/// chain is log-free. Returns false when that condition fails.
bool powaffine_simplex_moments(const Simplex& s, const Eigen::VectorXd& slope,
                               double constant, double p, int order,
                               MomentData& out);

/// Weighted moments over a polytope. Mode Auto integrates exactly whenever
/// the weight admits a closed form (Constant, ExpLinear, and the log-free
/// integer-exponent PowAffine/QN cases) and falls back to Grundmann-Moller
/// quadrature with recursive longest-edge subdivision otherwise. Results
/// are deterministic for a fixed config, independent of thread count.
MomentData integrate_weight(const Polytope& p, const Weight& v, int order,
                            const IntegrationConfig& cfg = {});

struct McEstimate {
  double estimate = 0.0;
  double stderr_est = 0.0;
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
};

/// Independent verification oracle: rejection sampling in the bounding box,
/// reproducible for a fixed seed.
McEstimate monte_carlo_oracle(const Polytope& p, const Weight& v,
                              std::int64_t samples, std::uint64_t seed);

/// Deterministic pairwise-tree sum; the reduction order is fixed by the
/// element order, never by thread scheduling.
double pairwise_tree_sum(std::span<const double> values);

}  // namespace soliton
