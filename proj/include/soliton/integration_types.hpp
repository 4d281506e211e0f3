#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace soliton {

enum class IntegrationMode {
  Auto,        ///< closed form when available, quadrature otherwise
  Exact,       ///< require the closed form; error when unavailable
  Adaptive,    ///< force Grundmann-Moller quadrature with subdivision
  MonteCarlo,  ///< rejection sampling in the bounding box
};

struct IntegrationConfig {
  /// Polynomial degree of the simplex rule. Degrees beyond 25 clamp: the
  /// higher rules lose more to coefficient cancellation than they gain in
  /// order, and accuracy past that point comes from subdivision.
  int quadrature_degree = 20;
  int max_subdivision_depth = 12;
  double rel_tol = 1e-11;
  IntegrationMode mode = IntegrationMode::Auto;
  std::int64_t mc_samples = 1'000'000;
  std::uint64_t seed = 0;
  int threads = 0;  ///< 0: SOLITON_POLYTOPE_THREADS or hardware default

  IntegrationConfig with_doubled_degree() const {
    IntegrationConfig c = *this;
    c.quadrature_degree = 2 * quadrature_degree;
    return c;
  }
};

/// Weighted moments over a polytope: mass = integral of v, first = integral
/// of x v, second = integral of x x^T v, all against Lebesgue measure.
struct MomentData {
  double mass = 0.0;
  Eigen::VectorXd first;
  Eigen::MatrixXd second;
  int order = 0;
  bool tolerance_met = true;  ///< false: depth exhausted, best estimate kept
  double error_estimate = 0.0;
};

}  // namespace soliton
