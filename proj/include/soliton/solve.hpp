#pragma once

#include <Eigen/Dense>

#include <random>
#include <vector>

#include "soliton/functionals.hpp"
#include "soliton/integration_types.hpp"
#include "soliton/polytope.hpp"

namespace soliton {

struct SolverConfig {
  double grad_tol = 1e-10;
  int max_iter = 200;
  double backtrack_shrink = 0.5;
  double armijo = 1e-4;
  double domain_margin = 1e-9;
  IntegrationConfig integration;
};

struct TracePoint {
  Eigen::VectorXd point;
  double value = 0.0;
  double gradient_norm = 0.0;
};

struct SolveReport {
  Eigen::VectorXd minimizer;
  double gradient_norm = 0.0;
  int iterations = 0;
  double hessian_condition = 0.0;
  std::vector<TracePoint> trace;
  bool converged = false;
  bool hessian_regularized = false;
};

/// Damped Newton with backtracking line search over an open polytopal
/// domain; every iterate stays strictly feasible (steps shrink until inside
/// with the configured margin). Returns converged = false rather than
/// throwing when the iteration budget runs out.
SolveReport newton_minimize(const ConvexFunctional& f,
                            const Eigen::VectorXd& start,
                            const SolverConfig& cfg = {});

/// Output of the named solvers: the field, the full solver report, and the
/// defining Futaki residual re-verified at doubled quadrature degree.
struct NamedSolve {
  Eigen::VectorXd field;
  SolveReport report;
  double residual_norm = 0.0;
};

/// Unique zero of the exponential moment map: the critical point of
/// zeta -> integral of e^{<zeta,x>}. Throws NotConvergedError when the
/// residual contract ||futaki|| <= 1e-10 cannot be certified.
NamedSolve tian_zhu_field(const Polytope& p, const SolverConfig& cfg = {});

/// Minimizer of the N-truncated volume functional over -N times the open
/// dual polytope. N is capped at 2^16; beyond the cap the q_N family is
/// numerically indistinguishable from its exponential limit at double
/// precision.
NamedSolve xi_n(const Polytope& p, double big_n, const SolverConfig& cfg = {});

/// Reeb-field volume minimizer over the open dual polytope.
NamedSolve msy_reeb(const Polytope& p, const SolverConfig& cfg = {});

/// For xi in the open dual polytope, the unique a making the Futaki moment
/// of e^{<x,a>/l_xi} l_xi^{-(n+2)} vanish.
NamedSolve soliton_pair(const Polytope& p, const Eigen::VectorXd& xi,
                        const SolverConfig& cfg = {});

/// Deterministic sample from the open dual polytope: a random direction
/// scaled to `shrink` times its boundary distance.
Eigen::VectorXd random_feasible_xi(const Polytope& p, std::mt19937_64& rng,
                                   double shrink = 0.5);

}  // namespace soliton
