#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "soliton/rational.hpp"

namespace soliton {

/// Affine function f(x) = <slope, x> + constant on moment coordinates.
struct AffineFn {
  Eigen::VectorXd slope;
  double constant = 1.0;

  double operator()(const Eigen::VectorXd& x) const {
    return slope.dot(x) + constant;
  }
};

/// Half-space <normal, x> + offset >= 0 with exact data.
struct Halfspace {
  RationalVector normal;
  Rational offset;
};

/// Integration cell: column j of `vertices` is the j-th vertex.
struct Simplex {
  Eigen::MatrixXd vertices;  // n x (n+1)
  double volume = 0.0;       // Lebesgue volume
};

/// Convex polytope in H-representation with exact vertex data.
///
/// Values are immutable after construction and cheap to copy (the
/// representation is shared). Lazy caches (triangulation, exact volume)
/// are populated with single-initialization semantics, so concurrent use
/// of one value from several threads is safe.
class Polytope {
 public:
  /// Validates and builds a polytope from half-spaces.
  ///
  /// Vertices are enumerated by solving all n-subsets of facet equalities,
  /// filtered by feasibility, deduplicated exactly, and stored in
  /// lexicographic order. Throws EmptyOrUnboundedError when the feasible
  /// set is empty or unbounded, DegeneratePolytopeError when it is not
  /// full-dimensional, and NotCanonicalError when `canonical` is requested
  /// but some offset differs from one.
  static Polytope from_facets(int dim, std::vector<Halfspace> facets,
                              bool canonical = false);

  int dim() const;
  bool canonical() const;
  bool is_empty() const;          ///< no feasible points at all
  bool full_dimensional() const;  ///< vertices affinely span dim()

  const std::vector<Halfspace>& facets() const;
  const std::vector<RationalVector>& vertices() const;  ///< lex-sorted
  const Eigen::MatrixXd& vertex_matrix() const;         ///< n x #vertices

  /// Centroid-fan triangulation; empty for empty or degenerate polytopes.
  const std::vector<Simplex>& triangulation() const;

  Rational volume_exact() const;  ///< 0 for empty/degenerate
  double volume() const;

  /// Axis-aligned bounding box of the vertex set.
  std::pair<Eigen::VectorXd, Eigen::VectorXd> bounding_box() const;

  /// Exact evaluation of facet i at a rational point.
  Rational facet_value(std::size_t i, const RationalVector& x) const;

 private:
  struct Impl;
  explicit Polytope(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;

  friend Polytope product(const Polytope&, const Polytope&);
  friend Polytope clip(const Polytope&, const Halfspace&);
};

/// True iff l_xi(x) = <xi, x> + 1 is strictly positive on P, i.e. xi lies
/// in the open dual polytope of P. Checked at the vertices.
bool dual_contains(const Polytope& p, const Eigen::VectorXd& xi);

/// Smallest value of l_xi over the vertices of P (the exact minimum of
/// l_xi over P by affinity).
double dual_margin(const Polytope& p, const Eigen::VectorXd& xi);

/// Product polytope: facets are the unions padded with zeros, vertices the
/// Cartesian products. Both factors must have dim >= 1.
Polytope product(const Polytope& p, const Polytope& q);

/// Intersection with one more half-space. Empty or lower-dimensional
/// results are legal values (volume 0), never errors.
Polytope clip(const Polytope& p, const Halfspace& h);

/// Exact minimum of an affine function over P together with the argmin
/// vertex; ties resolve to the lexicographically smallest vertex.
std::pair<double, Eigen::VectorXd> min_affine(const Polytope& p,
                                              const AffineFn& f);

}  // namespace soliton
