#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <vector>

namespace soliton {

// Exact scalar for facet/vertex combinatorics. Everything numerical
// (integration, optimization) runs in double; conversions happen at the
// boundary between the two layers.
using Rational = boost::multiprecision::cpp_rational;
using RationalVector = std::vector<Rational>;

inline double to_double(const Rational& q) { return static_cast<double>(q); }

/// Parses "p/q", "p", or "-p/q". Throws std::invalid_argument on junk.
Rational rational_from_string(const std::string& text);

/// Inverse of rational_from_string; integers print without a denominator.
std::string rational_to_string(const Rational& q);

Rational dot(const RationalVector& a, const RationalVector& b);

/// Rank of the matrix whose rows are the given vectors (exact elimination).
int rational_rank(std::vector<RationalVector> rows);

/// Solves the n-by-n system A x = b by exact Gaussian elimination.
/// Returns false when A is singular.
bool solve_linear(std::vector<RationalVector> a, RationalVector b,
                  RationalVector& out);

/// Determinant of a square matrix, exact.
Rational determinant(std::vector<RationalVector> a);

/// Lexicographic comparison of coordinate vectors.
bool lex_less(const RationalVector& a, const RationalVector& b);

/// True when some nonnegative combination of the given vectors equals
/// target (exact phase-one simplex). Used for recession-cone tests.
bool in_nonnegative_span(const std::vector<RationalVector>& generators,
                         const RationalVector& target);

}  // namespace soliton
