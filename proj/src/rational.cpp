#include "soliton/rational.hpp"

#include <cstddef>
#include <stdexcept>
#include <utility>

namespace soliton {

Rational rational_from_string(const std::string& text) {
  const auto slash = text.find('/');
  try {
    if (slash == std::string::npos) {
      return Rational(boost::multiprecision::cpp_int(text));
    }
    boost::multiprecision::cpp_int num(text.substr(0, slash));
    boost::multiprecision::cpp_int den(text.substr(slash + 1));
    if (den == 0) throw std::invalid_argument("zero denominator");
    return Rational(num, den);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a rational: '" + text + "'");
  }
}

std::string rational_to_string(const Rational& q) {
  if (denominator(q) == 1) return numerator(q).str();
  return numerator(q).str() + "/" + denominator(q).str();
}

Rational dot(const RationalVector& a, const RationalVector& b) {
  Rational s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

namespace {

// Forward elimination with partial (first nonzero) pivoting; returns rank.
// `rhs` may be null.
int eliminate(std::vector<RationalVector>& m, RationalVector* rhs) {
  const std::size_t rows = m.size();
  const std::size_t cols = rows == 0 ? 0 : m[0].size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t pivot = r;
    while (pivot < rows && m[pivot][c] == 0) ++pivot;
    if (pivot == rows) continue;
    std::swap(m[pivot], m[r]);
    if (rhs) std::swap((*rhs)[pivot], (*rhs)[r]);
    for (std::size_t i = r + 1; i < rows; ++i) {
      if (m[i][c] == 0) continue;
      Rational factor = m[i][c] / m[r][c];
      for (std::size_t j = c; j < cols; ++j) m[i][j] -= factor * m[r][j];
      if (rhs) (*rhs)[i] -= factor * (*rhs)[r];
    }
    ++r;
  }
  return static_cast<int>(r);
}

}  // namespace

int rational_rank(std::vector<RationalVector> rows) {
  if (rows.empty()) return 0;
  return eliminate(rows, nullptr);
}

bool solve_linear(std::vector<RationalVector> a, RationalVector b,
                  RationalVector& out) {
  const std::size_t n = a.size();
  if (eliminate(a, &b) < static_cast<int>(n)) return false;
  out.assign(n, Rational(0));
  for (std::size_t ii = n; ii-- > 0;) {
    Rational s = b[ii];
    for (std::size_t j = ii + 1; j < n; ++j) s -= a[ii][j] * out[j];
    out[ii] = s / a[ii][ii];
  }
  return true;
}

Rational determinant(std::vector<RationalVector> a) {
  const std::size_t n = a.size();
  Rational det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    while (pivot < n && a[pivot][c] == 0) ++pivot;
    if (pivot == n) return Rational(0);
    if (pivot != c) {
      std::swap(a[pivot], a[c]);
      det = -det;
    }
    det *= a[c][c];
    for (std::size_t i = c + 1; i < n; ++i) {
      if (a[i][c] == 0) continue;
      Rational factor = a[i][c] / a[c][c];
      for (std::size_t j = c; j < n; ++j) a[i][j] -= factor * a[c][j];
    }
  }
  return det;
}

bool lex_less(const RationalVector& a, const RationalVector& b) {
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return a.size() < b.size();
}

bool in_nonnegative_span(const std::vector<RationalVector>& generators,
                         const RationalVector& target) {
  // Phase-one simplex on: generators^T lambda + artificials = target,
  // lambda >= 0, minimizing the artificial sum. Bland's rule, exact
  // arithmetic, so termination is guaranteed.
  const std::size_t n = target.size();       // equations
  const std::size_t m = generators.size();   // lambda variables
  const std::size_t cols = m + n;            // lambda then artificials

  // Tableau rows: [A | I | rhs], rhs >= 0 after sign normalization.
  std::vector<RationalVector> tab(n, RationalVector(cols + 1, Rational(0)));
  for (std::size_t i = 0; i < n; ++i) {
    const bool flip = target[i] < 0;
    for (std::size_t j = 0; j < m; ++j) {
      tab[i][j] = flip ? -generators[j][i] : generators[j][i];
    }
    tab[i][m + i] = 1;
    tab[i][cols] = flip ? -target[i] : target[i];
  }
  std::vector<std::size_t> basis(n);
  for (std::size_t i = 0; i < n; ++i) basis[i] = m + i;

  // Objective: sum of artificials, expressed in terms of the nonbasic vars.
  RationalVector obj(cols + 1, Rational(0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= cols; ++j) obj[j] += tab[i][j];
  }
  for (std::size_t i = 0; i < n; ++i) obj[m + i] = 0;

  while (true) {
    std::size_t enter = cols;
    for (std::size_t j = 0; j < cols; ++j) {
      if (obj[j] > 0) {
        enter = j;
        break;
      }
    }
    if (enter == cols) break;
    std::size_t leave = n;
    Rational best = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (tab[i][enter] <= 0) continue;
      Rational ratio = tab[i][cols] / tab[i][enter];
      if (leave == n || ratio < best ||
          (ratio == best && basis[i] < basis[leave])) {
        best = ratio;
        leave = i;
      }
    }
    if (leave == n) break;  // unbounded objective cannot happen here
    Rational piv = tab[leave][enter];
    for (std::size_t j = 0; j <= cols; ++j) tab[leave][j] /= piv;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == leave || tab[i][enter] == 0) continue;
      Rational f = tab[i][enter];
      for (std::size_t j = 0; j <= cols; ++j) tab[i][j] -= f * tab[leave][j];
    }
    if (obj[enter] != 0) {
      Rational f = obj[enter];
      for (std::size_t j = 0; j <= cols; ++j) obj[j] -= f * tab[leave][j];
    }
    basis[leave] = enter;
  }
  return obj[cols] == 0;
}

}  // namespace soliton
