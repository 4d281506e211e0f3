#include <doctest.h>

#include "soliton/rational.hpp"

using namespace soliton;

TEST_CASE("rational parsing and formatting") {
  CHECK(rational_from_string("3") == 3);
  CHECK(rational_from_string("-7/2") == Rational(-7, 2));
  CHECK(rational_from_string("4/8") == Rational(1, 2));
  CHECK(rational_to_string(Rational(1, 2)) == "1/2");
  CHECK(rational_to_string(Rational(-6, 3)) == "-2");
  CHECK_THROWS_AS(rational_from_string("x"), std::invalid_argument);
  CHECK_THROWS_AS(rational_from_string("1/0"), std::invalid_argument);
}

TEST_CASE("linear solves are exact") {
  std::vector<RationalVector> a{{Rational(2), Rational(1)},
                                {Rational(1), Rational(3)}};
  RationalVector b{Rational(1), Rational(0)};
  RationalVector x;
  REQUIRE(solve_linear(a, b, x));
  CHECK(x[0] == Rational(3, 5));
  CHECK(x[1] == Rational(-1, 5));

  std::vector<RationalVector> singular{{Rational(1), Rational(2)},
                                       {Rational(2), Rational(4)}};
  CHECK_FALSE(solve_linear(singular, b, x));
  CHECK(determinant(singular) == 0);
  CHECK(determinant(a) == 5);
  CHECK(rational_rank(singular) == 1);
}

TEST_CASE("nonnegative span membership") {
  // cone over e1, e2 contains e1 + 2 e2 but not -e1
  std::vector<RationalVector> gens{{Rational(1), Rational(0)},
                                   {Rational(0), Rational(1)}};
  CHECK(in_nonnegative_span(gens, {Rational(1), Rational(2)}));
  CHECK_FALSE(in_nonnegative_span(gens, {Rational(-1), Rational(0)}));

  // full fan of p2 positively spans the plane
  std::vector<RationalVector> fan{{Rational(1), Rational(0)},
                                  {Rational(0), Rational(1)},
                                  {Rational(-1), Rational(-1)}};
  CHECK(in_nonnegative_span(fan, {Rational(-1), Rational(0)}));
  CHECK(in_nonnegative_span(fan, {Rational(0), Rational(-1)}));
}

TEST_CASE("lexicographic order") {
  CHECK(lex_less({Rational(-1), Rational(2)}, {Rational(-1), Rational(3)}));
  CHECK(lex_less({Rational(-1), Rational(2)}, {Rational(0), Rational(-5)}));
  CHECK_FALSE(lex_less({Rational(1)}, {Rational(1)}));
}
