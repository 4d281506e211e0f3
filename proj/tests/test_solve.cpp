#include <doctest.h>

#include <cmath>
#include <random>

#include "soliton/catalog.hpp"
#include "soliton/errors.hpp"
#include "soliton/functionals.hpp"
#include "soliton/solve.hpp"
#include "test_helpers.hpp"

using namespace soliton;
using namespace soliton::testing;

TEST_CASE("newton stops immediately at a critical point") {
  const auto& p2 = catalog_entry("p2").polytope;
  const auto rep = newton_minimize(ConvexFunctional::tian_zhu(p2),
                                   Eigen::VectorXd::Zero(2));
  CHECK(rep.converged);
  CHECK(rep.iterations <= 1);
  CHECK(rep.minimizer.norm() <= 1e-12);
  CHECK(rep.hessian_condition < 1e3);
}

TEST_CASE("newton against a bisection oracle on a shifted interval") {
  // P = [-1, 2]: the critical point solves int x e^{tx} dx = 0, with the
  // closed-form antiderivative e^{tx}(tx - 1)/t^2.
  auto p = Polytope::from_facets(1, {hs({1}, 1), hs({-1}, 2)}, false);
  const auto rep =
      newton_minimize(ConvexFunctional::tian_zhu(p), Eigen::VectorXd::Zero(1));
  REQUIRE(rep.converged);

  auto moment = [](double t) {
    if (t == 0.0) return 1.5;  // int x dx over [-1,2]
    auto anti = [t](double x) { return std::exp(t * x) * (t * x - 1) / (t * t); };
    return anti(2.0) - anti(-1.0);
  };
  const double oracle = bisect(moment, -2.0, 0.0);
  CHECK(close(rep.minimizer[0], oracle, 1e-9));
}

TEST_CASE("tian-zhu fields vanish on symmetric polytopes") {
  for (const char* name : {"p1", "p2", "p3", "p1xp1", "bl3p2"}) {
    const auto s = tian_zhu_field(catalog_entry(name).polytope);
    CHECK(s.field.norm() <= 1e-10);
    CHECK(s.residual_norm <= 1e-10);
  }
}

TEST_CASE("tian-zhu field on the one-point blow-up") {
  // 1-D reduction along the diagonal: the moment of s(s+2)e^{ts} on [-1,1]
  // has the closed-form antiderivative below; bisection gives the oracle.
  auto moment = [](double t) {
    auto anti = [t](double s) {
      const double e = std::exp(t * s);
      const double i2 = e * (t * t * s * s - 2 * t * s + 2) / (t * t * t);
      const double i1 = e * (t * s - 1) / (t * t);
      return i2 + 2.0 * i1;
    };
    return anti(1.0) - anti(-1.0);
  };
  const double t_oracle = bisect(moment, -1.0, 0.0);

  const auto s = tian_zhu_field(catalog_entry("bl1p2").polytope);
  CHECK(close(s.field[0], t_oracle, 1e-10));
  CHECK(close(s.field[1], t_oracle, 1e-10));
  // regression fixture (bisection value frozen at development time)
  CHECK(close(s.field[0], -0.5276195198969628, 1e-9));
}

TEST_CASE("xi_n vanishes on symmetric polytopes for any N") {
  for (const char* name : {"p1", "p2", "p3", "p1xp1"}) {
    const auto& p = catalog_entry(name).polytope;
    for (double n_val : {8.0, 64.0, 20.5}) {  // non-integer N runs adaptively
      const auto s = xi_n(p, n_val);
      CHECK(s.field.norm() <= 1e-10);
    }
  }
}

TEST_CASE("xi_n approaches the soliton field") {
  const auto& bl1 = catalog_entry("bl1p2").polytope;
  const auto tz = tian_zhu_field(bl1);
  const auto x64 = xi_n(bl1, 64.0);
  CHECK((x64.field - tz.field).norm() <= 1e-3);
  CHECK(x64.residual_norm <= 1e-10);

  // the N cap keeps huge arguments finite and close to the limit
  const auto xcap = xi_n(bl1, 1e6);
  CHECK((xcap.field - tz.field).norm() <= 1e-4);
}

TEST_CASE("msy fields") {
  CHECK(msy_reeb(catalog_entry("p1").polytope).field.norm() <= 1e-10);
  CHECK(msy_reeb(catalog_entry("p2").polytope).field.norm() <= 1e-10);

  // 1-D reduction oracle: int s(s+2)(1+rs)^{-4} ds = 0 along the diagonal.
  auto moment = [](double r) {
    auto anti = [r](double s) {
      const double u = 1 + r * s;
      return (-1.0 / u + (1 - r) / (u * u) - (1 - 2 * r) / (3 * u * u * u)) /
             (r * r * r);
    };
    return anti(1.0) - anti(-1.0);
  };
  const double r_oracle = bisect(moment, 0.01, 0.4);
  const auto s = msy_reeb(catalog_entry("bl1p2").polytope);
  CHECK(close(s.field[0], r_oracle, 1e-10));
  CHECK(close(s.field[1], r_oracle, 1e-10));
  CHECK(close(s.field[0], 0.1314829081786702, 1e-9));  // frozen fixture
}

TEST_CASE("soliton pair identities") {
  const auto& bl1 = catalog_entry("bl1p2").polytope;

  // tau(xi_0) = 0 at the volume minimizer
  const auto reeb = msy_reeb(bl1);
  const auto at_reeb = soliton_pair(bl1, reeb.field);
  CHECK(at_reeb.field.norm() <= 1e-8);

  // tau(0) is the Tian-Zhu field
  const auto tz = tian_zhu_field(bl1);
  const auto at_zero = soliton_pair(bl1, Eigen::VectorXd::Zero(2));
  CHECK((at_zero.field - tz.field).norm() <= 1e-9);

  // regression fixture at xi = (0.1, 0.1), oracle-checked at development
  // time against the reduced equation along the diagonal
  const auto s = soliton_pair(bl1, vec2(0.1, 0.1));
  CHECK(close(s.field[0], -0.1261875576997270, 1e-8));
  CHECK(s.residual_norm <= 1e-10);
}

TEST_CASE("solvers keep iterates feasible from a near-boundary start") {
  const auto& p2 = catalog_entry("bl2p2").polytope;
  const auto f = ConvexFunctional::msy(p2);
  // start close to the dual boundary along +e1
  const auto& vm = p2.vertex_matrix();
  double t_max = 1e300;
  for (Eigen::Index j = 0; j < vm.cols(); ++j) {
    const double s = vm(0, j);
    if (s < 0) t_max = std::min(t_max, -1.0 / s);
  }
  Eigen::VectorXd start = vec2(0.98 * t_max, 0.0);
  const auto rep = newton_minimize(f, start);
  CHECK(rep.converged);
  for (const auto& t : rep.trace) {
    CHECK(dual_margin(p2, t.point) > 0.0);
  }
}

TEST_CASE("uniqueness probe from random feasible seeds") {
  const auto& bl2 = catalog_entry("bl2p2").polytope;
  const auto f = ConvexFunctional::msy(bl2);
  std::mt19937_64 rng(77);
  Eigen::VectorXd reference;
  for (int trial = 0; trial < 8; ++trial) {
    const Eigen::VectorXd start = random_feasible_xi(bl2, rng, 0.6);
    const auto rep = newton_minimize(f, start);
    REQUIRE(rep.converged);
    if (trial == 0) {
      reference = rep.minimizer;
    } else {
      CHECK((rep.minimizer - reference).norm() <= 1e-8);
    }
  }
}

namespace {

Polytope transform_polytope(const Polytope& p,
                            const std::vector<std::vector<long>>& a_inv_t) {
  // vertices map by A; facet normals by A^{-T}, provided here directly.
  std::vector<Halfspace> facets;
  for (const auto& f : p.facets()) {
    RationalVector normal(f.normal.size(), Rational(0));
    for (std::size_t i = 0; i < normal.size(); ++i) {
      for (std::size_t j = 0; j < normal.size(); ++j) {
        normal[i] += Rational(a_inv_t[i][j]) * f.normal[j];
      }
    }
    facets.push_back({std::move(normal), f.offset});
  }
  return Polytope::from_facets(p.dim(), std::move(facets), p.canonical());
}

}  // namespace

TEST_CASE("lattice equivariance of the named solvers") {
  const auto& bl1 = catalog_entry("bl1p2").polytope;

  // coordinate swap (a symmetry of bl1p2: outputs must be swap-invariant)
  const auto tz = tian_zhu_field(bl1);
  CHECK(close(tz.field[0], tz.field[1], 1e-12));

  // shear B = [[1,1],[0,1]] acting on x; fields transform by B^{-T}
  const auto sheared = transform_polytope(bl1, {{1, 0}, {-1, 1}});
  const auto tz_sheared = tian_zhu_field(sheared);
  // B^{-T} tau = [[1,0],[-1,1]] tau
  CHECK(close(tz_sheared.field[0], tz.field[0], 1e-9));
  CHECK(close(tz_sheared.field[1], tz.field[1] - tz.field[0], 1e-9));

  const auto reeb = msy_reeb(bl1);
  const auto reeb_sheared = msy_reeb(sheared);
  CHECK(close(reeb_sheared.field[0], reeb.field[0], 1e-9));
  CHECK(close(reeb_sheared.field[1], reeb.field[1] - reeb.field[0], 1e-9));

  // 3-cycle of the p2 vertices leaves its (zero) outputs fixed
  const auto rotated =
      transform_polytope(catalog_entry("p2").polytope, {{0, 1}, {-1, -1}});
  CHECK(tian_zhu_field(rotated).field.norm() <= 1e-10);
}

TEST_CASE("named solvers reject bad inputs") {
  const auto& p2 = catalog_entry("p2").polytope;
  CHECK_THROWS_AS(xi_n(p2, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(soliton_pair(p2, vec2(2.0, 0.0)), DomainViolationError);
  const auto f = ConvexFunctional::msy(p2);
  CHECK_THROWS_AS(newton_minimize(f, vec2(1.5, 0.0)), DomainViolationError);
}
