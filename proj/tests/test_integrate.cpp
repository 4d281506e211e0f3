#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "soliton/catalog.hpp"
#include "soliton/errors.hpp"
#include "soliton/integrate.hpp"
#include "test_helpers.hpp"

using namespace soliton;
using namespace soliton::testing;

namespace {

Simplex make_simplex(const std::vector<std::vector<double>>& verts) {
  const int n = static_cast<int>(verts[0].size());
  Simplex s;
  s.vertices.resize(n, static_cast<Eigen::Index>(verts.size()));
  for (std::size_t j = 0; j < verts.size(); ++j) {
    for (int i = 0; i < n; ++i) {
      s.vertices(i, static_cast<Eigen::Index>(j)) =
          verts[j][static_cast<std::size_t>(i)];
    }
  }
  Eigen::MatrixXd edges(n, n);
  for (int j = 1; j <= n; ++j) {
    edges.col(j - 1) = s.vertices.col(j) - s.vertices.col(0);
  }
  double nf = 1.0;
  for (int k = 2; k <= n; ++k) nf *= k;
  s.volume = std::abs(edges.determinant()) / nf;
  return s;
}

// Classical partial-fraction formula, valid for well-separated nodes; this
// is the independent oracle for the divided-difference engine.
double dd_oracle(const std::vector<double>& nodes) {
  double sum = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    double denom = 1;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (j != i) denom *= nodes[i] - nodes[j];
    }
    sum += std::exp(nodes[i]) / denom;
  }
  return sum;
}

}  // namespace

TEST_CASE("exp divided differences match the partial-fraction oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + static_cast<int>(rng() % 5);
    std::vector<double> nodes;
    bool separated = true;
    for (int i = 0; i < k; ++i) nodes.push_back(unif(rng));
    for (std::size_t i = 0; i < nodes.size() && separated; ++i) {
      for (std::size_t j = i + 1; j < nodes.size(); ++j) {
        if (std::abs(nodes[i] - nodes[j]) < 1e-2) separated = false;
      }
    }
    if (!separated) continue;
    const double got = exp_divided_difference(nodes);
    const double want = dd_oracle(nodes);
    CHECK(close_rel(got, want, 1e-11));
  }
}

TEST_CASE("confluent divided differences") {
  // All nodes equal: dd over (k+1) copies of x is e^x / k!.
  for (int k = 0; k <= 6; ++k) {
    std::vector<double> nodes(static_cast<std::size_t>(k) + 1, 0.7);
    double kf = 1;
    for (int i = 2; i <= k; ++i) kf *= i;
    CHECK(close_rel(exp_divided_difference(nodes), std::exp(0.7) / kf, 1e-14));
  }
  // Clustered nodes agree with slightly-separated ones.
  std::vector<double> tight{0.5, 0.5 + 1e-9, 0.5 + 2e-9};
  std::vector<double> loose{0.5, 0.5 + 1e-4, 0.5 + 2e-4};
  CHECK(close_rel(exp_divided_difference(tight),
                  exp_divided_difference(loose), 2e-4));
}

TEST_CASE("simplex exponential integrals") {
  // [0,1] with zeta = t: (e^t - 1)/t, and the t -> 0 limit.
  auto seg01 = make_simplex({{0.0}, {1.0}});
  for (double t : {2.0, 0.5, 1e-9, 0.0}) {
    const double expect = t == 0.0 ? 1.0 : (std::expm1(t)) / t;
    const double got = simplex_exp_poly(seg01, vec1(t), QuadPoly{1.0, {}, {}});
    CHECK(close_rel(got, expect, 1e-13));
  }

  // integral of x e^x over [-1,1] is 2/e
  auto seg = make_simplex({{-1.0}, {1.0}});
  QuadPoly qx{0.0, vec1(1.0), {}};
  CHECK(close_rel(simplex_exp_poly(seg, vec1(1.0), qx), 2.0 / std::exp(1.0),
                  1e-14));

  // unit 2-simplex with zeta = (1,2) against the Monte Carlo oracle
  auto tri = make_simplex({{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}});
  const double got = simplex_exp_poly(tri, vec2(1.0, 2.0), QuadPoly{1.0, {}, {}});
  auto poly = Polytope::from_facets(
      2, {hs({1, 0}, 0), hs({0, 1}, 0), hs({-1, -1}, 1)}, false);
  auto mc = monte_carlo_oracle(poly, Weight::exp_linear(vec2(1.0, 2.0)),
                               10'000'000, 123);
  CHECK(close(got, mc.estimate, 3.0 * mc.stderr_est));
}

TEST_CASE("quadratic factors against brute-force quadrature") {
  // dense trapezoid grid as the independent route
  auto tri = make_simplex({{-1.0, -1.0}, {2.0, -1.0}, {-1.0, 2.0}});
  const Eigen::VectorXd zeta = vec2(0.4, -0.3);
  Eigen::MatrixXd q(2, 2);
  q << 1.0, 0.5, 0.5, -0.25;
  QuadPoly poly{0.7, vec2(-1.0, 2.0), q};

  const int grid = 1500;
  double brute = 0;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const double x = -1.0 + 3.0 * (i + 0.5) / grid;
      const double y = -1.0 + 3.0 * (j + 0.5) / grid;
      if (x + y > 1.0) continue;
      Eigen::VectorXd p = vec2(x, y);
      const double val = poly.c0 + poly.lin.dot(p) + p.dot(q * p);
      brute += val * std::exp(zeta.dot(p));
    }
  }
  brute *= 9.0 / (static_cast<double>(grid) * grid);
  CHECK(close_rel(simplex_exp_poly(tri, zeta, poly), brute, 2e-3));
}

TEST_CASE("inverse power closed forms") {
  auto seg = make_simplex({{-1.0}, {1.0}});
  MomentData m;
  // (1 + x/2)^{-2} integrates to 8/3; (1 + x/2)^{-3} to 32/9
  REQUIRE(powaffine_simplex_moments(seg, vec1(0.5), 1.0, -2.0, 0, m));
  CHECK(close_rel(m.mass, 8.0 / 3.0, 1e-14));
  REQUIRE(powaffine_simplex_moments(seg, vec1(0.5), 1.0, -3.0, 0, m));
  CHECK(close_rel(m.mass, 32.0 / 9.0, 1e-14));
  // closed form requires a log-free antiderivative chain
  CHECK_FALSE(powaffine_simplex_moments(seg, vec1(0.5), 1.0, -1.0, 0, m));
  CHECK_FALSE(powaffine_simplex_moments(seg, vec1(0.5), 1.0, -2.0, 1, m));
}

TEST_CASE("exact and adaptive routes agree") {
  const auto& p2 = catalog_entry("p2").polytope;
  IntegrationConfig adaptive;
  adaptive.mode = IntegrationMode::Adaptive;

  const Weight wexp = Weight::exp_linear(vec2(0.3, -0.2));
  const auto a = integrate_weight(p2, wexp, 2);
  const auto b = integrate_weight(p2, wexp, 2, adaptive);
  CHECK(close_rel(a.mass, b.mass, 1e-11));
  CHECK((a.first - b.first).norm() <= 1e-10);
  CHECK((a.second - b.second).norm() <= 1e-10);

  const Weight wpow =
      Weight::pow_affine(AffineFn{vec2(0.15, 0.1), 1.0}, -5.0);
  const auto c = integrate_weight(p2, wpow, 1);
  const auto d = integrate_weight(p2, wpow, 1, adaptive);
  CHECK(close_rel(c.mass, d.mass, 1e-10));
  CHECK((c.first - d.first).norm() <= 1e-10 * (1.0 + c.mass));
}

TEST_CASE("integrate_weight catalog examples") {
  const auto& p2 = catalog_entry("p2").polytope;
  const auto m = integrate_weight(p2, Weight::constant(1.0), 1);
  CHECK(close_rel(m.mass, 4.5, 1e-15));
  CHECK(m.first.norm() <= 1e-14);

  const auto& p1 = catalog_entry("p1").polytope;
  const auto e = integrate_weight(p1, Weight::exp_linear(vec1(1.0)), 1);
  CHECK(close_rel(e.mass, std::exp(1.0) - std::exp(-1.0), 1e-14));
  CHECK(close_rel(e.first[0], 2.0 / std::exp(1.0), 1e-14));

  const Weight pa = Weight::pow_affine(AffineFn{vec2(0.1, 0.1), 1.0}, -4.0);
  const auto p = integrate_weight(p2, pa, 0);
  auto mc = monte_carlo_oracle(p2, pa, 1'000'000, 99);
  CHECK(close(p.mass, mc.estimate, 3.0 * mc.stderr_est));
}

TEST_CASE("monte carlo oracle closed forms") {
  const auto& p1 = catalog_entry("p1").polytope;
  auto square = product(p1, p1);
  auto mc = monte_carlo_oracle(square, Weight::constant(1.0), 1'000'000, 5);
  CHECK(mc.estimate == 4.0);  // every box sample lands inside
  auto me = monte_carlo_oracle(p1, Weight::exp_linear(vec1(1.0)), 1'000'000, 5);
  CHECK(close(me.estimate, std::exp(1.0) - std::exp(-1.0),
              3.0 * me.stderr_est));

  // q_N agrees with the adaptive route within three standard errors
  const auto& p2 = catalog_entry("p2").polytope;
  const Weight qn = Weight::qn(vec2(0.3, 0.0), 16.0);
  const auto exact = integrate_weight(p2, qn, 0);
  auto mq = monte_carlo_oracle(p2, qn, 1'000'000, 31);
  CHECK(close(exact.mass, mq.estimate, 3.0 * mq.stderr_est));

  // reproducibility for a fixed seed
  auto mq2 = monte_carlo_oracle(p2, qn, 1'000'000, 31);
  CHECK(mq.estimate == mq2.estimate);
  CHECK(mq.stderr_est == mq2.stderr_est);
}

TEST_CASE("fubini over products") {
  const auto& p2 = catalog_entry("p2").polytope;
  const auto& p1 = catalog_entry("p1").polytope;
  auto prod = product(p2, p1);
  const Eigen::VectorXd tau3 = vec3(0.4, -0.1, 0.0);
  const auto lhs = integrate_weight(prod, Weight::exp_linear(tau3), 0);
  const auto rhs = integrate_weight(p2, Weight::exp_linear(vec2(0.4, -0.1)), 0);
  CHECK(close_rel(lhs.mass, rhs.mass * 2.0, 1e-13));
}

TEST_CASE("translation equivariance of exponential moments") {
  // [-1,1] shifted by 1/2
  auto shifted = Polytope::from_facets(
      1, {Halfspace{{Rational(1)}, Rational(1, 2)},
          Halfspace{{Rational(-1)}, Rational(3, 2)}},
      false);
  const double zeta = 0.8;
  const auto base =
      integrate_weight(catalog_entry("p1").polytope, Weight::exp_linear(vec1(zeta)), 0);
  const auto moved = integrate_weight(shifted, Weight::exp_linear(vec1(zeta)), 0);
  CHECK(close_rel(moved.mass, std::exp(zeta * 0.5) * base.mass, 1e-13));
}

TEST_CASE("clip additivity of integrals") {
  const auto& p2 = catalog_entry("p2").polytope;
  const Weight w = Weight::tkrs(vec2(0.1, 0.05), vec2(0.2, -0.1), -4.0);
  auto above = clip(p2, hs({1, 0}, 0));
  auto below = clip(p2, hs({-1, 0}, 0));
  const double whole = integrate_weight(p2, w, 0).mass;
  const double split = integrate_weight(above, w, 0).mass +
                       integrate_weight(below, w, 0).mass;
  CHECK(close_rel(whole, split, 1e-10));
}

TEST_CASE("second moments are symmetric positive semidefinite") {
  for (const auto& entry : catalog()) {
    const int n = entry.polytope.dim();
    const Eigen::VectorXd tau = Eigen::VectorXd::Constant(n, 0.2);
    const auto m = integrate_weight(entry.polytope, Weight::exp_linear(tau), 2);
    CHECK((m.second - m.second.transpose()).norm() <= 1e-12 * m.second.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.second);
    CHECK(es.eigenvalues().minCoeff() >= -1e-12 * m.second.trace());
    // Cauchy-Schwarz: first^T second^{-1} first <= mass
    const Eigen::VectorXd y = m.second.ldlt().solve(m.first);
    CHECK(m.first.dot(y) <= m.mass * (1.0 + 1e-12));
  }
}

TEST_CASE("thread count does not change results") {
  const auto& p3 = catalog_entry("p1xp2").polytope;
  const Weight w = Weight::tkrs(vec3(0.1, -0.05, 0.08), vec3(0.2, 0.1, -0.3),
                                -5.0);
  IntegrationConfig one;
  one.mode = IntegrationMode::Adaptive;
  one.threads = 1;
  IntegrationConfig many = one;
  many.threads = 4;
  const auto a = integrate_weight(p3, w, 2, one);
  const auto b = integrate_weight(p3, w, 2, many);
  CHECK(a.mass == b.mass);
  CHECK((a.first - b.first).norm() == 0.0);
  CHECK((a.second - b.second).norm() == 0.0);
}

TEST_CASE("tolerance failures are flagged, not thrown") {
  const auto& p2 = catalog_entry("p2").polytope;
  IntegrationConfig cruel;
  cruel.mode = IntegrationMode::Adaptive;
  cruel.quadrature_degree = 2;
  cruel.max_subdivision_depth = 0;
  cruel.rel_tol = 1e-15;
  const Weight w = Weight::tkrs(vec2(0.3, 0.2), vec2(0.5, -0.4), -4.0);
  const auto m = integrate_weight(p2, w, 0, cruel);
  CHECK_FALSE(m.tolerance_met);
  CHECK(std::isfinite(m.mass));
  CHECK(m.mass > 0);
}

TEST_CASE("pairwise tree sum is order-deterministic") {
  std::vector<double> xs{1e16, 1.0, -1e16, 1.0, 0.5, -0.25};
  const double a = pairwise_tree_sum(xs);
  const double b = pairwise_tree_sum(xs);
  CHECK(a == b);
}

TEST_CASE("exact mode refuses weights without closed forms") {
  const auto& p2 = catalog_entry("p2").polytope;
  IntegrationConfig exact;
  exact.mode = IntegrationMode::Exact;
  CHECK_THROWS_AS(
      integrate_weight(p2, Weight::tkrs(vec2(0.1, 0.0), vec2(0.2, 0.1), -4.0),
                       0, exact),
      IntegrationFailureError);
  CHECK_THROWS_AS(
      integrate_weight(p2, Weight::pow_affine(AffineFn{vec2(0.1, 0.1), 1.0},
                                              -2.5),
                       0, exact),
      IntegrationFailureError);
  // the log-free integer cases stay available
  CHECK_NOTHROW(integrate_weight(
      p2, Weight::pow_affine(AffineFn{vec2(0.1, 0.1), 1.0}, -4.0), 1, exact));
}

TEST_CASE("huge q_N exponents fall back to quadrature") {
  const auto& p1 = catalog_entry("p1").polytope;
  const double big = 300000.0;  // beyond the closed-form cost cap
  const auto m = integrate_weight(p1, Weight::qn(vec1(0.5), big), 0);
  CHECK(m.tolerance_met);
  const auto e = integrate_weight(p1, Weight::exp_linear(vec1(0.5)), 0);
  CHECK(close_rel(m.mass, e.mass, 1e-4));  // q_N -> exp at rate 1/N
}
