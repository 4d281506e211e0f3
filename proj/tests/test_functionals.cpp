#include <doctest.h>

#include <cmath>
#include <random>

#include "soliton/catalog.hpp"
#include "soliton/errors.hpp"
#include "soliton/functionals.hpp"
#include "soliton/integrate.hpp"
#include "soliton/solve.hpp"
#include "test_helpers.hpp"

using namespace soliton;
using namespace soliton::testing;

TEST_CASE("tian-zhu functional at the origin") {
  const auto& p2 = catalog_entry("p2").polytope;
  const auto f = ConvexFunctional::tian_zhu(p2);
  const auto ev = f.evaluate(Eigen::VectorXd::Zero(2));
  CHECK(close_rel(ev.value, 4.5, 1e-14));
  CHECK(ev.gradient.norm() <= 1e-13);
  CHECK(ev.hessian.rows() == 2);
}

TEST_CASE("msy and volume-n at the origin") {
  const auto& p2 = catalog_entry("p2").polytope;
  const auto msy = ConvexFunctional::msy(p2);
  CHECK(msy.evaluate(Eigen::VectorXd::Zero(2)).gradient.norm() <= 1e-13);
  CHECK(close_rel(msy.evaluate(Eigen::VectorXd::Zero(2)).value, 4.5, 1e-13));

  for (const auto& entry : catalog()) {
    const auto vn = ConvexFunctional::volume_n(entry.polytope, 32.0);
    const auto ev = vn.evaluate(Eigen::VectorXd::Zero(entry.polytope.dim()));
    CHECK(close_rel(ev.value, entry.polytope.volume(), 1e-12));
  }
}

TEST_CASE("futaki moments") {
  const auto& p2 = catalog_entry("p2").polytope;
  CHECK(futaki(p2, Weight::constant(1.0)).norm() <= 1e-14);

  const auto& p1 = catalog_entry("p1").polytope;
  CHECK(close_rel(futaki(p1, Weight::exp_linear(vec1(1.0)))[0],
                  2.0 / std::exp(1.0), 1e-14));

  // the one-point blow-up has an exact constant-weight moment (1/3, 1/3)
  const auto& bl1 = catalog_entry("bl1p2").polytope;
  const Eigen::VectorXd fut = futaki(bl1, Weight::constant(1.0));
  CHECK(close_rel(fut[0], 1.0 / 3.0, 1e-13));
  CHECK(close_rel(fut[1], 1.0 / 3.0, 1e-13));
}

TEST_CASE("weighted volumes match anticanonical degrees") {
  CHECK(close_rel(weighted_volume(catalog_entry("p2").polytope,
                                  Weight::constant(1.0)),
                  9.0, 1e-14));
  CHECK(close_rel(weighted_volume(catalog_entry("p1").polytope,
                                  Weight::constant(1.0)),
                  2.0, 1e-14));
  CHECK(close_rel(weighted_volume(catalog_entry("p3").polytope,
                                  Weight::constant(1.0)),
                  64.0, 1e-13));
  auto mc = monte_carlo_oracle(catalog_entry("p3").polytope,
                               Weight::constant(1.0), 1'000'000, 2);
  CHECK(close(weighted_volume(catalog_entry("p3").polytope,
                              Weight::constant(1.0)),
              6.0 * mc.estimate, 18.0 * mc.stderr_est));
}

TEST_CASE("gradient consistency identities") {
  const auto& bl1 = catalog_entry("bl1p2").polytope;
  const int n = bl1.dim();

  const Eigen::VectorXd zeta = vec2(0.3, -0.4);
  const auto tz = ConvexFunctional::tian_zhu(bl1).evaluate(zeta);
  const Eigen::VectorXd tz_fut = futaki(bl1, Weight::exp_linear(zeta));
  CHECK((tz.gradient - tz_fut).norm() <= 1e-10 * (1.0 + tz_fut.norm()));

  const Eigen::VectorXd xi = vec2(0.1, 0.15);
  const Eigen::VectorXd a = vec2(-0.2, 0.3);
  const auto sa = ConvexFunctional::sasaki_soliton(bl1, xi).evaluate(a);
  const Eigen::VectorXd sa_fut = futaki(bl1, Weight::tkrs(xi, a, -(n + 2.0)));
  CHECK((sa.gradient - sa_fut).norm() <= 1e-10 * (1.0 + sa_fut.norm()));

  const auto msy = ConvexFunctional::msy(bl1).evaluate(xi);
  const Eigen::VectorXd msy_fut =
      futaki(bl1, Weight::pow_affine(AffineFn{xi, 1.0}, -(n + 2.0)));
  CHECK((msy.gradient + (n + 1.0) * msy_fut).norm() <=
        1e-10 * (1.0 + msy_fut.norm()));

  const double big_n = 24.0;
  const auto vn = ConvexFunctional::volume_n(bl1, big_n).evaluate(zeta);
  const Eigen::VectorXd vn_fut =
      ((big_n - 1.0) / big_n) * futaki(bl1, Weight::qn(zeta, big_n));
  CHECK((vn.gradient - vn_fut).norm() <= 1e-10 * (1.0 + vn_fut.norm()));
}

namespace {

void check_derivatives(const ConvexFunctional& f, const Eigen::VectorXd& x) {
  const auto ev = f.evaluate(x);
  const int n = static_cast<int>(x.size());
  const double hg = 1e-5;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[i] = hg;
    const double fd = (f.value(x + e) - f.value(x - e)) / (2 * hg);
    CHECK(close_rel(ev.gradient[i], fd, 1e-6));
  }
  const double hh = 1e-4;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[i] = hh;
    const Eigen::VectorXd gd =
        (f.evaluate(x + e).gradient - f.evaluate(x - e).gradient) / (2 * hh);
    for (int j = 0; j < n; ++j) {
      CHECK(close_rel(ev.hessian(i, j), gd[j], 1e-4));
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ev.hessian);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10 * ev.hessian.trace());
}

}  // namespace

TEST_CASE("finite-difference checks on a catalog sample") {
  std::mt19937_64 rng(2024);
  for (const char* name : {"p1", "bl1p2", "p1xp2"}) {
    const auto& p = catalog_entry(name).polytope;
    const int n = p.dim();
    for (int trial = 0; trial < 3; ++trial) {
      Eigen::VectorXd xi = random_feasible_xi(p, rng, 0.4);
      if (xi.norm() > 0.8) xi *= 0.8 / xi.norm();
      check_derivatives(ConvexFunctional::tian_zhu(p), xi);
      check_derivatives(ConvexFunctional::msy(p), xi);
      check_derivatives(ConvexFunctional::volume_n(p, 16.0), xi);
      const Eigen::VectorXd a = 0.3 * Eigen::VectorXd::Random(n);
      check_derivatives(ConvexFunctional::sasaki_soliton(p, xi), a);
    }
  }
}

TEST_CASE("domain checks and blow-up") {
  const auto& p2 = catalog_entry("p2").polytope;
  const auto msy = ConvexFunctional::msy(p2);
  CHECK_THROWS_AS(msy.evaluate(vec2(1.5, 0.0)), DomainViolationError);

  // walk toward the dual boundary: the value blows up
  const Eigen::VectorXd dir = vec2(1.0, 0.0);
  double t_max = 1e300;
  const auto& vm = p2.vertex_matrix();
  for (Eigen::Index j = 0; j < vm.cols(); ++j) {
    const double s = dir.dot(vm.col(j));
    if (s < 0) t_max = std::min(t_max, -1.0 / s);
  }
  const double v0 = msy.value(Eigen::VectorXd::Zero(2));
  const double near = msy.value((1.0 - 1e-4) * t_max * dir);
  CHECK(near >= 1e3 * v0);

  const auto vn = ConvexFunctional::volume_n(p2, 8.0);
  const double w0 = vn.value(Eigen::VectorXd::Zero(2));
  const double wnear = vn.value(-(1.0 - 1e-4) * 8.0 * t_max * dir);
  CHECK(wnear >= 1e3 * w0);
}
