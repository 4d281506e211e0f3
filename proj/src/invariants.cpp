#include "soliton/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "soliton/catalog.hpp"
#include "soliton/errors.hpp"
#include "soliton/functionals.hpp"
#include "soliton/integrate.hpp"

namespace soliton {

namespace {

nlohmann::json vec_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

double factorial_d(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

}  // namespace

std::string to_string(ObstructionReport::Kind kind) {
  switch (kind) {
    case ObstructionReport::Kind::Lichnerowicz:
      return "lichnerowicz";
    case ObstructionReport::Kind::Fujita:
      return "fujita";
    case ObstructionReport::Kind::FutakiVanishing:
      return "futaki_vanishing";
    case ObstructionReport::Kind::Beta:
      return "beta";
    case ObstructionReport::Kind::CoercivityRadius:
      return "coercivity_radius";
    case ObstructionReport::Kind::ProductCY:
      return "product_cy";
  }
  return "unknown";
}

ObstructionReport lichnerowicz_check(
    const Polytope& p, const Eigen::VectorXd& tau,
    const std::optional<Eigen::VectorXd>& xi) {
  if (!p.canonical()) {
    throw DomainViolationError("lichnerowicz check needs a canonical polytope");
  }
  const int n = p.dim();
  Eigen::VectorXd xi_eff = xi.value_or(Eigen::VectorXd::Zero(n));
  if (xi && !dual_contains(p, xi_eff)) {
    throw DomainViolationError("xi lies outside the open dual polytope");
  }

  const auto& vm = p.vertex_matrix();
  nlohmann::json table = nlohmann::json::array();
  double margin = std::numeric_limits<double>::infinity();
  Eigen::Index argmin = 0;
  for (Eigen::Index j = 0; j < vm.cols(); ++j) {
    const double m =
        n * (xi_eff.dot(vm.col(j)) + 1.0) - tau.dot(vm.col(j));
    table.push_back({{"vertex", vec_json(vm.col(j))}, {"margin", m}});
    if (m < margin) {
      margin = m;
      argmin = j;
    }
  }

  ObstructionReport rep;
  rep.kind = ObstructionReport::Kind::Lichnerowicz;
  rep.margin = margin;
  rep.passed = margin > 0.0;
  rep.details = {{"n", n},
                 {"tau", vec_json(tau)},
                 {"xi", vec_json(xi_eff)},
                 {"argmin_vertex", vec_json(vm.col(argmin))},
                 {"vertex_margins", table}};
  return rep;
}

ObstructionReport fujita_check(const Polytope& p, const Weight& v,
                               const IntegrationConfig& cfg) {
  v.validate_on(p);
  const int n = p.dim();
  const MomentData m = integrate_weight(p, v, 0, cfg);
  if (!m.tolerance_met) {
    throw IntegrationFailureError("fujita normalization integral failed");
  }
  const double vol = p.volume();
  // Rescale v so its mean over P is one, i.e. Vol_v = Vol.
  const double scale = vol / m.mass;
  const double m_v = min_on_polytope(v, p) * scale;
  const double c1n = factorial_d(n) * vol;
  const double bound = std::pow((n + 1.0) / m_v, n);

  ObstructionReport rep;
  rep.kind = ObstructionReport::Kind::Fujita;
  rep.margin = bound - c1n;
  rep.passed = rep.margin >= -1e-10;  // equality attained on P^n
  rep.details = {{"n", n},          {"c1n", c1n},
                 {"m_v", m_v},      {"bound", bound},
                 {"mass", m.mass},  {"volume", vol},
                 {"normalization_scale", scale}};
  return rep;
}

namespace {

struct BetaEvaluator {
  const Polytope& p;
  const RationalVector& u;
  const Rational& c;
  const Weight& v;
  const IntegrationConfig& cfg;
  double nf;
  mutable std::map<double, double> table;

  double operator()(const Rational& t) const {
    const double key = to_double(t);
    if (auto it = table.find(key); it != table.end()) return it->second;
    RationalVector normal = u;
    Halfspace h{std::move(normal), c - t};
    const Polytope cut = clip(p, h);
    double vol_v = 0.0;
    if (!cut.is_empty() && cut.full_dimensional()) {
      const MomentData m = integrate_weight(cut, v, 0, cfg);
      if (!m.tolerance_met) {
        throw IntegrationFailureError("truncated volume integral failed");
      }
      vol_v = nf * m.mass;
    }
    table[key] = vol_v;
    return vol_v;
  }
};

struct SimpsonState {
  const BetaEvaluator& f;
  int max_depth = 30;

  double recurse(const Rational& a, const Rational& b, double fa, double fm,
                 double fb, double whole, double tol, int depth) const {
    const Rational mid = (a + b) / 2;
    const Rational lm = (a + mid) / 2;
    const Rational rm = (mid + b) / 2;
    const double flm = f(lm);
    const double frm = f(rm);
    const double h = to_double(b - a);
    const double left = h / 12.0 * (fa + 4.0 * flm + fm);
    const double right = h / 12.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (std::abs(diff) <= 15.0 * tol || depth >= max_depth) {
      return left + right + diff / 15.0;
    }
    return recurse(a, mid, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           recurse(mid, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
  }

  double panel(const Rational& a, const Rational& b, double tol) const {
    const Rational mid = (a + b) / 2;
    const double fa = f(a);
    const double fm = f(mid);
    const double fb = f(b);
    const double whole = to_double(b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return recurse(a, b, fa, fm, fb, whole, tol, 0);
  }
};

double beta_outer_integral(const BetaEvaluator& f,
                           const std::vector<Rational>& levels, double rel_tol,
                           bool halve_panels) {
  std::vector<Rational> panels = levels;
  if (halve_panels) {
    std::vector<Rational> fine;
    for (std::size_t i = 0; i + 1 < panels.size(); ++i) {
      fine.push_back(panels[i]);
      fine.push_back((panels[i] + panels[i + 1]) / 2);
    }
    fine.push_back(panels.back());
    panels = std::move(fine);
  }
  SimpsonState simpson{f};

  // Rough pass fixes absolute budgets per panel.
  double rough = 0.0;
  std::vector<double> rough_panel(panels.size() - 1, 0.0);
  for (std::size_t i = 0; i + 1 < panels.size(); ++i) {
    const Rational mid = (panels[i] + panels[i + 1]) / 2;
    const double w = to_double(panels[i + 1] - panels[i]);
    rough_panel[i] = w / 6.0 *
                     (f(panels[i]) + 4.0 * f(mid) + f(panels[i + 1]));
    rough += std::abs(rough_panel[i]);
  }
  const double tol_total = rel_tol * std::max(rough, 1e-300);
  const double span = to_double(panels.back() - panels.front());

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < panels.size(); ++i) {
    const double w = to_double(panels[i + 1] - panels[i]);
    total += simpson.panel(panels[i], panels[i + 1],
                           tol_total * (w / span));
  }
  return total;
}

}  // namespace

ObstructionReport beta_v(const Polytope& p, const RationalVector& u,
                         const Rational& c, double a_disc, const Weight& v,
                         const IntegrationConfig& cfg) {
  if (!(a_disc > 0)) {
    throw InvalidValuationDataError("log discrepancy A must be positive");
  }
  if (u.size() != static_cast<std::size_t>(p.dim())) {
    throw InvalidValuationDataError("valuation vector has wrong dimension");
  }
  v.validate_on(p);

  Rational g_min, g_max;
  bool first = true;
  for (const auto& vx : p.vertices()) {
    const Rational g = dot(u, vx) + c;
    if (first) {
      g_min = g_max = g;
      first = false;
    } else {
      if (g < g_min) g_min = g;
      if (g > g_max) g_max = g;
    }
  }
  if (g_min < 0) {
    throw InvalidValuationDataError(
        "g(x) = <u,x> + c is negative at a vertex of P");
  }

  const double nf = factorial_d(p.dim());
  const MomentData m0 = integrate_weight(p, v, 0, cfg);
  if (!m0.tolerance_met) {
    throw IntegrationFailureError("weighted volume integral failed");
  }
  const double vol_v = nf * m0.mass;

  // Panel boundaries at the vertex levels of g: the truncated volume is a
  // polynomial in t between consecutive levels, which Simpson resolves
  // quickly and the subdivision refines exactly where pieces meet.
  std::vector<Rational> levels{Rational(0)};
  for (const auto& vx : p.vertices()) {
    const Rational g = dot(u, vx) + c;
    if (g > 0 && g <= g_max) levels.push_back(g);
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  BetaEvaluator f{p, u, c, v, cfg, nf, {}};
  double integral = 0.0;
  double integral_halved = 0.0;
  if (g_max > 0) {
    integral = beta_outer_integral(f, levels, cfg.rel_tol, false);
    integral_halved = beta_outer_integral(f, levels, cfg.rel_tol, true);
  }
  const double beta = a_disc * vol_v - integral;
  const double beta_halved = a_disc * vol_v - integral_halved;

  nlohmann::json table = nlohmann::json::array();
  bool monotone = true;
  double prev = std::numeric_limits<double>::infinity();
  const double slack = 1e-9 * (std::abs(vol_v) + 1.0);
  for (const auto& [t, val] : f.table) {
    table.push_back({{"t", t}, {"vol_v_truncated", val}});
    if (val > prev + slack) monotone = false;
    prev = val;
  }

  ObstructionReport rep;
  rep.kind = ObstructionReport::Kind::Beta;
  rep.margin = beta;
  rep.passed = beta >= -1e-9 * std::max(1.0, std::abs(a_disc * vol_v));
  rep.details = {{"A", a_disc},
                 {"vol_v", vol_v},
                 {"t_max", to_double(g_max)},
                 {"outer_integral", integral},
                 {"beta", beta},
                 {"beta_halved_step", beta_halved},
                 {"monotone_truncation", monotone},
                 {"truncation_table", table}};
  return rep;
}

ObstructionReport coercivity_radius(const Weight& v0, const Weight& v1,
                                    const Polytope& p, double lambda_big,
                                    const IntegrationConfig& cfg) {
  if (!(lambda_big > 0)) {
    throw std::invalid_argument("coercivity slope must be positive");
  }
  const double lambda0 = weight_gap(v0, v1, p, cfg);
  const double fut_norm = futaki(p, v1, cfg).norm();

  ObstructionReport rep;
  rep.kind = ObstructionReport::Kind::CoercivityRadius;
  rep.margin = lambda_big - lambda0;
  rep.passed = lambda0 < lambda_big;
  rep.details = {{"lambda0", lambda0},
                 {"slope", lambda_big},
                 {"new_slope", lambda_big - lambda0},
                 {"futaki_v1_norm", fut_norm},
                 {"futaki_v1_vanishes", fut_norm <= 1e-8},
                 {"note", "slope is analytic user input, never estimated"}};
  return rep;
}

ObstructionReport futaki_vanishing_report(const Polytope& p, const Weight& v,
                                          const IntegrationConfig& cfg,
                                          double tolerance) {
  const Eigen::VectorXd fut = futaki(p, v, cfg);
  const double norm = fut.norm();

  ObstructionReport rep;
  rep.kind = ObstructionReport::Kind::FutakiVanishing;
  rep.margin = tolerance - norm;
  rep.passed = rep.margin > 0.0;
  rep.details = {{"futaki", vec_json(fut)},
                 {"futaki_norm", norm},
                 {"tolerance", tolerance},
                 {"existence_predicted_toric", rep.passed}};
  return rep;
}

ObstructionReport product_cy_pipeline(const Polytope& p, int k,
                                      const SolverConfig& cfg) {
  if (!p.canonical()) {
    throw DomainViolationError("product pipeline needs a canonical polytope");
  }
  if (k < 0) throw std::invalid_argument("k must be nonnegative");
  const int n = p.dim();
  const double big_n = n + k + 2;

  ObstructionReport rep;
  rep.kind = ObstructionReport::Kind::ProductCY;
  rep.details["N"] = big_n;
  rep.details["k"] = k;

  NamedSolve xin;
  try {
    xin = xi_n(p, big_n, cfg);
  } catch (const NotConvergedError& e) {
    rep.passed = false;
    rep.margin = -std::numeric_limits<double>::infinity();
    rep.details["error"] = e.what();
    return rep;
  }

  const Polytope pz = k >= 1 ? product(p, reflexive_simplex(k)) : p;
  const int dim_z = pz.dim();
  Eigen::VectorXd xi_z = Eigen::VectorXd::Zero(dim_z);
  xi_z.head(n) = -xin.field / big_n;

  const double margin_a = dual_margin(pz, xi_z);
  const bool ok_a = margin_a > 0.0;

  const Weight w = Weight::pow_affine(AffineFn{xi_z, 1.0}, -(dim_z + 2.0));
  const double res_b = futaki(pz, w, cfg.integration).norm();
  const bool ok_b = res_b <= 1e-9;

  double res_c = std::numeric_limits<double>::infinity();
  bool ok_c = false;
  try {
    const NamedSolve reeb = msy_reeb(pz, cfg);
    res_c = (reeb.field - xi_z).norm();
    ok_c = res_c <= 1e-8;
    rep.details["msy_minimizer"] = vec_json(reeb.field);
    rep.details["msy_residual_norm"] = reeb.residual_norm;
  } catch (const NotConvergedError& e) {
    rep.details["msy_error"] = e.what();
  }

  rep.passed = ok_a && ok_b && ok_c;
  rep.margin = std::min({margin_a, 1e-9 - res_b, 1e-8 - res_c});
  rep.details["dim_z"] = dim_z;
  rep.details["xi_n"] = vec_json(xin.field);
  rep.details["xi_n_residual"] = xin.residual_norm;
  rep.details["xi_z"] = vec_json(xi_z);
  rep.details["dual_margin"] = margin_a;
  rep.details["futaki_residual"] = res_b;
  rep.details["msy_distance"] = res_c;
  rep.details["check_dual_contains"] = ok_a;
  rep.details["check_futaki_vanishes"] = ok_b;
  rep.details["check_msy_matches"] = ok_c;
  return rep;
}

nlohmann::json report_to_json(const ObstructionReport& report) {
  return {{"schema_version", 1},
          {"kind", to_string(report.kind)},
          {"passed", report.passed},
          {"margin", report.margin},
          {"details", report.details}};
}

}  // namespace soliton
