#include "soliton/io.hpp"

#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "soliton/catalog.hpp"

namespace soliton {

namespace {

nlohmann::json rational_json(const Rational& q) {
  if (denominator(q) == 1) {
    const auto num = numerator(q);
    if (num >= std::numeric_limits<long long>::min() &&
        num <= std::numeric_limits<long long>::max()) {
      return num.convert_to<long long>();
    }
  }
  return rational_to_string(q);
}

Rational rational_from_json(const nlohmann::json& j) {
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_string()) return rational_from_string(j.get<std::string>());
  throw std::invalid_argument(
      "rationals must be integers or \"p/q\" strings, got: " + j.dump());
}

nlohmann::json vec_json(const Eigen::VectorXd& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw std::invalid_argument("expected a JSON array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

}  // namespace

nlohmann::json polytope_to_json(const Polytope& p) {
  nlohmann::json facets = nlohmann::json::array();
  for (const auto& f : p.facets()) {
    nlohmann::json normal = nlohmann::json::array();
    for (const auto& q : f.normal) normal.push_back(rational_json(q));
    facets.push_back({{"normal", normal}, {"offset", rational_json(f.offset)}});
  }
  return {{"dim", p.dim()}, {"facets", facets}, {"canonical", p.canonical()}};
}

Polytope polytope_from_json(const nlohmann::json& j) {
  const int dim = j.at("dim").get<int>();
  const bool canonical = j.value("canonical", false);
  std::vector<Halfspace> facets;
  for (const auto& fj : j.at("facets")) {
    Halfspace h;
    for (const auto& c : fj.at("normal")) {
      h.normal.push_back(rational_from_json(c));
    }
    h.offset = rational_from_json(fj.at("offset"));
    facets.push_back(std::move(h));
  }
  return Polytope::from_facets(dim, std::move(facets), canonical);
}

nlohmann::json weight_to_json(const Weight& w) {
  switch (w.kind()) {
    case Weight::Kind::Constant:
      return {{"kind", "const"}, {"c", w.constant_value()}};
    case Weight::Kind::ExpLinear:
      return {{"kind", "exp_linear"}, {"tau", vec_json(w.tau())}};
    case Weight::Kind::PowAffine: {
      nlohmann::json j = {{"kind", "pow_affine"},
                          {"xi", vec_json(w.affine().slope)},
                          {"p", w.exponent()}};
      if (w.affine().constant != 1.0) j["constant"] = w.affine().constant;
      return j;
    }
    case Weight::Kind::TKRS:
      return {{"kind", "tkrs"},
              {"xi", vec_json(w.xi())},
              {"tau", vec_json(w.tau())},
              {"p", w.exponent()}};
    case Weight::Kind::QN:
      return {{"kind", "qn"}, {"xi", vec_json(w.xi())}, {"N", w.big_n()}};
    case Weight::Kind::Scaled:
      return {{"kind", "scaled"},
              {"lambda", w.scale()},
              {"inner", weight_to_json(w.inner())}};
  }
  throw std::logic_error("unreachable weight kind");
}

Weight weight_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "const") return Weight::constant(j.value("c", 1.0));
  if (kind == "exp_linear") {
    return Weight::exp_linear(vec_from_json(j.at("tau")));
  }
  if (kind == "pow_affine") {
    AffineFn ell{vec_from_json(j.at("xi")), j.value("constant", 1.0)};
    return Weight::pow_affine(std::move(ell), j.at("p").get<double>());
  }
  if (kind == "tkrs") {
    return Weight::tkrs(vec_from_json(j.at("xi")), vec_from_json(j.at("tau")),
                        j.at("p").get<double>());
  }
  if (kind == "qn") {
    return Weight::qn(vec_from_json(j.at("xi")), j.at("N").get<double>());
  }
  if (kind == "scaled") {
    return Weight::scaled(j.at("lambda").get<double>(),
                          weight_from_json(j.at("inner")));
  }
  throw std::invalid_argument("unknown weight kind: " + kind);
}

Weight parse_weight_arg(const std::string& text) {
  if (text == "const") return Weight::constant(1.0);
  return weight_from_json(nlohmann::json::parse(text));
}

Polytope resolve_polytope_ref(const std::string& ref) {
  if (ref.rfind("catalog:", 0) == 0) {
    return catalog_entry(ref.substr(8)).polytope;
  }
  if (ref.rfind("file:", 0) == 0) {
    const std::string path = ref.substr(5);
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open polytope file: " + path);
    nlohmann::json j;
    in >> j;
    return polytope_from_json(j);
  }
  return catalog_entry(ref).polytope;
}

nlohmann::json solve_report_to_json(const SolveReport& report) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& t : report.trace) {
    trace.push_back({{"point", vec_json(t.point)},
                     {"value", t.value},
                     {"gradient_norm", t.gradient_norm}});
  }
  return {{"minimizer", vec_json(report.minimizer)},
          {"gradient_norm", report.gradient_norm},
          {"iterations", report.iterations},
          {"hessian_condition", report.hessian_condition},
          {"converged", report.converged},
          {"hessian_regularized", report.hessian_regularized},
          {"trace", trace}};
}

Eigen::VectorXd parse_vector_arg(const std::string& csv) {
  std::vector<double> vals;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    vals.push_back(std::stod(tok));
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = vals[i];
  }
  return v;
}

}  // namespace soliton
