#pragma once

#include <Eigen/Dense>

#include <string>

#include <json.hpp>

#include "soliton/polytope.hpp"
#include "soliton/solve.hpp"
#include "soliton/weight.hpp"

namespace soliton {

/// {"dim": n, "facets": [{"normal": [...], "offset": q}], "canonical": bool}
/// with rationals as integers or "p/q" strings.
nlohmann::json polytope_to_json(const Polytope& p);
Polytope polytope_from_json(const nlohmann::json& j);

/// Weight descriptors: {"kind": "const"|"exp_linear"|"pow_affine"|"tkrs"|
/// "qn"|"scaled", ...}.
nlohmann::json weight_to_json(const Weight& w);
Weight weight_from_json(const nlohmann::json& j);

/// Accepts a raw JSON object string or the shorthand "const".
Weight parse_weight_arg(const std::string& text);

/// "catalog:<name>" or "file:<path.json>"; a bare name tries the catalog.
Polytope resolve_polytope_ref(const std::string& ref);

nlohmann::json solve_report_to_json(const SolveReport& report);

Eigen::VectorXd parse_vector_arg(const std::string& csv);

}  // namespace soliton
