#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "soliton/catalog.hpp"
#include "soliton/errors.hpp"
#include "soliton/functionals.hpp"
#include "soliton/integrate.hpp"
#include "soliton/invariants.hpp"
#include "soliton/io.hpp"
#include "soliton/solve.hpp"
#include "soliton/weight.hpp"

namespace {

using nlohmann::json;
using namespace soliton;

struct GlobalOptions {
  double rel_tol = 1e-11;
  int quad_degree = 20;
  std::uint64_t seed = 0;
  std::int64_t mc_samples = 1'000'000;
  int threads = 0;
  std::string out_format = "json";
  std::string output_path;
  bool emit_plot_data = false;

  IntegrationConfig integration() const {
    IntegrationConfig cfg;
    cfg.rel_tol = rel_tol;
    cfg.quadrature_degree = quad_degree;
    cfg.seed = seed;
    cfg.mc_samples = mc_samples;
    cfg.threads = threads;
    return cfg;
  }

  SolverConfig solver() const {
    SolverConfig cfg;
    cfg.integration = integration();
    return cfg;
  }

  json config_echo() const {
    return {{"rel_tol", rel_tol},
            {"quad_degree", quad_degree},
            {"seed", seed},
            {"mc_samples", mc_samples},
            {"threads", threads}};
  }
};

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ",";
    line += cells[i];
  }
  return line + "\n";
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Emitter {
  const GlobalOptions& opts;
  std::string command;
  json outputs = json::object();
  std::string csv_table;         // optional tabular view
  std::string csv_default_name;  // used by --emit-plot-data

  void print_and_write() const {
    const json report = {{"schema_version", 1},
                         {"command", command},
                         {"config", opts.config_echo()},
                         {"outputs", outputs}};
    const std::string body = report.dump(2) + "\n";
    std::cout << body;
    if (!opts.output_path.empty()) {
      std::ofstream out(opts.output_path, std::ios::binary);
      if (!out) {
        throw std::runtime_error("cannot write output file: " +
                                 opts.output_path);
      }
      if (opts.out_format == "csv" && !csv_table.empty()) {
        out << csv_table;
      } else {
        out << body;
      }
    }
    if (opts.emit_plot_data && !csv_table.empty()) {
      const std::string path = csv_default_name;
      std::ofstream out(path, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write plot data: " + path);
      out << csv_table;
    }
  }
};

int run_cli(int argc, char** argv) {
  CLI::App app{"weighted-soliton toolkit for canonical moment polytopes"};
  app.require_subcommand(1);
  app.set_config("--config");
  app.fallthrough();

  GlobalOptions opts;
  app.add_option("--rel-tol", opts.rel_tol, "integration relative tolerance");
  app.add_option("--quad-degree", opts.quad_degree, "quadrature degree");
  app.add_option("--seed", opts.seed, "Monte Carlo seed");
  app.add_option("--mc-samples", opts.mc_samples, "Monte Carlo sample count");
  app.add_option("--threads", opts.threads,
                 "integration threads (0: SOLITON_POLYTOPE_THREADS or cores)");
  app.add_option("--out", opts.out_format, "file format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--output", opts.output_path, "write the report to a file");
  app.add_flag("--emit-plot-data", opts.emit_plot_data,
               "write tabular CSV alongside the report");

  std::string poly_ref, weight_arg = "const", v0_arg, v1_arg;
  std::string xi_arg, tau_arg, nlist_arg = "8,16,32,64,128,256,512,1024";
  std::string u_arg, c_arg = "1", catalog_action, catalog_name;
  double a_disc = 1.0, slope = 0.0, big_n = 64.0;
  int k_factor = 1, order = 1;
  bool use_mc = false;

  auto add_poly = [&](CLI::App* cmd) {
    cmd->add_option("polytope", poly_ref,
                    "catalog:<name>, file:<path.json>, or a catalog name")
        ->required();
  };

  auto* c_soliton = app.add_subcommand("soliton", "Tian-Zhu soliton field");
  add_poly(c_soliton);

  auto* c_reeb = app.add_subcommand("reeb", "volume-minimizing Reeb field");
  add_poly(c_reeb);

  auto* c_pair = app.add_subcommand("pair", "transversal soliton pair tau(xi)");
  add_poly(c_pair);
  c_pair->add_option("--xi", xi_arg, "comma-separated xi")->required();

  auto* c_xiseq = app.add_subcommand("xi-seq", "xi_N convergence table");
  add_poly(c_xiseq);
  c_xiseq->add_option("--N-list", nlist_arg, "comma-separated N values");

  auto* c_lich = app.add_subcommand("lich", "Lichnerowicz vertex bound");
  add_poly(c_lich);
  c_lich->add_option("--tau", tau_arg, "field to bound (default: computed)");
  c_lich->add_option("--xi", xi_arg, "Reeb parameter (default: 0)");

  auto* c_fujita = app.add_subcommand("fujita", "Fujita volume bound");
  add_poly(c_fujita);
  c_fujita->add_option("--weight", weight_arg, "weight JSON or 'const'");

  auto* c_beta = app.add_subcommand("beta", "valuative beta invariant");
  add_poly(c_beta);
  c_beta->add_option("--u", u_arg, "lattice vector, comma-separated integers")
      ->required();
  c_beta->add_option("--c", c_arg, "offset (rational, e.g. 2 or 3/2)");
  c_beta->add_option("--A", a_disc, "log discrepancy")->required();
  c_beta->add_option("--weight", weight_arg, "weight JSON or 'const'");

  auto* c_gap = app.add_subcommand("gap", "normalized weight gap lambda0");
  add_poly(c_gap);
  c_gap->add_option("--v0", v0_arg, "base weight JSON or 'const'")->required();
  c_gap->add_option("--v1", v1_arg, "new weight JSON or 'const'")->required();
  c_gap->add_option("--slope", slope, "coercivity slope of the base weight");

  auto* c_prod = app.add_subcommand("product-cy", "product cone pipeline");
  add_poly(c_prod);
  c_prod->add_option("--k", k_factor, "projective factor dimension")
      ->required();

  auto* c_cat = app.add_subcommand("catalog", "list or show catalog entries");
  c_cat->add_option("action", catalog_action, "list or show")->required();
  c_cat->add_option("name", catalog_name, "entry name for 'show'");

  auto* c_int = app.add_subcommand("integrate", "weighted moments (debug)");
  add_poly(c_int);
  c_int->add_option("--weight", weight_arg, "weight JSON or 'const'");
  c_int->add_option("--order", order, "moment order 0, 1, or 2");
  c_int->add_flag("--mc", use_mc, "use the Monte Carlo oracle");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const auto t0 = std::chrono::steady_clock::now();
  int exit_code = 0;

  Emitter emit{opts, "", {}, "", ""};
  if (c_soliton->parsed()) {
    emit.command = "soliton";
    const Polytope p = resolve_polytope_ref(poly_ref);
    const NamedSolve s = tian_zhu_field(p, opts.solver());
    emit.outputs = {{"tau", vec_json(s.field)},
                    {"residual_norm", s.residual_norm},
                    {"report", solve_report_to_json(s.report)}};
  } else if (c_reeb->parsed()) {
    emit.command = "reeb";
    const Polytope p = resolve_polytope_ref(poly_ref);
    const NamedSolve s = msy_reeb(p, opts.solver());
    emit.outputs = {{"xi0", vec_json(s.field)},
                    {"residual_norm", s.residual_norm},
                    {"report", solve_report_to_json(s.report)}};
  } else if (c_pair->parsed()) {
    emit.command = "pair";
    const Polytope p = resolve_polytope_ref(poly_ref);
    const Eigen::VectorXd xi = parse_vector_arg(xi_arg);
    const NamedSolve s = soliton_pair(p, xi, opts.solver());
    emit.outputs = {{"xi", vec_json(xi)},
                    {"tau_xi", vec_json(s.field)},
                    {"residual_norm", s.residual_norm},
                    {"report", solve_report_to_json(s.report)}};
  } else if (c_xiseq->parsed()) {
    emit.command = "xi-seq";
    const Polytope p = resolve_polytope_ref(poly_ref);
    const NamedSolve tz = tian_zhu_field(p, opts.solver());
    json rows = json::array();
    emit.csv_table = csv_line({"N", "xi_err", "residual"});
    std::vector<double> lx, ly;
    for (const double n_val : parse_vector_arg(nlist_arg)) {
      const NamedSolve s = xi_n(p, n_val, opts.solver());
      const double err = (s.field - tz.field).norm();
      rows.push_back({{"N", n_val},
                      {"xi", vec_json(s.field)},
                      {"xi_err", err},
                      {"residual", s.residual_norm}});
      emit.csv_table += csv_line({format_double(n_val), format_double(err),
                                  format_double(s.residual_norm)});
      if (err > 0) {
        lx.push_back(std::log(n_val));
        ly.push_back(std::log(err));
      }
    }
    json fit;
    if (lx.size() >= 2) {
      const double n = static_cast<double>(lx.size());
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (std::size_t i = 0; i < lx.size(); ++i) {
        sx += lx[i];
        sy += ly[i];
        sxx += lx[i] * lx[i];
        sxy += lx[i] * ly[i];
      }
      fit = {{"loglog_slope", (n * sxy - sx * sy) / (n * sxx - sx * sx)}};
    }
    emit.outputs = {{"tau", vec_json(tz.field)}, {"rows", rows},
                    {"fit", fit}};
    emit.csv_default_name = "xi_seq_plot.csv";
  } else if (c_lich->parsed()) {
    emit.command = "lich";
    const Polytope p = resolve_polytope_ref(poly_ref);
    std::optional<Eigen::VectorXd> xi;
    if (!xi_arg.empty()) xi = parse_vector_arg(xi_arg);
    Eigen::VectorXd tau;
    if (!tau_arg.empty()) {
      tau = parse_vector_arg(tau_arg);
    } else if (xi) {
      tau = soliton_pair(p, *xi, opts.solver()).field;
    } else {
      tau = tian_zhu_field(p, opts.solver()).field;
    }
    const ObstructionReport rep = lichnerowicz_check(p, tau, xi);
    emit.outputs = report_to_json(rep);
    if (!rep.passed) exit_code = 1;
    emit.csv_table = csv_line({"vertex", "margin"});
    for (const auto& row : rep.details["vertex_margins"]) {
      std::string v;
      for (const auto& c : row["vertex"]) {
        if (!v.empty()) v += " ";
        v += format_double(c.get<double>());
      }
      emit.csv_table +=
          csv_line({v, format_double(row["margin"].get<double>())});
    }
    emit.csv_default_name = "lich_plot.csv";
  } else if (c_fujita->parsed()) {
    emit.command = "fujita";
    const Polytope p = resolve_polytope_ref(poly_ref);
    const Weight w = parse_weight_arg(weight_arg);
    const ObstructionReport rep = fujita_check(p, w, opts.integration());
    emit.outputs = report_to_json(rep);
    if (!rep.passed) exit_code = 1;
  } else if (c_beta->parsed()) {
    emit.command = "beta";
    const Polytope p = resolve_polytope_ref(poly_ref);
    const Weight w = parse_weight_arg(weight_arg);
    RationalVector u;
    {
      std::stringstream ss(u_arg);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) u.push_back(rational_from_string(tok));
      }
    }
    const ObstructionReport rep =
        beta_v(p, u, rational_from_string(c_arg), a_disc, w,
               opts.integration());
    emit.outputs = report_to_json(rep);
    if (!rep.passed) exit_code = 1;
    emit.csv_table = csv_line({"t", "vol_v_truncated"});
    for (const auto& row : rep.details["truncation_table"]) {
      emit.csv_table +=
          csv_line({format_double(row["t"].get<double>()),
                    format_double(row["vol_v_truncated"].get<double>())});
    }
    emit.csv_default_name = "beta_plot.csv";
  } else if (c_gap->parsed()) {
    emit.command = "gap";
    const Polytope p = resolve_polytope_ref(poly_ref);
    const Weight v0 = parse_weight_arg(v0_arg);
    const Weight v1 = parse_weight_arg(v1_arg);
    if (c_gap->count("--slope")) {
      const ObstructionReport rep =
          coercivity_radius(v0, v1, p, slope, opts.integration());
      emit.outputs = report_to_json(rep);
      if (!rep.passed) exit_code = 1;
    } else {
      const double lambda0 = weight_gap(v0, v1, p, opts.integration());
      emit.outputs = {{"lambda0", lambda0}};
    }
  } else if (c_prod->parsed()) {
    emit.command = "product-cy";
    const Polytope p = resolve_polytope_ref(poly_ref);
    const ObstructionReport rep =
        product_cy_pipeline(p, k_factor, opts.solver());
    emit.outputs = report_to_json(rep);
    if (!rep.passed) exit_code = 1;
  } else if (c_cat->parsed()) {
    emit.command = "catalog";
    if (catalog_action == "list") {
      json rows = json::array();
      for (const auto& e : catalog()) {
        rows.push_back({{"name", e.name},
                        {"dim", e.polytope.dim()},
                        {"vertices", e.polytope.vertices().size()},
                        {"anticanonical_degree", e.anticanonical_degree},
                        {"notes", e.notes}});
      }
      emit.outputs = {{"entries", rows}};
    } else if (catalog_action == "show") {
      const auto& e = catalog_entry(catalog_name);
      emit.outputs = {{"name", e.name},
                      {"notes", e.notes},
                      {"anticanonical_degree", e.anticanonical_degree},
                      {"volume", e.polytope.volume()},
                      {"polytope", polytope_to_json(e.polytope)},
                      {"vertices", [&] {
                         json vs = json::array();
                         const auto& vm = e.polytope.vertex_matrix();
                         for (Eigen::Index j = 0; j < vm.cols(); ++j) {
                           vs.push_back(vec_json(vm.col(j)));
                         }
                         return vs;
                       }()}};
    } else {
      throw CLI::ValidationError("catalog action must be 'list' or 'show'");
    }
  } else if (c_int->parsed()) {
    emit.command = "integrate";
    const Polytope p = resolve_polytope_ref(poly_ref);
    const Weight w = parse_weight_arg(weight_arg);
    if (use_mc) {
      const McEstimate e =
          monte_carlo_oracle(p, w, opts.mc_samples, opts.seed);
      emit.outputs = {{"estimate", e.estimate},
                      {"stderr", e.stderr_est},
                      {"samples", e.samples},
                      {"seed", e.seed}};
    } else {
      const MomentData m = integrate_weight(p, w, order, opts.integration());
      emit.outputs = {{"mass", m.mass},
                      {"order", m.order},
                      {"tolerance_met", m.tolerance_met},
                      {"error_estimate", m.error_estimate}};
      if (order >= 1) emit.outputs["first"] = vec_json(m.first);
      if (order >= 2) {
        json rows = json::array();
        for (Eigen::Index i = 0; i < m.second.rows(); ++i) {
          rows.push_back(vec_json(m.second.row(i)));
        }
        emit.outputs["second"] = rows;
      }
      if (!m.tolerance_met) exit_code = 1;
    }
  }

  emit.print_and_write();
  const auto t1 = std::chrono::steady_clock::now();
  std::cerr << "elapsed_ms="
            << std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0)
                   .count()
            << "\n";
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const soliton::NotConvergedError& e) {
    std::cerr << "not converged: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
