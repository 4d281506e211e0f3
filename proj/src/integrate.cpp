#include "soliton/integrate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "soliton/errors.hpp"

namespace soliton {

namespace {

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Complete homogeneous symmetric polynomials h_0..h_m of the given values,
// by the extension recurrence h_j(x_0..x_i) = h_j(..x_{i-1}) + x_i h_{j-1}.
// All summands share the sign of the inputs' products, so the evaluation is
// cancellation-free for positive inputs.
std::vector<double> complete_homogeneous(std::span<const double> values,
                                         int m) {
  std::vector<double> h(static_cast<std::size_t>(m) + 1, 0.0);
  h[0] = 1.0;
  for (double x : values) {
    for (int j = 1; j <= m; ++j) {
      h[static_cast<std::size_t>(j)] += x * h[static_cast<std::size_t>(j) - 1];
    }
  }
  return h;
}

// The recurrence loses a factor 1/width per table level inside a node
// cluster, so clusters up to width 0.5 go through the centered series
// instead; at order 16 its truncation is (w/2)^17 / 17! ~ 1e-25 at the
// threshold, and the homogeneous sums are stable at any spread below it.
constexpr double kClusterWidth = 0.5;
constexpr int kSeriesOrder = 16;

// Divided difference of exp over a cluster of nodes, by the centered
// series sum_m h_m(x - mean) / (k + m)!.
double exp_dd_series(std::span<const double> nodes) {
  const int k = static_cast<int>(nodes.size()) - 1;
  double mean = 0.0;
  for (double x : nodes) mean += x;
  mean /= static_cast<double>(nodes.size());
  std::vector<double> shifted(nodes.begin(), nodes.end());
  for (double& x : shifted) x -= mean;
  const auto h = complete_homogeneous(shifted, kSeriesOrder);
  double s = 0.0;
  double denom = factorial(k);
  for (int m = 0; m <= kSeriesOrder; ++m) {
    s += h[static_cast<std::size_t>(m)] / denom;
    denom *= static_cast<double>(k + m + 1);
  }
  return std::exp(mean) * s;
}

}  // namespace

double exp_divided_difference(std::span<const double> nodes) {
  const std::size_t k1 = nodes.size();
  if (k1 == 0) return 0.0;
  std::vector<double> x(nodes.begin(), nodes.end());
  std::sort(x.begin(), x.end());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(k1);
  for (double& v : x) v -= mean;

  // Table over sorted centered nodes; clustered sub-blocks use the series.
  std::vector<std::vector<double>> dd(k1);
  for (std::size_t i = 0; i < k1; ++i) {
    dd[i].assign(k1, 0.0);
    dd[i][i] = std::exp(x[i]);
  }
  for (std::size_t len = 1; len < k1; ++len) {
    for (std::size_t i = 0; i + len < k1; ++i) {
      const std::size_t j = i + len;
      const double width = x[j] - x[i];
      if (width > kClusterWidth) {
        dd[i][j] = (dd[i + 1][j] - dd[i][j - 1]) / width;
      } else {
        dd[i][j] = exp_dd_series(std::span<const double>(&x[i], len + 1));
      }
    }
  }
  return std::exp(mean) * dd[0][k1 - 1];
}

namespace {

// Divided difference of t^{-(1+r)} over positive nodes (repeats fine):
// (-1)^K h_r(1/nu) / prod(nu).
double invpow_divided_difference(std::span<const double> nodes, int r) {
  const int kk = static_cast<int>(nodes.size()) - 1;
  std::vector<double> inv(nodes.size());
  double prod = 1.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    inv[i] = 1.0 / nodes[i];
    prod *= nodes[i];
  }
  const auto h = complete_homogeneous(inv, r);
  const double sign = (kk % 2 == 0) ? 1.0 : -1.0;
  return sign * h[static_cast<std::size_t>(r)] / prod;
}

int resolve_threads(const IntegrationConfig& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  if (const char* env = std::getenv("SOLITON_POLYTOPE_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace

double pairwise_tree_sum(std::span<const double> values) {
  if (values.empty()) return 0.0;
  if (values.size() == 1) return values[0];
  const std::size_t half = values.size() / 2;
  return pairwise_tree_sum(values.subspan(0, half)) +
         pairwise_tree_sum(values.subspan(half));
}

MomentData explinear_simplex_moments(const Simplex& s,
                                     const Eigen::VectorXd& zeta, int order) {
  const int n = static_cast<int>(s.vertices.rows());
  const int nv = n + 1;
  const double scale = factorial(n) * s.volume;

  std::vector<double> base(static_cast<std::size_t>(nv));
  for (int i = 0; i < nv; ++i) base[static_cast<std::size_t>(i)] =
      zeta.size() ? zeta.dot(s.vertices.col(i)) : 0.0;

  MomentData out;
  out.order = order;
  out.mass = scale * exp_divided_difference(base);
  if (order >= 1) {
    out.first = Eigen::VectorXd::Zero(n);
    std::vector<double> nodes(base);
    nodes.push_back(0.0);
    for (int a = 0; a < nv; ++a) {
      nodes.back() = base[static_cast<std::size_t>(a)];
      out.first += scale * exp_divided_difference(nodes) * s.vertices.col(a);
    }
  }
  if (order >= 2) {
    out.second = Eigen::MatrixXd::Zero(n, n);
    std::vector<double> nodes(base);
    nodes.push_back(0.0);
    nodes.push_back(0.0);
    for (int a = 0; a < nv; ++a) {
      for (int b = a; b < nv; ++b) {
        nodes[nodes.size() - 2] = base[static_cast<std::size_t>(a)];
        nodes[nodes.size() - 1] = base[static_cast<std::size_t>(b)];
        const double dd = exp_divided_difference(nodes);
        const double coef = (a == b) ? 2.0 : 1.0;
        Eigen::MatrixXd outer =
            s.vertices.col(a) * s.vertices.col(b).transpose();
        if (a != b) outer += s.vertices.col(b) * s.vertices.col(a).transpose();
        out.second += scale * coef * dd * outer;
      }
    }
    // the (a, b) and (b, a) contributions were merged above; a == b kept
    // its doubled multiplicity factor
    out.second = 0.5 * (out.second + out.second.transpose()).eval();
  }
  return out;
}

bool powaffine_simplex_moments(const Simplex& s, const Eigen::VectorXd& slope,
                               double constant, double p, int order,
                               MomentData& out) {
  const int n = static_cast<int>(s.vertices.rows());
  const int nv = n + 1;
  const double rp = std::round(p);
  if (std::abs(p - rp) > 1e-9 || rp > -(n + order + 1)) return false;
  if (rp < -static_cast<double>(1 << 17)) return false;  // h_r cost cap
  const long ip = static_cast<long>(rp);

  std::vector<double> base(static_cast<std::size_t>(nv));
  for (int i = 0; i < nv; ++i) {
    const double v = slope.dot(s.vertices.col(i)) + constant;
    if (!(v > 0)) {
      throw DomainViolationError(
          "affine factor is not positive on an integration cell");
    }
    base[static_cast<std::size_t>(i)] = v;
  }
  const double scale = factorial(n) * s.volume;

  // F^{(K)} = t^p with F = t^{p+K} / prod_{j=1..K}(p+j); the divided
  // difference of t^{p+K} = t^{-(1+r)} is the closed h_r form.
  auto term = [&](std::span<const double> nodes) {
    const int kk = static_cast<int>(nodes.size()) - 1;
    const int r = static_cast<int>(-ip) - kk - 1;
    double denom = 1.0;
    for (int j = 1; j <= kk; ++j) denom *= static_cast<double>(ip + j);
    return invpow_divided_difference(nodes, r) / denom;
  };

  out = MomentData{};
  out.order = order;
  out.mass = scale * term(base);
  if (order >= 1) {
    out.first = Eigen::VectorXd::Zero(n);
    std::vector<double> nodes(base);
    nodes.push_back(0.0);
    for (int a = 0; a < nv; ++a) {
      nodes.back() = base[static_cast<std::size_t>(a)];
      out.first += scale * term(nodes) * s.vertices.col(a);
    }
  }
  if (order >= 2) {
    out.second = Eigen::MatrixXd::Zero(n, n);
    std::vector<double> nodes(base);
    nodes.push_back(0.0);
    nodes.push_back(0.0);
    for (int a = 0; a < nv; ++a) {
      for (int b = a; b < nv; ++b) {
        nodes[nodes.size() - 2] = base[static_cast<std::size_t>(a)];
        nodes[nodes.size() - 1] = base[static_cast<std::size_t>(b)];
        const double dd = term(nodes);
        const double coef = (a == b) ? 2.0 : 1.0;
        Eigen::MatrixXd outer =
            s.vertices.col(a) * s.vertices.col(b).transpose();
        if (a != b) outer += s.vertices.col(b) * s.vertices.col(a).transpose();
        out.second += scale * coef * dd * outer;
      }
    }
    out.second = 0.5 * (out.second + out.second.transpose()).eval();
  }
  return true;
}

double simplex_exp_poly(const Simplex& s, const Eigen::VectorXd& zeta,
                        const QuadPoly& q) {
  const int order = q.quad.size() ? 2 : (q.lin.size() ? 1 : 0);
  const MomentData m = explinear_simplex_moments(s, zeta, order);
  double value = q.c0 * m.mass;
  if (q.lin.size()) value += q.lin.dot(m.first);
  if (q.quad.size()) value += q.quad.cwiseProduct(m.second).sum();
  return value;
}

// ---------------------------------------------------------------------------
// Grundmann-Moller quadrature with recursive longest-edge subdivision.

namespace {

struct GMRule {
  int n = 0;
  int s = 0;
  // Points grouped by |beta| = m share one coefficient per rule.
  std::vector<Eigen::MatrixXd> points;  // per m: (n+1) x count barycentric
  std::vector<double> coef_s;           // rule of index s
  std::vector<double> coef_sm1;         // embedded rule of index s-1
};

void enumerate_compositions(int coords, int total,
                            const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> beta(static_cast<std::size_t>(coords), 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == coords - 1) {
      beta[static_cast<std::size_t>(pos)] = left;
      f(beta);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      beta[static_cast<std::size_t>(pos)] = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, total);
}

double gm_coefficient(int n, int s, int m) {
  // (-1)^{s-m} 2^{-2s} (2m+n+1)^{2s+1} / ((s-m)! (s+m+n+1)!)
  const double lg = (2.0 * s + 1.0) * std::log(2.0 * m + n + 1.0) -
                    2.0 * s * std::log(2.0) - std::lgamma(s - m + 1.0) -
                    std::lgamma(s + m + n + 2.0);
  const double sign = ((s - m) % 2 == 0) ? 1.0 : -1.0;
  return sign * std::exp(lg);
}

const GMRule& gm_rule(int n, int s) {
  static std::map<std::pair<int, int>, std::unique_ptr<GMRule>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[{n, s}];
  if (!slot) {
    auto rule = std::make_unique<GMRule>();
    rule->n = n;
    rule->s = s;
    for (int m = 0; m <= s; ++m) {
      std::vector<std::vector<int>> betas;
      enumerate_compositions(n + 1, m,
                             [&](const std::vector<int>& b) { betas.push_back(b); });
      Eigen::MatrixXd pts(n + 1, static_cast<Eigen::Index>(betas.size()));
      const double denom = 2.0 * m + n + 1.0;
      for (std::size_t j = 0; j < betas.size(); ++j) {
        for (int i = 0; i <= n; ++i) {
          pts(i, static_cast<Eigen::Index>(j)) =
              (2.0 * betas[j][static_cast<std::size_t>(i)] + 1.0) / denom;
        }
      }
      rule->points.push_back(std::move(pts));
      rule->coef_s.push_back(gm_coefficient(n, s, m));
      rule->coef_sm1.push_back(m <= s - 1 ? gm_coefficient(n, s - 1, m) : 0.0);
    }
    slot = std::move(rule);
  }
  return *slot;
}

// Flat component layout: [mass, first (n), packed upper second].
int flat_size(int n, int order) {
  int sz = 1;
  if (order >= 1) sz += n;
  if (order >= 2) sz += n * (n + 1) / 2;
  return sz;
}

void unpack_flat(const Eigen::VectorXd& flat, int n, int order,
                 MomentData& out) {
  out.mass = flat[0];
  if (order >= 1) out.first = flat.segment(1, n);
  if (order >= 2) {
    out.second.resize(n, n);
    int idx = 1 + n;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        out.second(i, j) = flat[idx];
        out.second(j, i) = flat[idx];
        ++idx;
      }
    }
  }
}

struct Cell {
  Eigen::MatrixXd vertices;
  double volume;
};

struct RuleEval {
  Eigen::VectorXd high;     // I_s
  Eigen::VectorXd low;      // I_{s-1}
  double abs_scale = 0.0;   // n!V * sum_m |c_m| |G_m|, the rounding scale
};

RuleEval evaluate_rule(const GMRule& rule, const Cell& cell, int order,
                       const std::function<double(const Eigen::VectorXd&)>& f) {
  const int n = rule.n;
  const int sz = flat_size(n, order);
  // The rule coefficients alternate in sign with large magnitudes, so the
  // combination runs in extended precision to keep cancellation out of the
  // small moments; the flat point loops avoid per-point temporaries.
  std::vector<long double> acc_h(static_cast<std::size_t>(sz), 0.0L);
  std::vector<long double> acc_l(static_cast<std::size_t>(sz), 0.0L);
  std::vector<long double> group(static_cast<std::size_t>(sz), 0.0L);
  double abs_scale = 0.0;
  Eigen::VectorXd x(n);
  for (std::size_t m = 0; m < rule.points.size(); ++m) {
    const Eigen::MatrixXd& pts = rule.points[m];
    std::fill(group.begin(), group.end(), 0.0L);
    double group_abs = 0.0;
    for (Eigen::Index j = 0; j < pts.cols(); ++j) {
      x.noalias() = cell.vertices * pts.col(j);
      const double w = f(x);
      group[0] += w;
      double xmax = 1.0;
      if (order >= 1) {
        for (int i = 0; i < n; ++i) {
          group[static_cast<std::size_t>(1 + i)] += w * x[i];
          xmax = std::max(xmax, std::abs(x[i]));
        }
      }
      if (order >= 2) {
        std::size_t idx = static_cast<std::size_t>(1 + n);
        for (int a = 0; a < n; ++a) {
          const double wxa = w * x[a];
          for (int b = a; b < n; ++b) {
            group[idx++] += wxa * x[b];
          }
        }
      }
      group_abs += std::abs(w) * xmax * xmax;
    }
    const long double ch = rule.coef_s[m];
    const long double cl = rule.coef_sm1[m];
    for (int c = 0; c < sz; ++c) {
      acc_h[static_cast<std::size_t>(c)] += ch * group[static_cast<std::size_t>(c)];
      acc_l[static_cast<std::size_t>(c)] += cl * group[static_cast<std::size_t>(c)];
    }
    abs_scale += std::abs(rule.coef_s[m]) * group_abs;
  }
  const double scale = factorial(n) * cell.volume;
  RuleEval out;
  out.high.resize(sz);
  out.low.resize(sz);
  for (int c = 0; c < sz; ++c) {
    out.high[c] = scale * static_cast<double>(acc_h[static_cast<std::size_t>(c)]);
    out.low[c] = scale * static_cast<double>(acc_l[static_cast<std::size_t>(c)]);
  }
  out.abs_scale = scale * abs_scale;
  return out;
}

void split_longest_edge(const Cell& cell, Cell& a, Cell& b) {
  const Eigen::Index nv = cell.vertices.cols();
  Eigen::Index bi = 0, bj = 1;
  double best = -1.0;
  for (Eigen::Index i = 0; i < nv; ++i) {
    for (Eigen::Index j = i + 1; j < nv; ++j) {
      const double d2 = (cell.vertices.col(i) - cell.vertices.col(j)).squaredNorm();
      if (d2 > best) {
        best = d2;
        bi = i;
        bj = j;
      }
    }
  }
  const Eigen::VectorXd mid =
      0.5 * (cell.vertices.col(bi) + cell.vertices.col(bj));
  a.vertices = cell.vertices;
  a.vertices.col(bi) = mid;
  a.volume = 0.5 * cell.volume;
  b.vertices = cell.vertices;
  b.vertices.col(bj) = mid;
  b.volume = 0.5 * cell.volume;
}

Eigen::VectorXd refine(const GMRule& rule, const Cell& cell, int order,
                       const std::function<double(const Eigen::VectorXd&)>& f,
                       double tol_abs, int depth, int max_depth, bool& tol_met,
                       double& err_accum) {
  const RuleEval ev = evaluate_rule(rule, cell, order, f);
  const double err = (ev.high - ev.low).lpNorm<Eigen::Infinity>();
  // Near the cell's rounding floor (the alternating-sign rule sums cancel
  // down from abs_scale) the embedded estimate is noise: refine toward the
  // hard floor, and treat anything below the flag floor as met.
  const double eps = std::numeric_limits<double>::epsilon();
  const double hard_floor = 32.0 * eps * ev.abs_scale;
  const double flag_floor = 256.0 * eps * ev.abs_scale;
  if (err <= std::max(tol_abs, hard_floor) || depth >= max_depth) {
    if (err > std::max(tol_abs, flag_floor)) tol_met = false;
    err_accum += err;
    return ev.high;
  }
  Cell a, b;
  split_longest_edge(cell, a, b);
  return refine(rule, a, order, f, 0.5 * tol_abs, depth + 1, max_depth,
                tol_met, err_accum) +
         refine(rule, b, order, f, 0.5 * tol_abs, depth + 1, max_depth,
                tol_met, err_accum);
}

MomentData adaptive_moments(const Polytope& p,
                            const std::function<double(const Eigen::VectorXd&)>& f,
                            int order, const IntegrationConfig& cfg) {
  const int n = p.dim();
  const auto& tri = p.triangulation();
  MomentData out;
  out.order = order;
  if (order >= 1) out.first = Eigen::VectorXd::Zero(n);
  if (order >= 2) out.second = Eigen::MatrixXd::Zero(n, n);
  if (tri.empty()) return out;

  // Rules beyond index 12 (degree 25) lose more to coefficient
  // cancellation than they gain in order.
  const int s = std::clamp(cfg.quadrature_degree / 2, 1, 12);
  const GMRule& rule = gm_rule(n, s);
  const int sz = flat_size(n, order);

  // Rough pass fixes the absolute tolerance budget deterministically.
  std::vector<Eigen::VectorXd> rough(tri.size());
  std::vector<double> vols(tri.size());
  double vol_total = 0.0;
  for (std::size_t i = 0; i < tri.size(); ++i) {
    vols[i] = tri[i].volume;
    vol_total += tri[i].volume;
  }

  const int threads =
      std::min<int>(resolve_threads(cfg), static_cast<int>(tri.size()));
  auto parallel_for = [&](const std::function<void(std::size_t)>& body) {
    if (threads <= 1) {
      for (std::size_t i = 0; i < tri.size(); ++i) body(i);
      return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= tri.size()) return;
          body(i);
        }
      });
    }
    for (auto& th : pool) th.join();
  };

  parallel_for([&](std::size_t i) {
    const Cell cell{tri[i].vertices, tri[i].volume};
    rough[i] = evaluate_rule(rule, cell, order, f).high;
  });

  Eigen::VectorXd rough_total = Eigen::VectorXd::Zero(sz);
  for (const auto& r : rough) rough_total += r;
  const double scale =
      std::max(rough_total.lpNorm<Eigen::Infinity>(), 1e-300);
  const double tol_total = cfg.rel_tol * scale;

  // Budgets follow each root's share of the rough moments (with a small
  // volume term as a floor), so concentrated integrands spend refinement
  // where the mass actually sits.
  std::vector<double> share(tri.size());
  double share_total = 0.0;
  for (std::size_t i = 0; i < tri.size(); ++i) {
    share[i] = rough[i].lpNorm<Eigen::Infinity>() +
               1e-3 * scale * (vols[i] / vol_total);
    share_total += share[i];
  }

  std::vector<Eigen::VectorXd> totals(tri.size());
  std::vector<double> errs(tri.size(), 0.0);
  std::vector<char> met(tri.size(), 1);
  parallel_for([&](std::size_t i) {
    bool ok = true;
    double err = 0.0;
    const Cell cell{tri[i].vertices, tri[i].volume};
    const double tol_i = 0.5 * tol_total * (share[i] / share_total);
    totals[i] = refine(rule, cell, order, f, tol_i, 0,
                       cfg.max_subdivision_depth, ok, err);
    errs[i] = err;
    met[i] = ok ? 1 : 0;
  });

  // Deterministic pairwise-tree reduction over the fixed simplex order.
  Eigen::VectorXd flat(sz);
  std::vector<double> comp(tri.size());
  for (int c = 0; c < sz; ++c) {
    for (std::size_t i = 0; i < tri.size(); ++i) comp[i] = totals[i][c];
    flat[c] = pairwise_tree_sum(comp);
  }
  unpack_flat(flat, n, order, out);
  out.error_estimate = pairwise_tree_sum(errs);
  out.tolerance_met =
      std::all_of(met.begin(), met.end(), [](char c) { return c != 0; });
  return out;
}

MomentData exact_by_simplex(
    const Polytope& p, int order,
    const std::function<MomentData(const Simplex&)>& cell_moments) {
  const int n = p.dim();
  const auto& tri = p.triangulation();
  MomentData out;
  out.order = order;
  if (order >= 1) out.first = Eigen::VectorXd::Zero(n);
  if (order >= 2) out.second = Eigen::MatrixXd::Zero(n, n);
  if (tri.empty()) return out;

  std::vector<MomentData> parts(tri.size());
  for (std::size_t i = 0; i < tri.size(); ++i) parts[i] = cell_moments(tri[i]);

  std::vector<double> comp(tri.size());
  auto reduce = [&](const std::function<double(const MomentData&)>& get) {
    for (std::size_t i = 0; i < tri.size(); ++i) comp[i] = get(parts[i]);
    return pairwise_tree_sum(comp);
  };
  out.mass = reduce([](const MomentData& m) { return m.mass; });
  if (order >= 1) {
    for (int k = 0; k < n; ++k) {
      out.first[k] = reduce([k](const MomentData& m) { return m.first[k]; });
    }
  }
  if (order >= 2) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        const double v =
            reduce([i, j](const MomentData& m) { return m.second(i, j); });
        out.second(i, j) = v;
        out.second(j, i) = v;
      }
    }
  }
  return out;
}

void scale_moments(MomentData& m, double lambda) {
  m.mass *= lambda;
  if (m.first.size()) m.first *= lambda;
  if (m.second.size()) m.second *= lambda;
  m.error_estimate *= lambda;
}

bool integer_exponent(double p, long& out) {
  const double rp = std::round(p);
  if (std::abs(p - rp) > 1e-9 || std::abs(rp) > 1e15) return false;
  out = static_cast<long>(rp);
  return true;
}

}  // namespace

MomentData integrate_weight(const Polytope& p, const Weight& v, int order,
                            const IntegrationConfig& cfg) {
  if (order < 0 || order > 2) {
    throw std::invalid_argument("moment order must be 0, 1 or 2");
  }
  v.validate_on(p);
  const int n = p.dim();
  if (p.is_empty() || !p.full_dimensional()) {
    MomentData m;
    m.order = order;
    if (order >= 1) m.first = Eigen::VectorXd::Zero(n);
    if (order >= 2) m.second = Eigen::MatrixXd::Zero(n, n);
    return m;
  }

  if (cfg.mode == IntegrationMode::MonteCarlo) {
    if (order != 0) {
      throw std::invalid_argument(
          "Monte Carlo mode integrates order-0 moments only");
    }
    const McEstimate e = monte_carlo_oracle(p, v, cfg.mc_samples, cfg.seed);
    MomentData m;
    m.mass = e.estimate;
    m.error_estimate = e.stderr_est;
    return m;
  }

  switch (v.kind()) {
    case Weight::Kind::Scaled: {
      MomentData m = integrate_weight(p, v.inner(), order, cfg);
      scale_moments(m, v.scale());
      return m;
    }
    case Weight::Kind::Constant: {
      if (cfg.mode == IntegrationMode::Adaptive) break;
      const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
      MomentData m = exact_by_simplex(p, order, [&](const Simplex& s) {
        return explinear_simplex_moments(s, zero, order);
      });
      scale_moments(m, v.constant_value());
      return m;
    }
    case Weight::Kind::ExpLinear: {
      if (cfg.mode == IntegrationMode::Adaptive) break;
      return exact_by_simplex(p, order, [&](const Simplex& s) {
        return explinear_simplex_moments(s, v.tau(), order);
      });
    }
    case Weight::Kind::PowAffine: {
      if (cfg.mode == IntegrationMode::Adaptive) break;
      long ip = 0;
      if (integer_exponent(v.exponent(), ip) && ip <= -(n + order + 1) &&
          ip >= -(1L << 17)) {
        return exact_by_simplex(p, order, [&](const Simplex& s) {
          MomentData m;
          if (!powaffine_simplex_moments(s, v.affine().slope,
                                         v.affine().constant,
                                         static_cast<double>(ip), order, m)) {
            throw std::logic_error("closed-form gate mismatch");
          }
          return m;
        });
      }
      if (cfg.mode == IntegrationMode::Exact) {
        throw IntegrationFailureError(
            "no closed form for this affine-power exponent; the "
            "antiderivative chain hits logarithms");
      }
      break;
    }
    case Weight::Kind::QN: {
      if (cfg.mode == IntegrationMode::Adaptive) break;
      long in = 0;
      if (integer_exponent(v.big_n(), in) && in >= n + order + 1 &&
          in <= (1L << 17)) {
        const Eigen::VectorXd slope = -v.xi() / v.big_n();
        MomentData result = exact_by_simplex(p, order, [&](const Simplex& s) {
          MomentData m;
          if (!powaffine_simplex_moments(s, slope, 1.0, -v.big_n(), order,
                                         m)) {
            throw std::logic_error("closed-form gate mismatch");
          }
          return m;
        });
        return result;
      }
      if (cfg.mode == IntegrationMode::Exact) {
        throw IntegrationFailureError(
            "exact q_N integration needs integer N >= n + order + 1");
      }
      break;
    }
    case Weight::Kind::TKRS: {
      if (cfg.mode == IntegrationMode::Adaptive) break;
      if (v.tau().isZero(0.0)) {
        long ip = 0;
        if (integer_exponent(v.exponent(), ip) && ip <= -(n + order + 1) &&
            ip >= -(1L << 17)) {
          return exact_by_simplex(p, order, [&](const Simplex& s) {
            MomentData m;
            if (!powaffine_simplex_moments(s, v.xi(), 1.0,
                                           static_cast<double>(ip), order,
                                           m)) {
              throw std::logic_error("closed-form gate mismatch");
            }
            return m;
          });
        }
      }
      if (cfg.mode == IntegrationMode::Exact) {
        throw IntegrationFailureError(
            "tkrs weights with nonzero tau have no closed-form moments");
      }
      break;
    }
  }

  return adaptive_moments(
      p, [&](const Eigen::VectorXd& x) { return v(x); }, order, cfg);
}

McEstimate monte_carlo_oracle(const Polytope& p, const Weight& v,
                              std::int64_t samples, std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("need at least 2 samples");
  v.validate_on(p);
  const int n = p.dim();
  const auto [lo, hi] = p.bounding_box();
  double box_vol = 1.0;
  for (int i = 0; i < n; ++i) box_vol *= hi[i] - lo[i];

  const auto& fs = p.facets();
  Eigen::MatrixXd normals(static_cast<Eigen::Index>(fs.size()), n);
  Eigen::VectorXd offsets(static_cast<Eigen::Index>(fs.size()));
  for (std::size_t i = 0; i < fs.size(); ++i) {
    offsets[static_cast<Eigen::Index>(i)] = to_double(fs[i].offset);
    for (int k = 0; k < n; ++k) {
      normals(static_cast<Eigen::Index>(i), k) =
          to_double(fs[i].normal[static_cast<std::size_t>(k)]);
    }
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double mean = 0.0, m2 = 0.0;
  Eigen::VectorXd x(n);
  for (std::int64_t k = 0; k < samples; ++k) {
    for (int i = 0; i < n; ++i) x[i] = lo[i] + unif(rng) * (hi[i] - lo[i]);
    double val = 0.0;
    if (((normals * x + offsets).array() >= 0.0).all()) val = v(x);
    const double delta = val - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (val - mean);
  }
  const double var = m2 / static_cast<double>(samples - 1);
  McEstimate e;
  e.estimate = box_vol * mean;
  e.stderr_est = box_vol * std::sqrt(var / static_cast<double>(samples));
  e.samples = samples;
  e.seed = seed;
  return e;
}

}  // namespace soliton
