#include "soliton/polytope.hpp"

#include <algorithm>
#include <cstddef>
#include <map>
#include <mutex>
#include <set>
#include <stdexcept>

#include "soliton/errors.hpp"

namespace soliton {

struct Polytope::Impl {
  int dim = 0;
  bool canonical = false;
  bool full_dim = false;
  std::vector<Halfspace> facets;
  std::vector<RationalVector> vertices;  // lex-sorted
  Eigen::MatrixXd vertex_matrix;

  mutable std::once_flag tri_once;
  mutable std::vector<Simplex> tri;
  mutable Rational vol_exact = 0;

  void finalize_vertex_matrix() {
    vertex_matrix.resize(dim, static_cast<Eigen::Index>(vertices.size()));
    for (std::size_t j = 0; j < vertices.size(); ++j) {
      for (int i = 0; i < dim; ++i) {
        vertex_matrix(i, static_cast<Eigen::Index>(j)) =
            to_double(vertices[j][static_cast<std::size_t>(i)]);
      }
    }
  }

  Rational facet_value(std::size_t i, const RationalVector& x) const {
    return dot(facets[i].normal, x) + facets[i].offset;
  }

  bool tight(std::size_t facet, std::size_t vertex) const {
    return facet_value(facet, vertices[vertex]) == 0;
  }

  void build_triangulation() const;
};

namespace {

int affine_dim_of(const std::vector<RationalVector>& pts) {
  if (pts.empty()) return -1;
  std::vector<RationalVector> diffs;
  diffs.reserve(pts.size() - 1);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    RationalVector d(pts[i].size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = pts[i][k] - pts[0][k];
    diffs.push_back(std::move(d));
  }
  if (diffs.empty()) return 0;
  return rational_rank(std::move(diffs));
}

std::vector<RationalVector> enumerate_vertices(
    int dim, const std::vector<Halfspace>& facets) {
  const std::size_t n = static_cast<std::size_t>(dim);
  const std::size_t m = facets.size();
  std::vector<RationalVector> found;
  if (m < n) return found;

  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::vector<RationalVector> mat(n);
  RationalVector rhs(n), sol;
  while (true) {
    for (std::size_t i = 0; i < n; ++i) {
      mat[i] = facets[idx[i]].normal;
      rhs[i] = -facets[idx[i]].offset;
    }
    if (solve_linear(mat, rhs, sol)) {
      bool feasible = true;
      for (std::size_t f = 0; f < m && feasible; ++f) {
        feasible = dot(facets[f].normal, sol) + facets[f].offset >= 0;
      }
      if (feasible) found.push_back(sol);
    }
    // next combination
    std::size_t k = n;
    while (k > 0 && idx[k - 1] == m - n + k - 1) --k;
    if (k == 0) break;
    ++idx[k - 1];
    for (std::size_t j = k; j < n; ++j) idx[j] = idx[j - 1] + 1;
  }
  std::sort(found.begin(), found.end(), lex_less);
  found.erase(std::unique(found.begin(), found.end()), found.end());
  return found;
}

bool facets_span_positively(int dim, const std::vector<Halfspace>& facets) {
  std::vector<RationalVector> normals;
  normals.reserve(facets.size());
  for (const auto& f : facets) normals.push_back(f.normal);
  RationalVector target(static_cast<std::size_t>(dim), Rational(0));
  for (int j = 0; j < dim; ++j) {
    target[static_cast<std::size_t>(j)] = 1;
    if (!in_nonnegative_span(normals, target)) return false;
    target[static_cast<std::size_t>(j)] = -1;
    if (!in_nonnegative_span(normals, target)) return false;
    target[static_cast<std::size_t>(j)] = 0;
  }
  return true;
}

// Two half-spaces describe the same constraint iff they are positive
// multiples of each other; scaling by the leading coefficient gives a
// comparable canonical form.
std::vector<Rational> halfspace_key(const Halfspace& h) {
  std::vector<Rational> key;
  key.reserve(h.normal.size() + 1);
  Rational lead = 0;
  for (const auto& q : h.normal) {
    if (q != 0) {
      lead = q < 0 ? -q : q;
      break;
    }
  }
  for (const auto& q : h.normal) key.push_back(q / lead);
  key.push_back(h.offset / lead);
  return key;
}

void dedup_facets(std::vector<Halfspace>& facets) {
  std::set<std::vector<Rational>> seen;
  std::vector<Halfspace> kept;
  kept.reserve(facets.size());
  for (auto& f : facets) {
    if (seen.insert(halfspace_key(f)).second) kept.push_back(std::move(f));
  }
  facets = std::move(kept);
}

// Keeps facets supporting an (n-1)-face. A facet of a full-dimensional
// polytope is essential only if it is tight at >= n vertices.
void prune_redundant_facets(int dim, std::vector<Halfspace>& facets,
                            const std::vector<RationalVector>& vertices) {
  std::vector<Halfspace> kept;
  kept.reserve(facets.size());
  for (const auto& f : facets) {
    std::size_t tight = 0;
    for (const auto& v : vertices) {
      if (dot(f.normal, v) + f.offset == 0) ++tight;
    }
    if (tight >= static_cast<std::size_t>(dim)) kept.push_back(f);
  }
  facets = std::move(kept);
}

}  // namespace

void Polytope::Impl::build_triangulation() const {
  tri.clear();
  vol_exact = 0;
  if (!full_dim || vertices.empty()) return;
  const std::size_t n = static_cast<std::size_t>(dim);

  // Tight vertex ids per facet.
  std::vector<std::vector<int>> tight_ids(facets.size());
  for (std::size_t f = 0; f < facets.size(); ++f) {
    for (std::size_t v = 0; v < vertices.size(); ++v) {
      if (tight(f, v)) tight_ids[f].push_back(static_cast<int>(v));
    }
  }

  auto points_of = [&](const std::vector<int>& ids) {
    std::vector<RationalVector> pts;
    pts.reserve(ids.size());
    for (int id : ids) pts.push_back(vertices[static_cast<std::size_t>(id)]);
    return pts;
  };

  // Pulling triangulation of a face of affine dimension d, apex at the
  // lexicographically smallest vertex (ids are in lex order already).
  auto pull = [&](auto&& self, const std::vector<int>& face,
                  int d) -> std::vector<std::vector<int>> {
    if (d <= 1) return {face};  // point or segment
    const int apex = face.front();
    std::set<std::vector<int>> subfaces;
    for (std::size_t f = 0; f < facets.size(); ++f) {
      std::vector<int> cut;
      std::set_intersection(face.begin(), face.end(), tight_ids[f].begin(),
                            tight_ids[f].end(), std::back_inserter(cut));
      if (cut.size() < static_cast<std::size_t>(d)) continue;
      if (affine_dim_of(points_of(cut)) == d - 1) subfaces.insert(cut);
    }
    std::vector<std::vector<int>> cells;
    for (const auto& sub : subfaces) {
      if (std::binary_search(sub.begin(), sub.end(), apex)) continue;
      for (auto cell : self(self, sub, d - 1)) {
        cell.push_back(apex);
        cells.push_back(std::move(cell));
      }
    }
    return cells;
  };

  RationalVector centroid(n, Rational(0));
  for (const auto& v : vertices) {
    for (std::size_t k = 0; k < n; ++k) centroid[k] += v[k];
  }
  for (std::size_t k = 0; k < n; ++k) {
    centroid[k] /= Rational(static_cast<long>(vertices.size()));
  }

  std::vector<std::vector<RationalVector>> cells_exact;
  std::set<std::vector<int>> fanned;
  for (std::size_t f = 0; f < facets.size(); ++f) {
    if (affine_dim_of(points_of(tight_ids[f])) != dim - 1) continue;
    if (!fanned.insert(tight_ids[f]).second) continue;
    for (const auto& cell : pull(pull, tight_ids[f], dim - 1)) {
      auto pts = points_of(cell);
      pts.push_back(centroid);
      cells_exact.push_back(std::move(pts));
    }
  }

  Rational factorial = 1;
  for (int k = 2; k <= dim; ++k) factorial *= k;
  tri.reserve(cells_exact.size());
  for (const auto& cell : cells_exact) {
    std::vector<RationalVector> edges(n);
    for (std::size_t i = 0; i < n; ++i) {
      edges[i].resize(n);
      for (std::size_t k = 0; k < n; ++k) {
        edges[i][k] = cell[i + 1][k] - cell[0][k];
      }
    }
    Rational det = determinant(std::move(edges));
    if (det < 0) det = -det;
    if (det == 0) continue;  // degenerate cell contributes nothing
    Rational cell_vol = det / factorial;
    vol_exact += cell_vol;

    Simplex s;
    s.vertices.resize(dim, dim + 1);
    for (std::size_t j = 0; j < cell.size(); ++j) {
      for (int i = 0; i < dim; ++i) {
        s.vertices(i, static_cast<Eigen::Index>(j)) =
            to_double(cell[j][static_cast<std::size_t>(i)]);
      }
    }
    s.volume = to_double(cell_vol);
    tri.push_back(std::move(s));
  }
}

Polytope::Polytope(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

Polytope Polytope::from_facets(int dim, std::vector<Halfspace> facets,
                               bool canonical) {
  if (dim < 1) throw std::invalid_argument("polytope dimension must be >= 1");
  if (facets.empty()) throw std::invalid_argument("facet list is empty");
  for (const auto& f : facets) {
    if (f.normal.size() != static_cast<std::size_t>(dim)) {
      throw std::invalid_argument("facet normal has wrong dimension");
    }
    if (std::all_of(f.normal.begin(), f.normal.end(),
                    [](const Rational& q) { return q == 0; })) {
      throw std::invalid_argument("facet normal is zero");
    }
  }
  if (canonical) {
    for (const auto& f : facets) {
      if (f.offset != 1) {
        throw NotCanonicalError(
            "canonical polytope requires every facet offset to equal 1");
      }
    }
  }

  dedup_facets(facets);
  auto impl = std::make_shared<Impl>();
  impl->dim = dim;
  impl->canonical = canonical;
  impl->vertices = enumerate_vertices(dim, facets);
  if (impl->vertices.empty()) {
    throw EmptyOrUnboundedError("facet system has no basic feasible point");
  }
  if (!facets_span_positively(dim, facets)) {
    throw EmptyOrUnboundedError("feasible region is unbounded");
  }
  if (affine_dim_of(impl->vertices) < dim) {
    throw DegeneratePolytopeError("polytope is not full-dimensional");
  }
  impl->full_dim = true;
  prune_redundant_facets(dim, facets, impl->vertices);
  impl->facets = std::move(facets);
  impl->finalize_vertex_matrix();
  return Polytope(std::move(impl));
}

int Polytope::dim() const { return impl_->dim; }
bool Polytope::canonical() const { return impl_->canonical; }
bool Polytope::is_empty() const { return impl_->vertices.empty(); }
bool Polytope::full_dimensional() const { return impl_->full_dim; }

const std::vector<Halfspace>& Polytope::facets() const {
  return impl_->facets;
}
const std::vector<RationalVector>& Polytope::vertices() const {
  return impl_->vertices;
}
const Eigen::MatrixXd& Polytope::vertex_matrix() const {
  return impl_->vertex_matrix;
}

const std::vector<Simplex>& Polytope::triangulation() const {
  std::call_once(impl_->tri_once, [this] { impl_->build_triangulation(); });
  return impl_->tri;
}

Rational Polytope::volume_exact() const {
  triangulation();
  return impl_->vol_exact;
}

double Polytope::volume() const { return to_double(volume_exact()); }

std::pair<Eigen::VectorXd, Eigen::VectorXd> Polytope::bounding_box() const {
  const auto& vm = impl_->vertex_matrix;
  if (vm.cols() == 0) {
    return {Eigen::VectorXd::Zero(impl_->dim),
            Eigen::VectorXd::Zero(impl_->dim)};
  }
  return {vm.rowwise().minCoeff(), vm.rowwise().maxCoeff()};
}

Rational Polytope::facet_value(std::size_t i, const RationalVector& x) const {
  return impl_->facet_value(i, x);
}

bool dual_contains(const Polytope& p, const Eigen::VectorXd& xi) {
  return dual_margin(p, xi) > 0;
}

double dual_margin(const Polytope& p, const Eigen::VectorXd& xi) {
  const auto& vm = p.vertex_matrix();
  double m = 1.0;
  for (Eigen::Index j = 0; j < vm.cols(); ++j) {
    m = std::min(m, xi.dot(vm.col(j)) + 1.0);
  }
  return m;
}

Polytope product(const Polytope& p, const Polytope& q) {
  if (p.dim() < 1 || q.dim() < 1) {
    throw std::invalid_argument("product factors must each have dim >= 1");
  }
  if (p.is_empty() || q.is_empty() || !p.full_dimensional() ||
      !q.full_dimensional()) {
    throw std::invalid_argument("product factors must be full-dimensional");
  }
  auto impl = std::make_shared<Polytope::Impl>();
  impl->dim = p.dim() + q.dim();
  impl->canonical = p.canonical() && q.canonical();
  impl->full_dim = true;

  const std::size_t np = static_cast<std::size_t>(p.dim());
  const std::size_t nq = static_cast<std::size_t>(q.dim());
  for (const auto& f : p.facets()) {
    RationalVector normal(np + nq, Rational(0));
    std::copy(f.normal.begin(), f.normal.end(), normal.begin());
    impl->facets.push_back({std::move(normal), f.offset});
  }
  for (const auto& f : q.facets()) {
    RationalVector normal(np + nq, Rational(0));
    std::copy(f.normal.begin(), f.normal.end(), normal.begin() +
              static_cast<std::ptrdiff_t>(np));
    impl->facets.push_back({std::move(normal), f.offset});
  }
  for (const auto& vp : p.vertices()) {
    for (const auto& vq : q.vertices()) {
      RationalVector v(np + nq);
      std::copy(vp.begin(), vp.end(), v.begin());
      std::copy(vq.begin(), vq.end(),
                v.begin() + static_cast<std::ptrdiff_t>(np));
      impl->vertices.push_back(std::move(v));
    }
  }
  std::sort(impl->vertices.begin(), impl->vertices.end(), lex_less);
  impl->finalize_vertex_matrix();
  return Polytope(std::move(impl));
}

Polytope clip(const Polytope& p, const Halfspace& h) {
  if (h.normal.size() != static_cast<std::size_t>(p.dim())) {
    throw std::invalid_argument("clip normal has wrong dimension");
  }
  auto facets = p.facets();
  facets.push_back(h);
  dedup_facets(facets);

  auto impl = std::make_shared<Polytope::Impl>();
  impl->dim = p.dim();
  impl->canonical = false;
  impl->vertices = enumerate_vertices(p.dim(), facets);
  impl->full_dim = affine_dim_of(impl->vertices) == p.dim();
  if (impl->full_dim) {
    prune_redundant_facets(p.dim(), facets, impl->vertices);
  }
  impl->facets = std::move(facets);
  impl->finalize_vertex_matrix();
  return Polytope(std::move(impl));
}

std::pair<double, Eigen::VectorXd> min_affine(const Polytope& p,
                                              const AffineFn& f) {
  const auto& vm = p.vertex_matrix();
  if (vm.cols() == 0) throw DegeneratePolytopeError("polytope has no vertices");
  Eigen::Index best = 0;
  double best_value = f.slope.dot(vm.col(0)) + f.constant;
  for (Eigen::Index j = 1; j < vm.cols(); ++j) {
    const double value = f.slope.dot(vm.col(j)) + f.constant;
    if (value < best_value) {  // ties keep the lex-smallest vertex
      best_value = value;
      best = j;
    }
  }
  return {best_value, vm.col(best)};
}

}  // namespace soliton
