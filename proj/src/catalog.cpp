#include "soliton/catalog.hpp"

#include <mutex>
#include <stdexcept>

#include "soliton/errors.hpp"

namespace soliton {

namespace {

Halfspace hs(std::vector<long> normal) {
  RationalVector n(normal.size());
  for (std::size_t i = 0; i < normal.size(); ++i) n[i] = normal[i];
  return Halfspace{std::move(n), Rational(1)};
}

Polytope canonical_from_rays(int dim,
                             const std::vector<std::vector<long>>& rays) {
  std::vector<Halfspace> facets;
  facets.reserve(rays.size());
  for (const auto& r : rays) facets.push_back(hs(r));
  return Polytope::from_facets(dim, std::move(facets), /*canonical=*/true);
}

void audit(const CatalogEntry& e) {
  for (const auto& vx : e.polytope.vertices()) {
    for (const auto& coord : vx) {
      if (denominator(coord) != 1) {
        throw NotCanonicalError("catalog entry " + e.name +
                                " has a non-lattice vertex");
      }
    }
  }
  Rational degree = e.polytope.volume_exact();
  for (int k = 2; k <= e.polytope.dim(); ++k) degree *= k;
  if (degree != e.anticanonical_degree) {
    throw NotCanonicalError("catalog entry " + e.name +
                            " fails the degree audit");
  }
}

std::vector<CatalogEntry> build_catalog() {
  std::vector<CatalogEntry> entries;
  entries.push_back({"p1", reflexive_simplex(1), "P^1; KE", 2});
  entries.push_back({"p2", reflexive_simplex(2), "P^2; KE", 9});
  entries.push_back({"p3", reflexive_simplex(3), "P^3; KE", 64});
  entries.push_back({"p1xp1",
                     product(reflexive_simplex(1), reflexive_simplex(1)),
                     "P^1 x P^1; KE", 8});
  entries.push_back({"p1xp2",
                     product(reflexive_simplex(1), reflexive_simplex(2)),
                     "P^1 x P^2; KE", 54});
  entries.push_back({"bl1p2",
                     canonical_from_rays(
                         2, {{1, 0}, {0, 1}, {-1, -1}, {1, 1}}),
                     "one-point blow-up of P^2; KRS nontrivial", 8});
  entries.push_back({"bl2p2",
                     canonical_from_rays(
                         2, {{1, 0}, {0, 1}, {-1, -1}, {1, 1}, {0, -1}}),
                     "two-point blow-up of P^2; KRS nontrivial", 7});
  entries.push_back({"bl3p2",
                     canonical_from_rays(2, {{1, 0},
                                             {0, 1},
                                             {-1, -1},
                                             {1, 1},
                                             {0, -1},
                                             {-1, 0}}),
                     "three-point blow-up of P^2; KE", 6});
  for (const auto& e : entries) audit(e);
  return entries;
}

}  // namespace

Polytope reflexive_simplex(int dim) {
  if (dim < 1) throw std::invalid_argument("reflexive simplex needs dim >= 1");
  std::vector<std::vector<long>> rays;
  for (int i = 0; i < dim; ++i) {
    std::vector<long> e(static_cast<std::size_t>(dim), 0);
    e[static_cast<std::size_t>(i)] = 1;
    rays.push_back(std::move(e));
  }
  rays.push_back(std::vector<long>(static_cast<std::size_t>(dim), -1));
  return canonical_from_rays(dim, rays);
}

const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries = build_catalog();
  return entries;
}

const CatalogEntry& catalog_entry(const std::string& name) {
  for (const auto& e : catalog()) {
    if (e.name == name) return e;
  }
  throw std::invalid_argument("unknown catalog entry: " + name);
}

}  // namespace soliton
