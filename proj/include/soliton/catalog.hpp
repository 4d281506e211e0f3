#pragma once

#include <string>
#include <vector>

#include "soliton/polytope.hpp"

namespace soliton {

/// A named canonical polytope with its anticanonical degree. Every entry
/// passes a reflexivity audit at load time: offsets one, origin interior,
/// lattice vertices, and n! * volume equal to the recorded degree.
struct CatalogEntry {
  std::string name;
  Polytope polytope;
  std::string notes;
  long anticanonical_degree = 0;
};

/// The built-in desk-scale examples: p1, p2, p3, p1xp1, p1xp2, bl1p2,
/// bl2p2, bl3p2.
const std::vector<CatalogEntry>& catalog();

/// Lookup by name; throws std::invalid_argument for unknown names.
const CatalogEntry& catalog_entry(const std::string& name);

/// Canonical polytope of k-dimensional projective space (the reflexive
/// simplex with facet normals e_1..e_k and -(e_1+...+e_k)).
Polytope reflexive_simplex(int dim);

}  // namespace soliton
