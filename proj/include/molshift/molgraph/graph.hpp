//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLSHIFT_MOLGRAPH_GRAPH_HPP_
#define MOLSHIFT_MOLGRAPH_GRAPH_HPP_

#include <string>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "molshift/molgraph/element.hpp"

namespace molshift {

struct Atom {
  Element element = Element::kC;
  int explicit_degree = 0;
  int implicit_h = 0;
  // Used for valence accounting only; the model never sees it.
  int formal_charge = 0;
  bool in_ring = false;

  int total_neighbors() const { return explicit_degree + implicit_h; }

  friend bool operator==(const Atom &, const Atom &) = default;
};

using AdjacencyMatrix =
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// A connected molecule with bond orders already discarded. Atoms are kept in
// the order the parser emitted them.
struct MolecularGraph {
  std::vector<Atom> atoms;
  AdjacencyMatrix adjacency;
  std::string source_smiles;

  int num_atoms() const { return static_cast<int>(atoms.size()); }
  std::vector<int> neighbors(int atom) const;
  int num_edges() const;
};

/// Drops everything the model cannot see (formal charges, and with them the
/// distinction between charge-separated and neutral notations). The result
/// depends only on elements, connectivity and hydrogen counts.
MolecularGraph fold_resonance(const MolecularGraph &graph);

inline constexpr int kMaxCentrality = 8;

/// Explicit neighbors plus implicit hydrogens per atom, clamped to
/// kMaxCentrality.
std::vector<int> total_centrality(const MolecularGraph &graph);

/// All-pairs hop distances by BFS. Pairs further apart than d_max are set to
/// d_max + 1.
Eigen::MatrixXi shortest_paths(const MolecularGraph &graph, int d_max);

/// Label-preserving graph isomorphism over (element, implicit_h, adjacency);
/// backtracking search, intended for molecules up to a few dozen atoms.
bool is_isomorphic(const MolecularGraph &lhs, const MolecularGraph &rhs);

/// {"atoms": [{"element", "implicit_h", "charge"}], "edges": [[i, j]]}
nlohmann::json to_json(const MolecularGraph &graph);

}  // namespace molshift

#endif  // MOLSHIFT_MOLGRAPH_GRAPH_HPP_
