//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molshift/molgraph/graph.hpp"

#include <algorithm>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace molshift {

std::vector<int> MolecularGraph::neighbors(int atom) const {
  std::vector<int> result;
  for (int j = 0; j < num_atoms(); ++j) {
    if (adjacency(atom, j))
      result.push_back(j);
  }
  return result;
}

int MolecularGraph::num_edges() const {
  return static_cast<int>(adjacency.count()) / 2;
}

MolecularGraph fold_resonance(const MolecularGraph &graph) {
  MolecularGraph folded = graph;
  for (Atom &atom: folded.atoms)
    atom.formal_charge = 0;
  return folded;
}

std::vector<int> total_centrality(const MolecularGraph &graph) {
  std::vector<int> result;
  result.reserve(graph.atoms.size());
  for (const Atom &atom: graph.atoms)
    result.push_back(std::min(atom.total_neighbors(), kMaxCentrality));
  return result;
}

Eigen::MatrixXi shortest_paths(const MolecularGraph &graph, int d_max) {
  if (d_max < 1)
    throw std::invalid_argument("d_max must be at least 1");

  const int n = graph.num_atoms();
  const int far = d_max + 1;
  Eigen::MatrixXi dist = Eigen::MatrixXi::Constant(n, n, -1);

  std::vector<std::vector<int>> adj(n);
  for (int i = 0; i < n; ++i)
    adj[i] = graph.neighbors(i);

  std::queue<int> queue;
  for (int src = 0; src < n; ++src) {
    dist(src, src) = 0;
    queue.push(src);
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop();
      for (int v: adj[u]) {
        if (dist(src, v) < 0) {
          dist(src, v) = dist(src, u) + 1;
          queue.push(v);
        }
      }
    }
  }

  // Unreachable pairs cannot occur for parsed graphs, but treat them as far.
  return dist.unaryExpr(
      [d_max, far](int d) { return d < 0 || d > d_max ? far : d; });
}

namespace {

class IsomorphismSearch {
public:
  IsomorphismSearch(const MolecularGraph &a, const MolecularGraph &b)
      : a_(a), b_(b), n_(a.num_atoms()), map_ab_(n_, -1), map_ba_(n_, -1) {
    for (int i = 0; i < n_; ++i) {
      adj_a_.push_back(a.neighbors(i));
      adj_b_.push_back(b.neighbors(i));
    }
    order_atoms();
  }

  bool run() { return extend(0); }

private:
  bool same_label(int u, int v) const {
    const Atom &x = a_.atoms[u], &y = b_.atoms[v];
    return x.element == y.element && x.implicit_h == y.implicit_h
           && adj_a_[u].size() == adj_b_[v].size();
  }

  // Visit atoms so that every atom after the first of its component has an
  // already-placed neighbor; candidates then come from that neighbor's image.
  void order_atoms() {
    std::vector<bool> seen(n_, false);
    parent_.assign(n_, -1);
    for (int root = 0; root < n_; ++root) {
      if (seen[root])
        continue;
      std::queue<int> queue;
      queue.push(root);
      seen[root] = true;
      while (!queue.empty()) {
        const int u = queue.front();
        queue.pop();
        order_.push_back(u);
        for (int v: adj_a_[u]) {
          if (!seen[v]) {
            seen[v] = true;
            parent_[v] = u;
            queue.push(v);
          }
        }
      }
    }
  }

  bool consistent(int u, int v) const {
    if (!same_label(u, v))
      return false;
    for (int w: adj_a_[u]) {
      if (map_ab_[w] >= 0 && !b_.adjacency(v, map_ab_[w]))
        return false;
    }
    for (int w: adj_b_[v]) {
      if (map_ba_[w] >= 0 && !a_.adjacency(u, map_ba_[w]))
        return false;
    }
    return true;
  }

  bool extend(std::size_t depth) {
    if (depth == order_.size())
      return true;

    const int u = order_[depth];
    std::vector<int> candidates;
    if (parent_[u] >= 0) {
      candidates = adj_b_[map_ab_[parent_[u]]];
    } else {
      candidates.resize(n_);
      for (int i = 0; i < n_; ++i)
        candidates[i] = i;
    }

    for (int v: candidates) {
      if (map_ba_[v] >= 0 || !consistent(u, v))
        continue;
      map_ab_[u] = v;
      map_ba_[v] = u;
      if (extend(depth + 1))
        return true;
      map_ab_[u] = -1;
      map_ba_[v] = -1;
    }
    return false;
  }

  const MolecularGraph &a_;
  const MolecularGraph &b_;
  int n_;
  std::vector<std::vector<int>> adj_a_, adj_b_;
  std::vector<int> order_, parent_;
  std::vector<int> map_ab_, map_ba_;
};

}  // namespace

bool is_isomorphic(const MolecularGraph &lhs, const MolecularGraph &rhs) {
  if (lhs.num_atoms() != rhs.num_atoms() || lhs.num_edges() != rhs.num_edges())
    return false;

  auto label_counts = [](const MolecularGraph &g) {
    std::vector<std::tuple<Element, int, int>> labels;
    for (int i = 0; i < g.num_atoms(); ++i) {
      labels.emplace_back(g.atoms[i].element, g.atoms[i].implicit_h,
                          static_cast<int>(g.adjacency.row(i).count()));
    }
    std::sort(labels.begin(), labels.end());
    return labels;
  };
  if (label_counts(lhs) != label_counts(rhs))
    return false;

  return IsomorphismSearch(lhs, rhs).run();
}

nlohmann::json to_json(const MolecularGraph &graph) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const Atom &atom: graph.atoms) {
    atoms.push_back({
        { "element", std::string(element_symbol(atom.element)) },
        { "implicit_h", atom.implicit_h },
        { "charge", atom.formal_charge },
    });
  }

  nlohmann::json edges = nlohmann::json::array();
  for (int i = 0; i < graph.num_atoms(); ++i) {
    for (int j = i + 1; j < graph.num_atoms(); ++j) {
      if (graph.adjacency(i, j))
        edges.push_back({ i, j });
    }
  }
  return { { "atoms", std::move(atoms) }, { "edges", std::move(edges) } };
}

}  // namespace molshift
