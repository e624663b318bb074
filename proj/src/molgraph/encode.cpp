//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molshift/molgraph/encode.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "molshift/errors.hpp"

namespace molshift {

AtomVocab::AtomVocab(std::vector<Element> elements)
    : elements_(std::move(elements)) {
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (elements_[i] == elements_[j])
        throw std::invalid_argument("duplicate element in atom vocabulary");
    }
  }
}

AtomVocab AtomVocab::organic() {
  std::vector<Element> all;
  for (int i = 0; i < kNumElements; ++i)
    all.push_back(static_cast<Element>(i));
  return AtomVocab(std::move(all));
}

std::optional<int> AtomVocab::id(Element element) const {
  auto it = std::find(elements_.begin(), elements_.end(), element);
  if (it == elements_.end())
    return std::nullopt;
  return static_cast<int>(it - elements_.begin());
}

EncodedGraph encode(const MolecularGraph &graph, const AtomVocab &vocab, int d_max,
                    std::optional<int> task_id) {
  if (vocab.empty())
    throw std::invalid_argument("atom vocabulary is empty");
  if (task_id && *task_id < 0)
    throw std::invalid_argument("task id must be non-negative");

  EncodedGraph enc;
  enc.d_max = d_max;
  enc.atom_type_ids.reserve(graph.atoms.size());
  for (const Atom &atom: graph.atoms) {
    auto id = vocab.id(atom.element);
    if (!id) {
      throw DataError("unknown atom type '" + std::string(element_symbol(atom.element))
                      + "' in " + graph.source_smiles);
    }
    enc.atom_type_ids.push_back(*id);
  }
  enc.centrality = total_centrality(graph);
  enc.spd = shortest_paths(graph, d_max);
  return with_task(enc, task_id);
}

EncodedGraph with_task(const EncodedGraph &enc, std::optional<int> task_id) {
  EncodedGraph out = enc;
  const int n = enc.num_atoms();
  out.task_id = task_id;
  if (!task_id) {
    out.spd = enc.spd.topLeftCorner(n, n);
    return out;
  }
  out.spd.resize(n + 1, n + 1);
  out.spd.topLeftCorner(n, n) = enc.spd.topLeftCorner(n, n);
  out.spd.row(n).setConstant(enc.task_bucket());
  out.spd.col(n).setConstant(enc.task_bucket());
  return out;
}

EncodedGraph permute_atoms(const EncodedGraph &enc, const std::vector<int> &order) {
  const int n = enc.num_atoms();
  std::vector<int> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < static_cast<int>(sorted.size()); ++i) {
    if (sorted[i] != i || static_cast<int>(sorted.size()) != n)
      throw std::invalid_argument("atom order is not a permutation of 0.." + std::to_string(n - 1));
  }

  EncodedGraph out = enc;
  std::vector<int> full = order;
  if (enc.task_id)
    full.push_back(n);
  for (int i = 0; i < n; ++i) {
    out.atom_type_ids[i] = enc.atom_type_ids[order[i]];
    out.centrality[i] = enc.centrality[order[i]];
  }
  for (std::size_t i = 0; i < full.size(); ++i) {
    for (std::size_t j = 0; j < full.size(); ++j)
      out.spd(i, j) = enc.spd(full[i], full[j]);
  }
  return out;
}

}  // namespace molshift
