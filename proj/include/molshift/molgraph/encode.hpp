//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLSHIFT_MOLGRAPH_ENCODE_HPP_
#define MOLSHIFT_MOLGRAPH_ENCODE_HPP_

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "molshift/molgraph/element.hpp"
#include "molshift/molgraph/graph.hpp"

namespace molshift {

inline constexpr int kDefaultMaxDistance = 5;

// Maps elements to dense atom-type ids.
class AtomVocab {
public:
  AtomVocab() = default;
  explicit AtomVocab(std::vector<Element> elements);

  // All eleven supported elements, in atomic-number order.
  static AtomVocab organic();

  int size() const { return static_cast<int>(elements_.size()); }
  bool empty() const { return elements_.empty(); }
  std::optional<int> id(Element element) const;
  const std::vector<Element> &elements() const { return elements_; }

private:
  std::vector<Element> elements_;
};

// Integer inputs of the model for one molecule. Real atoms come first; when
// a task is set, one virtual node is appended whose distance to every node
// (itself included) is the task bucket.
struct EncodedGraph {
  std::vector<int> atom_type_ids;
  std::vector<int> centrality;
  Eigen::MatrixXi spd;
  std::optional<int> task_id;
  int d_max = kDefaultMaxDistance;

  int num_atoms() const { return static_cast<int>(atom_type_ids.size()); }
  int num_nodes() const { return num_atoms() + (task_id ? 1 : 0); }
  int far_bucket() const { return d_max + 1; }
  int task_bucket() const { return d_max + 2; }

  friend bool operator==(const EncodedGraph &a, const EncodedGraph &b) {
    return a.atom_type_ids == b.atom_type_ids && a.centrality == b.centrality
           && a.spd == b.spd && a.task_id == b.task_id && a.d_max == b.d_max;
  }
};

EncodedGraph encode(const MolecularGraph &graph, const AtomVocab &vocab,
                    int d_max = kDefaultMaxDistance,
                    std::optional<int> task_id = std::nullopt);

// Same molecule, different (or no) task node.
EncodedGraph with_task(const EncodedGraph &enc, std::optional<int> task_id);

// Reorders the real atoms: atom i of the result is atom order[i] of `enc`.
// The task node, if any, stays last.
EncodedGraph permute_atoms(const EncodedGraph &enc, const std::vector<int> &order);

}  // namespace molshift

#endif  // MOLSHIFT_MOLGRAPH_ENCODE_HPP_
