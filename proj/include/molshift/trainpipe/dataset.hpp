//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLSHIFT_TRAINPIPE_DATASET_HPP_
#define MOLSHIFT_TRAINPIPE_DATASET_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "molshift/molgraph/graph.hpp"

namespace molshift {

enum class SplitRole {
  kTrain,
  kValid,
  kTest,
};

inline constexpr std::array<SplitRole, 3> kAllSplits = { SplitRole::kTrain, SplitRole::kValid,
                                                         SplitRole::kTest };

std::string to_string(SplitRole role);
SplitRole split_role_from_string(const std::string &name);

// Per-atom property names accepted in atom datasets.
inline const std::vector<std::string> kAtomTaskNames = { "charge", "fukui_e", "fukui_n", "nmr" };

// Seeded 80/10/10 assignment from a stable hash of the SMILES string, so the
// same molecule always lands in the same split.
SplitRole hash_split(const std::string &smiles, std::uint64_t seed);

// One molecule with per-heavy-atom targets; a property may be absent.
struct AtomRecord {
  std::string smiles;
  MolecularGraph graph;
  std::map<std::string, std::vector<double>> props;
  SplitRole split = SplitRole::kTrain;
};

struct MolRecord {
  std::string smiles;
  MolecularGraph graph;
  double target = 0.0;
  SplitRole split = SplitRole::kTrain;
};

template <typename Record>
struct Splits {
  std::vector<Record> train;
  std::vector<Record> valid;
  std::vector<Record> test;

  std::vector<Record> &operator[](SplitRole role) {
    return role == SplitRole::kTrain ? train : role == SplitRole::kValid ? valid : test;
  }
  const std::vector<Record> &operator[](SplitRole role) const {
    return role == SplitRole::kTrain ? train : role == SplitRole::kValid ? valid : test;
  }
  std::size_t size() const { return train.size() + valid.size() + test.size(); }
};

using AtomDataset = Splits<AtomRecord>;
using MolDataset = Splits<MolRecord>;

/// Reads a JSONL atom dataset, one object per line:
///   {"smiles": "...", "atom_props": {"charge": [...], ...}, "split": "train"}
/// "split" is optional; records without it are placed by hash_split. Graphs
/// are resonance-folded. Errors are DataError with the line number.
AtomDataset load_atom_dataset(const std::filesystem::path &path, std::uint64_t split_seed = 0);

/// Reads a CSV molecule dataset with header `smiles,target[,split]`.
MolDataset load_mol_dataset(const std::filesystem::path &path, std::uint64_t split_seed = 0);

}  // namespace molshift

#endif  // MOLSHIFT_TRAINPIPE_DATASET_HPP_
