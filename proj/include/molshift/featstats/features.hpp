//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLSHIFT_FEATSTATS_FEATURES_HPP_
#define MOLSHIFT_FEATSTATS_FEATURES_HPP_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "molshift/molgraph/graph.hpp"
#include "molshift/trainpipe/dataset.hpp"
#include "molshift/trainpipe/train.hpp"

namespace molshift {

inline constexpr std::string_view kFeatureMagic = "MSFEAT1";

enum class ModelTag {
  kScratch,
  kMolPretrained,
  kAtomPretrained,
};

std::string to_string(ModelTag tag);
ModelTag model_tag_from_string(const std::string &name);

using FeatureValues = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Captured node states of one split: one row per real atom, molecules in
// dataset order.
struct FeatureMatrix {
  FeatureValues values;
  SplitRole split = SplitRole::kTrain;
  ModelTag model = ModelTag::kScratch;

  int rows() const { return static_cast<int>(values.rows()); }
  int dims() const { return static_cast<int>(values.cols()); }
  std::vector<double> column(int dim) const;
};

// "MSFEAT1", u64 rows, u64 cols, then little-endian float32 row-major.
void write_feature_file(const std::filesystem::path &path, const FeatureValues &values);
FeatureValues read_feature_file(const std::filesystem::path &path);

/// Runs every molecule through `bundle` with a task-0 node and keeps the
/// real-atom rows captured after layer `capture_layer`. Throws NumericError
/// naming the molecule index when an activation is not finite.
FeatureMatrix extract_features(const ModelBundle &bundle,
                               const std::vector<MolecularGraph> &graphs, SplitRole split,
                               ModelTag model, int capture_layer = 1);

}  // namespace molshift

#endif  // MOLSHIFT_FEATSTATS_FEATURES_HPP_
