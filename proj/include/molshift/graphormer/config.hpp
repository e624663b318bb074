//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLSHIFT_GRAPHORMER_CONFIG_HPP_
#define MOLSHIFT_GRAPHORMER_CONFIG_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace molshift {

enum class HeadKind {
  kRegression,
  kBinary,
};

std::string to_string(HeadKind kind);
HeadKind head_kind_from_string(const std::string &name);

// Architecture hyperparameters. The bucket counts are derived from d_max and
// the centrality clamp but are stored so that a saved model is self-describing.
struct ModelConfig {
  int hidden_dim = 64;
  int num_layers = 4;
  int num_heads = 4;
  int d_max = 5;
  int atom_vocab_size = 11;
  int centrality_buckets = 9;
  int spd_buckets = 8;
  int num_tasks = 1;
  double dropout_rate = 0.1;
  std::vector<HeadKind> head_kinds = { HeadKind::kRegression };

  int head_dim() const { return hidden_dim / num_heads; }
  int ffn_dim() const { return 4 * hidden_dim; }

  // Throws std::invalid_argument describing the first violated constraint.
  void validate() const;

  // True when both configs describe the same encoder, so weights transfer.
  bool same_encoder(const ModelConfig &other) const;

  friend bool operator==(const ModelConfig &, const ModelConfig &) = default;
};

// Config with buckets derived from d_max and one head kind per task.
ModelConfig make_model_config(int hidden_dim, int num_layers, int num_heads, int d_max,
                              std::vector<HeadKind> head_kinds, double dropout_rate = 0.1);

nlohmann::json to_json(const ModelConfig &config);
ModelConfig model_config_from_json(const nlohmann::json &j);

void save_model_config(const std::filesystem::path &path, const ModelConfig &config);
ModelConfig load_model_config(const std::filesystem::path &path);

}  // namespace molshift

#endif  // MOLSHIFT_GRAPHORMER_CONFIG_HPP_
