//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLSHIFT_TRAINPIPE_RUN_CONFIG_HPP_
#define MOLSHIFT_TRAINPIPE_RUN_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "molshift/graphormer/config.hpp"

namespace molshift {

/// Training run settings, read from a flat `key = value` file. Lines starting
/// with '#' are comments. Unknown keys and non-positive numeric values are
/// errors. `tasks` is a comma-separated list.
///
/// The architecture comes from `model_config` (a JSON ModelConfig; relative
/// paths in a file resolve against the file's directory) when set,
/// otherwise from the defaults; the inline keys hidden_dim, num_layers,
/// num_heads and dropout override either source.
struct RunConfig {
  std::uint64_t seed = 0;
  std::uint64_t split_seed = 0;
  int epochs = 100;
  int batch_size = 16;
  double learning_rate = 1e-3;
  // Epochs without validation improvement before stopping; 0 disables.
  int patience = 20;
  std::vector<std::string> tasks;
  int d_max = 5;
  std::string model_config;
  std::optional<int> hidden_dim;
  std::optional<int> num_layers;
  std::optional<int> num_heads;
  std::optional<double> dropout;
  // Records the first epoch whose validation MAE reaches this value.
  std::optional<double> target_mae;
  // Ends training at the epoch that first reaches target_mae.
  bool stop_at_target = false;

  // Validates ranges; throws DataError.
  void validate() const;

  // Architecture for the given heads, resolved as documented above.
  ModelConfig model(std::vector<HeadKind> head_kinds) const;

  // Canonical key/value form, suitable for manifests and for re-parsing.
  std::map<std::string, std::string> to_map() const;
};

RunConfig parse_run_config(const std::string &text, const std::string &origin = "<config>");
RunConfig load_run_config(const std::filesystem::path &path);

// Applies one `key=value` assignment; shared by the file parser and CLI flags.
void set_run_config_key(RunConfig &run, const std::string &key, const std::string &value);

std::string format_run_config(const RunConfig &run);

}  // namespace molshift

#endif  // MOLSHIFT_TRAINPIPE_RUN_CONFIG_HPP_
