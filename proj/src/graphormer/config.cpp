//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molshift/graphormer/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "molshift/errors.hpp"
#include "molshift/molgraph/element.hpp"
#include "molshift/molgraph/graph.hpp"

namespace molshift {

std::string to_string(HeadKind kind) {
  return kind == HeadKind::kBinary ? "binary" : "regression";
}

HeadKind head_kind_from_string(const std::string &name) {
  if (name == "regression")
    return HeadKind::kRegression;
  if (name == "binary")
    return HeadKind::kBinary;
  throw std::invalid_argument("unknown head kind '" + name + "'");
}

void ModelConfig::validate() const {
  auto require = [](bool ok, const std::string &what) {
    if (!ok)
      throw std::invalid_argument("invalid model config: " + what);
  };
  require(hidden_dim > 0, "hidden_dim must be positive");
  require(num_layers > 0, "num_layers must be positive");
  require(num_heads > 0, "num_heads must be positive");
  require(hidden_dim % num_heads == 0, "hidden_dim " + std::to_string(hidden_dim)
                                           + " not divisible by num_heads "
                                           + std::to_string(num_heads));
  require(d_max >= 1, "d_max must be at least 1");
  require(atom_vocab_size > 0, "atom_vocab_size must be positive");
  require(centrality_buckets == kMaxCentrality + 1,
          "centrality_buckets must be " + std::to_string(kMaxCentrality + 1));
  require(spd_buckets == d_max + 3, "spd_buckets must be d_max + 3");
  require(num_tasks >= 1, "num_tasks must be at least 1");
  require(static_cast<int>(head_kinds.size()) == num_tasks,
          "head_kinds must list one kind per task");
  require(dropout_rate >= 0.0 && dropout_rate < 1.0, "dropout_rate must lie in [0, 1)");
}

bool ModelConfig::same_encoder(const ModelConfig &other) const {
  return hidden_dim == other.hidden_dim && num_layers == other.num_layers
         && num_heads == other.num_heads && d_max == other.d_max
         && atom_vocab_size == other.atom_vocab_size
         && centrality_buckets == other.centrality_buckets
         && spd_buckets == other.spd_buckets;
}

ModelConfig make_model_config(int hidden_dim, int num_layers, int num_heads, int d_max,
                              std::vector<HeadKind> head_kinds, double dropout_rate) {
  ModelConfig c;
  c.hidden_dim = hidden_dim;
  c.num_layers = num_layers;
  c.num_heads = num_heads;
  c.d_max = d_max;
  c.atom_vocab_size = kNumElements;
  c.centrality_buckets = kMaxCentrality + 1;
  c.spd_buckets = d_max + 3;
  c.num_tasks = static_cast<int>(head_kinds.size());
  c.head_kinds = std::move(head_kinds);
  c.dropout_rate = dropout_rate;
  c.validate();
  return c;
}

nlohmann::json to_json(const ModelConfig &config) {
  nlohmann::json kinds = nlohmann::json::array();
  for (HeadKind k: config.head_kinds)
    kinds.push_back(to_string(k));
  return {
    { "hidden_dim", config.hidden_dim },
    { "num_layers", config.num_layers },
    { "num_heads", config.num_heads },
    { "d_max", config.d_max },
    { "atom_vocab_size", config.atom_vocab_size },
    { "centrality_buckets", config.centrality_buckets },
    { "spd_buckets", config.spd_buckets },
    { "num_tasks", config.num_tasks },
    { "dropout_rate", config.dropout_rate },
    { "head_kinds", kinds },
  };
}

ModelConfig model_config_from_json(const nlohmann::json &j) {
  static const std::set<std::string> kKeys = {
    "hidden_dim", "num_layers", "num_heads", "d_max", "atom_vocab_size",
    "centrality_buckets", "spd_buckets", "num_tasks", "dropout_rate", "head_kinds",
  };
  if (!j.is_object())
    throw DataError("model config must be a JSON object");
  for (const auto &item: j.items()) {
    if (kKeys.count(item.key()) == 0)
      throw DataError("unknown model config key '" + item.key() + "'");
  }
  for (const std::string &key: kKeys) {
    if (!j.contains(key))
      throw DataError("model config is missing '" + key + "'");
  }

  ModelConfig c;
  try {
    c.hidden_dim = j.at("hidden_dim").get<int>();
    c.num_layers = j.at("num_layers").get<int>();
    c.num_heads = j.at("num_heads").get<int>();
    c.d_max = j.at("d_max").get<int>();
    c.atom_vocab_size = j.at("atom_vocab_size").get<int>();
    c.centrality_buckets = j.at("centrality_buckets").get<int>();
    c.spd_buckets = j.at("spd_buckets").get<int>();
    c.num_tasks = j.at("num_tasks").get<int>();
    c.dropout_rate = j.at("dropout_rate").get<double>();
    c.head_kinds.clear();
    for (const auto &k: j.at("head_kinds"))
      c.head_kinds.push_back(head_kind_from_string(k.get<std::string>()));
    c.validate();
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("malformed model config: ") + e.what());
  } catch (const std::invalid_argument &e) {
    throw DataError(e.what());
  }
  return c;
}

void save_model_config(const std::filesystem::path &path, const ModelConfig &config) {
  std::ofstream os(path);
  if (!os)
    throw DataError("cannot write " + path.string());
  os << to_json(config).dump(2) << '\n';
}

ModelConfig load_model_config(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is)
    throw DataError("cannot open model config " + path.string());
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::parse_error &e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return model_config_from_json(j);
}

}  // namespace molshift
