//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molshift/trainpipe/run_config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "molshift/errors.hpp"

namespace molshift {
namespace {

std::string trim(const std::string &s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos)
    return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

template <typename T>
T parse_number(const std::string &key, const std::string &value) {
  T out {};
  const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || end != value.data() + value.size())
    throw DataError("config key '" + key + "': '" + value + "' is not a valid number");
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

}  // namespace

void set_run_config_key(RunConfig &run, const std::string &key, const std::string &value) {
  if (key == "seed") {
    run.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "split_seed") {
    run.split_seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "epochs") {
    run.epochs = parse_number<int>(key, value);
  } else if (key == "batch_size") {
    run.batch_size = parse_number<int>(key, value);
  } else if (key == "learning_rate") {
    run.learning_rate = parse_number<double>(key, value);
  } else if (key == "patience") {
    run.patience = parse_number<int>(key, value);
  } else if (key == "tasks") {
    run.tasks.clear();
    std::stringstream ss(value);
    for (std::string item; std::getline(ss, item, ',');) {
      if (!trim(item).empty())
        run.tasks.push_back(trim(item));
    }
  } else if (key == "d_max") {
    run.d_max = parse_number<int>(key, value);
  } else if (key == "model_config") {
    run.model_config = value;
  } else if (key == "hidden_dim") {
    run.hidden_dim = parse_number<int>(key, value);
  } else if (key == "num_layers") {
    run.num_layers = parse_number<int>(key, value);
  } else if (key == "num_heads") {
    run.num_heads = parse_number<int>(key, value);
  } else if (key == "dropout") {
    run.dropout = parse_number<double>(key, value);
  } else if (key == "target_mae") {
    run.target_mae = parse_number<double>(key, value);
  } else if (key == "stop_at_target") {
    if (value == "1" || value == "true")
      run.stop_at_target = true;
    else if (value == "0" || value == "false")
      run.stop_at_target = false;
    else
      throw DataError("config key 'stop_at_target': expected true or false");
  } else {
    throw DataError("unknown config key '" + key + "'");
  }
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string &what) {
    if (!ok)
      throw DataError("invalid run config: " + what);
  };
  require(epochs > 0, "epochs must be positive");
  require(batch_size > 0, "batch_size must be positive");
  require(learning_rate > 0 && std::isfinite(learning_rate), "learning_rate must be positive");
  require(patience >= 0, "patience must be non-negative");
  require(d_max >= 1, "d_max must be at least 1");
  require(!hidden_dim || *hidden_dim > 0, "hidden_dim must be positive");
  require(!num_layers || *num_layers > 0, "num_layers must be positive");
  require(!num_heads || *num_heads > 0, "num_heads must be positive");
  require(!dropout || (*dropout >= 0 && *dropout < 1), "dropout must lie in [0, 1)");
  require(!target_mae || *target_mae > 0, "target_mae must be positive");
  require(!stop_at_target || target_mae, "stop_at_target needs target_mae");
}

ModelConfig RunConfig::model(std::vector<HeadKind> head_kinds) const {
  ModelConfig base;
  if (!model_config.empty())
    base = load_model_config(model_config);
  try {
    return make_model_config(hidden_dim.value_or(base.hidden_dim),
                             num_layers.value_or(base.num_layers),
                             num_heads.value_or(base.num_heads), d_max, std::move(head_kinds),
                             dropout.value_or(base.dropout_rate));
  } catch (const std::invalid_argument &e) {
    throw DataError(e.what());
  }
}

std::map<std::string, std::string> RunConfig::to_map() const {
  std::map<std::string, std::string> m;
  m["seed"] = std::to_string(seed);
  m["split_seed"] = std::to_string(split_seed);
  m["epochs"] = std::to_string(epochs);
  m["batch_size"] = std::to_string(batch_size);
  m["learning_rate"] = format_double(learning_rate);
  m["patience"] = std::to_string(patience);
  std::string joined;
  for (const std::string &t: tasks)
    joined += (joined.empty() ? "" : ",") + t;
  m["tasks"] = joined;
  m["d_max"] = std::to_string(d_max);
  if (!model_config.empty())
    m["model_config"] = model_config;
  if (hidden_dim)
    m["hidden_dim"] = std::to_string(*hidden_dim);
  if (num_layers)
    m["num_layers"] = std::to_string(*num_layers);
  if (num_heads)
    m["num_heads"] = std::to_string(*num_heads);
  if (dropout)
    m["dropout"] = format_double(*dropout);
  if (target_mae)
    m["target_mae"] = format_double(*target_mae);
  m["stop_at_target"] = stop_at_target ? "true" : "false";
  return m;
}

RunConfig parse_run_config(const std::string &text, const std::string &origin) {
  RunConfig run;
  std::istringstream in(text);
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const std::string content = trim(line);
    if (content.empty() || content[0] == '#')
      continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos)
      throw DataError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    try {
      set_run_config_key(run, trim(content.substr(0, eq)), trim(content.substr(eq + 1)));
    } catch (const DataError &e) {
      throw DataError(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  run.validate();
  return run;
}

RunConfig load_run_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig run = parse_run_config(ss.str(), path.string());
  if (!run.model_config.empty() && std::filesystem::path(run.model_config).is_relative())
    run.model_config = (path.parent_path() / run.model_config).lexically_normal().string();
  return run;
}

std::string format_run_config(const RunConfig &run) {
  std::string out;
  for (const auto &[key, value]: run.to_map())
    out += key + " = " + value + "\n";
  return out;
}

}  // namespace molshift
