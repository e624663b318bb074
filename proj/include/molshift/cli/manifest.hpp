//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLSHIFT_CLI_MANIFEST_HPP_
#define MOLSHIFT_CLI_MANIFEST_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace molshift::cli {

std::string sha256_hex(std::string_view data);
// Throws DataError when the file cannot be read.
std::string sha256_file(const std::filesystem::path &path);

// Creates `<out>/<command>-<seed>-<UTC timestamp>`, adding "-2", "-3", ...
// when that name is taken.
std::filesystem::path make_run_dir(const std::filesystem::path &out, const std::string &command,
                                   std::uint64_t seed);

// Everything needed to repeat a run: the canonical argument list (absolute
// paths, no --out), the resolved configuration and content hashes.
struct Manifest {
  std::string command;
  std::vector<std::string> args;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;
  std::map<std::string, std::string> inputs;
  std::map<std::string, std::string> outputs;
  std::string created;
  std::string version;
};

nlohmann::json to_json(const Manifest &m);
Manifest manifest_from_json(const nlohmann::json &j);
void write_manifest(const std::filesystem::path &run_dir, const Manifest &m);
Manifest read_manifest(const std::filesystem::path &path);

// Hashes of every regular file under `dir` except manifest.json, keyed by
// generic relative path.
std::map<std::string, std::string> hash_outputs(const std::filesystem::path &dir);

}  // namespace molshift::cli

#endif  // MOLSHIFT_CLI_MANIFEST_HPP_
