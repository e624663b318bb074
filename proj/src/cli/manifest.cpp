//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molshift/cli/manifest.hpp"

#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <memory>

#include <openssl/evp.h>

#include "molshift/errors.hpp"

namespace molshift::cli {
namespace {

class Sha256 {
public:
  Sha256(): ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
      throw std::runtime_error("SHA-256 initialization failed");
  }

  void update(const void *data, std::size_t size) {
    if (EVP_DigestUpdate(ctx_.get(), data, size) != 1)
      throw std::runtime_error("SHA-256 update failed");
  }

  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest {};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), digest.data(), &len) != 1)
      throw std::runtime_error("SHA-256 finalization failed");
    static const char *digits = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
      out += digits[digest[i] >> 4];
      out += digits[digest[i] & 15];
    }
    return out;
  }

private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

std::string utc_timestamp(const char *format) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm {};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), format, &tm);
  return buf;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.hex();
}

std::string sha256_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw DataError("cannot read " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

std::filesystem::path make_run_dir(const std::filesystem::path &out, const std::string &command,
                                   std::uint64_t seed) {
  std::filesystem::create_directories(out);
  const std::string stem = command + "-" + std::to_string(seed) + "-" + utc_timestamp("%Y%m%dT%H%M%SZ");
  std::filesystem::path dir = out / stem;
  for (int k = 2; !std::filesystem::create_directory(dir); ++k)
    dir = out / (stem + "-" + std::to_string(k));
  return dir;
}

nlohmann::json to_json(const Manifest &m) {
  return {
    { "command", m.command }, { "args", m.args },     { "seed", m.seed },
    { "config", m.config },   { "inputs", m.inputs }, { "outputs", m.outputs },
    { "created", m.created.empty() ? utc_timestamp("%Y-%m-%dT%H:%M:%SZ") : m.created },
    { "version", m.version },
  };
}

Manifest manifest_from_json(const nlohmann::json &j) {
  try {
    Manifest m;
    m.command = j.at("command").get<std::string>();
    m.args = j.at("args").get<std::vector<std::string>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
    m.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
    m.created = j.value("created", "");
    m.version = j.value("version", "");
    return m;
  } catch (const nlohmann::json::exception &e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
}

void write_manifest(const std::filesystem::path &run_dir, const Manifest &m) {
  std::ofstream os(run_dir / "manifest.json");
  if (!os)
    throw DataError("cannot write " + (run_dir / "manifest.json").string());
  os << to_json(m).dump(2) << '\n';
}

Manifest read_manifest(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open manifest " + path.string());
  try {
    return manifest_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error &e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::map<std::string, std::string> hash_outputs(const std::filesystem::path &dir) {
  std::map<std::string, std::string> out;
  for (const auto &entry: std::filesystem::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file())
      continue;
    const std::string rel = std::filesystem::relative(entry.path(), dir).generic_string();
    if (rel != "manifest.json")
      out[rel] = sha256_file(entry.path());
  }
  return out;
}

}  // namespace molshift::cli
