//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molshift/trainpipe/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "json.hpp"
#include "molshift/errors.hpp"
#include "molshift/molgraph/smiles.hpp"

namespace molshift {

std::string to_string(SplitRole role) {
  switch (role) {
  case SplitRole::kTrain: return "train";
  case SplitRole::kValid: return "valid";
  case SplitRole::kTest: return "test";
  }
  return "?";
}

SplitRole split_role_from_string(const std::string &name) {
  if (name == "train")
    return SplitRole::kTrain;
  if (name == "valid" || name == "validation")
    return SplitRole::kValid;
  if (name == "test")
    return SplitRole::kTest;
  throw DataError("unknown split '" + name + "' (expected train, valid or test)");
}

SplitRole hash_split(const std::string &smiles, std::uint64_t seed) {
  // FNV-1a over the bytes, then a splitmix64 finalizer keyed by the seed.
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c: smiles) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  h ^= seed + 0x9e3779b97f4a7c15ULL;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  h ^= h >> 31;
  const std::uint64_t bucket = h % 10;
  return bucket < 8 ? SplitRole::kTrain : bucket == 8 ? SplitRole::kValid : SplitRole::kTest;
}

namespace {

std::string trim(const std::string &s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos)
    return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv(const std::string &line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string::npos)
      break;
    start = comma + 1;
  }
  return fields;
}

std::string where(const std::filesystem::path &path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

MolecularGraph parse_record_smiles(const std::string &smiles, const std::filesystem::path &path,
                                   std::size_t line) {
  try {
    return fold_resonance(parse_smiles(smiles));
  } catch (const SmilesError &e) {
    throw DataError(where(path, line) + "cannot parse '" + smiles + "': " + e.what());
  }
}

// Guards the "no SMILES shared across roles" invariant.
class RoleRegistry {
public:
  void add(const std::string &smiles, SplitRole role, const std::filesystem::path &path,
           std::size_t line) {
    auto [it, inserted] = roles_.emplace(smiles, role);
    if (!inserted && it->second != role) {
      throw DataError(where(path, line) + "'" + smiles + "' appears in both "
                      + to_string(it->second) + " and " + to_string(role));
    }
  }

private:
  std::unordered_map<std::string, SplitRole> roles_;
};

}  // namespace

AtomDataset load_atom_dataset(const std::filesystem::path &path, std::uint64_t split_seed) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open atom dataset " + path.string());

  AtomDataset data;
  RoleRegistry roles;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (trim(line).empty())
      continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error &e) {
      throw DataError(where(path, line_no) + "invalid JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("smiles") || !j["smiles"].is_string())
      throw DataError(where(path, line_no) + "record needs a string \"smiles\" field");
    for (const auto &item: j.items()) {
      if (item.key() != "smiles" && item.key() != "atom_props" && item.key() != "split")
        throw DataError(where(path, line_no) + "unknown field '" + item.key() + "'");
    }

    AtomRecord rec;
    rec.smiles = j["smiles"].get<std::string>();
    rec.graph = parse_record_smiles(rec.smiles, path, line_no);
    if (!j.contains("atom_props") || !j["atom_props"].is_object())
      throw DataError(where(path, line_no) + "record needs an \"atom_props\" object");
    for (const auto &prop: j["atom_props"].items()) {
      const std::string &key = prop.key();
      if (std::find(kAtomTaskNames.begin(), kAtomTaskNames.end(), key) == kAtomTaskNames.end())
        throw DataError(where(path, line_no) + "unknown property key '" + key + "'");
      if (!prop.value().is_array())
        throw DataError(where(path, line_no) + "property '" + key + "' must be an array");
      std::vector<double> values;
      for (const auto &v: prop.value()) {
        if (!v.is_number())
          throw DataError(where(path, line_no) + "property '" + key + "' holds a non-number");
        values.push_back(v.get<double>());
        if (!std::isfinite(values.back()))
          throw DataError(where(path, line_no) + "property '" + key + "' is not finite");
      }
      if (static_cast<int>(values.size()) != rec.graph.num_atoms()) {
        throw DataError(where(path, line_no) + "length mismatch for '" + key + "': "
                        + std::to_string(values.size()) + " values for "
                        + std::to_string(rec.graph.num_atoms()) + " atoms in " + rec.smiles);
      }
      rec.props.emplace(key, std::move(values));
    }
    if (j.contains("split")) {
      if (!j["split"].is_string())
        throw DataError(where(path, line_no) + "\"split\" must be a string");
      rec.split = split_role_from_string(j["split"].get<std::string>());
    } else {
      rec.split = hash_split(rec.smiles, split_seed);
    }
    roles.add(rec.smiles, rec.split, path, line_no);
    data[rec.split].push_back(std::move(rec));
  }
  if (data.size() == 0)
    throw DataError(path.string() + ": no records");
  return data;
}

MolDataset load_mol_dataset(const std::filesystem::path &path, std::uint64_t split_seed) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot open molecule dataset " + path.string());

  std::string header;
  if (!std::getline(in, header))
    throw DataError(path.string() + ": no records");
  const std::vector<std::string> columns = split_csv(header);
  const bool has_split = columns.size() == 3 && columns[2] == "split";
  if (columns.size() < 2 || columns[0] != "smiles" || columns[1] != "target"
      || (columns.size() == 3 && !has_split) || columns.size() > 3) {
    throw DataError(path.string() + ": header must be 'smiles,target[,split]'");
  }

  MolDataset data;
  RoleRegistry roles;
  std::size_t line_no = 1;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (trim(line).empty())
      continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != columns.size()) {
      throw DataError(where(path, line_no) + "expected " + std::to_string(columns.size())
                      + " fields, found " + std::to_string(fields.size()));
    }
    MolRecord rec;
    rec.smiles = fields[0];
    rec.graph = parse_record_smiles(rec.smiles, path, line_no);
    const std::string &text = fields[1];
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), rec.target);
    if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(rec.target))
      throw DataError(where(path, line_no) + "invalid target '" + text + "'");
    rec.split = has_split ? split_role_from_string(fields[2]) : hash_split(rec.smiles, split_seed);
    roles.add(rec.smiles, rec.split, path, line_no);
    data[rec.split].push_back(std::move(rec));
  }
  if (data.size() == 0)
    throw DataError(path.string() + ": no records");
  return data;
}

}  // namespace molshift
