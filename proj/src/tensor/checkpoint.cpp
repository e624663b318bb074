//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molshift/tensor/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>

namespace molshift::tensor {
namespace {

template <typename T>
void put_le(std::ostream &os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char *>(bytes), sizeof(T));
}

template <typename T>
bool get_le(std::istream &is, T &value) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char *>(bytes), sizeof(T)))
    return false;
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(bytes, bytes + sizeof(T));
  std::memcpy(&value, bytes, sizeof(T));
  return true;
}

}  // namespace

void write_records(const std::filesystem::path &path,
                   const std::vector<TensorRecord> &records) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os)
    throw DataError("cannot open " + path.string() + " for writing");
  os.write(kCheckpointMagic, sizeof(kCheckpointMagic) - 1);

  for (const TensorRecord &rec: records) {
    std::uint64_t count = 1;
    for (std::uint64_t d: rec.shape)
      count *= d;
    if (count != rec.data.size())
      throw std::invalid_argument("record '" + rec.name + "': shape does not match data");

    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(rec.name.size()));
    os.write(rec.name.data(), static_cast<std::streamsize>(rec.name.size()));
    put_le<std::uint8_t>(os, static_cast<std::uint8_t>(rec.dtype));
    put_le<std::uint32_t>(os, static_cast<std::uint32_t>(rec.shape.size()));
    for (std::uint64_t d: rec.shape)
      put_le<std::uint64_t>(os, d);
    for (double v: rec.data) {
      if (rec.dtype == DType::kFloat32)
        put_le<float>(os, static_cast<float>(v));
      else
        put_le<double>(os, v);
    }
  }
  if (!os)
    throw DataError("failed writing " + path.string());
}

std::vector<TensorRecord> read_records(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw DataError("cannot open checkpoint " + path.string());

  char magic[sizeof(kCheckpointMagic) - 1];
  if (!is.read(magic, sizeof(magic))
      || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw DataError(path.string() + ": not a checkpoint (bad magic)");
  }

  auto truncated = [&path](const std::string &what) {
    return DataError(path.string() + ": truncated checkpoint while reading " + what);
  };

  std::vector<TensorRecord> records;
  std::uint32_t name_len = 0;
  while (get_le(is, name_len)) {
    TensorRecord rec;
    rec.name.resize(name_len);
    if (!is.read(rec.name.data(), name_len))
      throw truncated("record name");

    std::uint8_t dtype = 0;
    std::uint32_t rank = 0;
    if (!get_le(is, dtype) || !get_le(is, rank))
      throw truncated("header of '" + rec.name + "'");
    if (dtype != 1 && dtype != 2)
      throw DataError(path.string() + ": unknown dtype tag " + std::to_string(dtype));
    rec.dtype = static_cast<DType>(dtype);

    std::uint64_t count = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      std::uint64_t d = 0;
      if (!get_le(is, d))
        throw truncated("shape of '" + rec.name + "'");
      rec.shape.push_back(d);
      count *= d;
    }
    rec.data.resize(count);
    for (std::uint64_t k = 0; k < count; ++k) {
      bool ok = false;
      if (rec.dtype == DType::kFloat32) {
        float f = 0;
        ok = get_le(is, f);
        rec.data[k] = f;
      } else {
        ok = get_le(is, rec.data[k]);
      }
      if (!ok)
        throw truncated("payload of '" + rec.name + "'");
    }
    records.push_back(std::move(rec));
  }
  if (is.gcount() != 0)
    throw truncated("record header");
  if (!is.eof())
    throw DataError("failed reading " + path.string());
  return records;
}

}  // namespace molshift::tensor
