//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLSHIFT_TENSOR_CHECKPOINT_HPP_
#define MOLSHIFT_TENSOR_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "molshift/errors.hpp"
#include "molshift/tensor/optim.hpp"
#include "molshift/tensor/tape.hpp"

// Checkpoint container:
//
//   "MSHIFT1"                                  7-byte magic
//   repeated until end of file:
//     u32 name length, UTF-8 name bytes
//     u8  dtype (1 = float32, 2 = float64)
//     u32 rank, then rank x u64 dimensions
//     row-major payload, little-endian
//
// Optimizer state lives under the "opt/" prefix: "opt/step", "opt/lr",
// "opt/beta1", "opt/beta2", "opt/eps" and "opt/m/<param>", "opt/v/<param>".
namespace molshift::tensor {

inline constexpr char kCheckpointMagic[] = "MSHIFT1";

enum class DType: std::uint8_t {
  kFloat32 = 1,
  kFloat64 = 2,
};

struct TensorRecord {
  std::string name;
  DType dtype = DType::kFloat32;
  std::vector<std::uint64_t> shape;
  std::vector<double> data;
};

void write_records(const std::filesystem::path &path,
                   const std::vector<TensorRecord> &records);

std::vector<TensorRecord> read_records(const std::filesystem::path &path);

template <typename Scalar>
constexpr DType dtype_of() {
  static_assert(std::is_same_v<Scalar, float> || std::is_same_v<Scalar, double>);
  return std::is_same_v<Scalar, float> ? DType::kFloat32 : DType::kFloat64;
}

template <typename Scalar>
TensorRecord to_record(std::string name, const Matrix<Scalar> &m) {
  TensorRecord rec;
  rec.name = std::move(name);
  rec.dtype = dtype_of<Scalar>();
  rec.shape = { static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols()) };
  rec.data.assign(m.data(), m.data() + m.size());
  return rec;
}

// Rank-0 and rank-1 records load as 1 x 1 and 1 x n.
template <typename Scalar>
Matrix<Scalar> to_matrix(const TensorRecord &rec) {
  Eigen::Index rows = 1, cols = 1;
  if (rec.shape.size() == 1) {
    cols = static_cast<Eigen::Index>(rec.shape[0]);
  } else if (rec.shape.size() == 2) {
    rows = static_cast<Eigen::Index>(rec.shape[0]);
    cols = static_cast<Eigen::Index>(rec.shape[1]);
  } else if (!rec.shape.empty()) {
    throw DataError("record '" + rec.name + "' has unsupported rank "
                    + std::to_string(rec.shape.size()));
  }
  Matrix<Scalar> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i)
    m.data()[i] = static_cast<Scalar>(rec.data[static_cast<std::size_t>(i)]);
  return m;
}

template <typename Scalar>
struct Checkpoint {
  ParamStore<Scalar> params;
  std::optional<AdamState<Scalar>> optimizer;
};

template <typename Scalar>
void save_checkpoint(const std::filesystem::path &path, const ParamStore<Scalar> &params,
                     const AdamState<Scalar> *optimizer = nullptr) {
  std::vector<TensorRecord> records;
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params.name(i).rfind("opt/", 0) == 0)
      throw std::invalid_argument("parameter names may not start with 'opt/'");
    records.push_back(to_record<Scalar>(params.name(i), params.value(i)));
  }
  if (optimizer != nullptr) {
    auto scalar = [](std::string name, double value) {
      Matrix<double> m(1, 1);
      m(0, 0) = value;
      return to_record<double>(std::move(name), m);
    };
    records.push_back(scalar("opt/step", static_cast<double>(optimizer->step)));
    records.push_back(scalar("opt/lr", optimizer->lr));
    records.push_back(scalar("opt/beta1", optimizer->beta1));
    records.push_back(scalar("opt/beta2", optimizer->beta2));
    records.push_back(scalar("opt/eps", optimizer->eps));
    for (std::size_t i = 0; i < params.size(); ++i) {
      records.push_back(to_record<Scalar>("opt/m/" + params.name(i), optimizer->m[i]));
      records.push_back(to_record<Scalar>("opt/v/" + params.name(i), optimizer->v[i]));
    }
  }
  write_records(path, records);
}

template <typename Scalar>
Checkpoint<Scalar> load_checkpoint(const std::filesystem::path &path) {
  const std::vector<TensorRecord> records = read_records(path);
  Checkpoint<Scalar> ckpt;
  std::map<std::string, const TensorRecord *> opt;
  for (const TensorRecord &rec: records) {
    if (rec.name.rfind("opt/", 0) == 0)
      opt.emplace(rec.name, &rec);
    else
      ckpt.params.add(rec.name, to_matrix<Scalar>(rec));
  }
  if (opt.empty())
    return ckpt;

  auto scalar = [&](const std::string &name) {
    auto it = opt.find(name);
    if (it == opt.end())
      throw DataError(path.string() + ": optimizer record '" + name + "' missing");
    return it->second->data.at(0);
  };
  AdamState<Scalar> state;
  state.step = static_cast<std::int64_t>(scalar("opt/step"));
  state.lr = scalar("opt/lr");
  state.beta1 = scalar("opt/beta1");
  state.beta2 = scalar("opt/beta2");
  state.eps = scalar("opt/eps");
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
    for (const char *kind: { "opt/m/", "opt/v/" }) {
      auto it = opt.find(kind + ckpt.params.name(i));
      if (it == opt.end())
        throw DataError(path.string() + ": no optimizer moment for '" + ckpt.params.name(i) + "'");
      Matrix<Scalar> moment = to_matrix<Scalar>(*it->second);
      if (moment.rows() != ckpt.params.value(i).rows()
          || moment.cols() != ckpt.params.value(i).cols()) {
        throw DataError(path.string() + ": optimizer moment shape mismatch for '"
                        + ckpt.params.name(i) + "'");
      }
      (kind[4] == 'm' ? state.m : state.v).push_back(std::move(moment));
    }
  }
  ckpt.optimizer = std::move(state);
  return ckpt;
}

}  // namespace molshift::tensor

#endif  // MOLSHIFT_TENSOR_CHECKPOINT_HPP_
