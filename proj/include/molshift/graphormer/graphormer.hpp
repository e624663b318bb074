//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLSHIFT_GRAPHORMER_GRAPHORMER_HPP_
#define MOLSHIFT_GRAPHORMER_GRAPHORMER_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "molshift/errors.hpp"
#include "molshift/graphormer/config.hpp"
#include "molshift/molgraph/encode.hpp"
#include "molshift/tensor/checkpoint.hpp"
#include "molshift/tensor/ops.hpp"
#include "molshift/tensor/optim.hpp"
#include "molshift/tensor/tape.hpp"

// Graph transformer over EncodedGraph inputs.
//
// Node inputs are atom-type plus centrality embeddings; the optional task
// node contributes its task embedding alone. Every layer is a pre-norm block
//
//   x += Dropout(Attn(LN(x)) with per-head spatial bias on the logits)
//   x += Dropout(FFN(LN(x))),  FFN = Linear(4h) -> GELU -> Linear(h)
//
// followed by a final layer norm and one scalar head shared by all tasks.
// A single spatial bias table (buckets x heads) serves every layer.
namespace molshift {

enum class ParamInit {
  kEmbedding,
  kXavier,
  kZero,
  kOne,
};

struct ParamSpec {
  std::string name;
  int rows;
  int cols;
  ParamInit init;
};

inline std::string layer_param(int layer, const char *suffix) {
  return "layer" + std::to_string(layer) + "." + suffix;
}

// Every parameter of a model with this config, in storage order.
inline std::vector<ParamSpec> parameter_specs(const ModelConfig &c) {
  const int h = c.hidden_dim, f = c.ffn_dim();
  std::vector<ParamSpec> specs = {
    { "embed.atom", c.atom_vocab_size, h, ParamInit::kEmbedding },
    { "embed.centrality", c.centrality_buckets, h, ParamInit::kEmbedding },
    { "embed.task", c.num_tasks, h, ParamInit::kEmbedding },
    { "spatial.bias", c.spd_buckets, c.num_heads, ParamInit::kEmbedding },
  };
  for (int l = 1; l <= c.num_layers; ++l) {
    specs.push_back({ layer_param(l, "ln1.gamma"), 1, h, ParamInit::kOne });
    specs.push_back({ layer_param(l, "ln1.beta"), 1, h, ParamInit::kZero });
    for (const char *proj: { "q", "k", "v", "o" }) {
      specs.push_back({ layer_param(l, (std::string("attn.w") + proj).c_str()), h, h,
                        ParamInit::kXavier });
      specs.push_back({ layer_param(l, (std::string("attn.b") + proj).c_str()), 1, h,
                        ParamInit::kZero });
    }
    specs.push_back({ layer_param(l, "ln2.gamma"), 1, h, ParamInit::kOne });
    specs.push_back({ layer_param(l, "ln2.beta"), 1, h, ParamInit::kZero });
    specs.push_back({ layer_param(l, "ffn.w1"), h, f, ParamInit::kXavier });
    specs.push_back({ layer_param(l, "ffn.b1"), 1, f, ParamInit::kZero });
    specs.push_back({ layer_param(l, "ffn.w2"), f, h, ParamInit::kXavier });
    specs.push_back({ layer_param(l, "ffn.b2"), 1, h, ParamInit::kZero });
  }
  specs.push_back({ "final_ln.gamma", 1, h, ParamInit::kOne });
  specs.push_back({ "final_ln.beta", 1, h, ParamInit::kZero });
  specs.push_back({ "head.w", h, 1, ParamInit::kXavier });
  specs.push_back({ "head.b", 1, 1, ParamInit::kZero });
  return specs;
}

template <typename Scalar>
tensor::Matrix<Scalar> initial_value(const ParamSpec &spec, std::mt19937_64 &rng) {
  using Mat = tensor::Matrix<Scalar>;
  switch (spec.init) {
  case ParamInit::kEmbedding: return tensor::normal_init<Scalar>(spec.rows, spec.cols, 0.02, rng);
  case ParamInit::kXavier: return tensor::xavier_uniform<Scalar>(spec.rows, spec.cols, rng);
  case ParamInit::kZero: return Mat::Zero(spec.rows, spec.cols);
  case ParamInit::kOne: return Mat::Ones(spec.rows, spec.cols);
  }
  throw std::logic_error("unhandled parameter init");
}

// Xavier-uniform weights, N(0, 0.02) embeddings and spatial bias, zero
// biases, unit layer-norm gains. Deterministic in `seed`.
template <typename Scalar>
tensor::ParamStore<Scalar> init_params(const ModelConfig &config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  tensor::ParamStore<Scalar> store;
  for (const ParamSpec &spec: parameter_specs(config))
    store.add(spec.name, initial_value<Scalar>(spec, rng));
  return store;
}

// Throws DataError unless `store` holds exactly the parameters of `config`.
template <typename Scalar>
void check_params(const tensor::ParamStore<Scalar> &store, const ModelConfig &config) {
  const std::vector<ParamSpec> specs = parameter_specs(config);
  if (store.size() != specs.size()) {
    throw DataError("parameter count " + std::to_string(store.size())
                    + " does not match model config (" + std::to_string(specs.size()) + ")");
  }
  for (const ParamSpec &spec: specs) {
    auto index = store.find(spec.name);
    if (!index)
      throw DataError("checkpoint lacks parameter '" + spec.name + "'");
    const auto &value = store.value(*index);
    if (value.rows() != spec.rows || value.cols() != spec.cols) {
      throw DataError("parameter '" + spec.name + "' is " + tensor::shape_string(value)
                      + ", config expects [" + std::to_string(spec.rows) + "x"
                      + std::to_string(spec.cols) + "]");
    }
  }
}

/// Copies encoder and head weights from a model trained under `source` into
/// a model for `target`, which may declare different tasks. The task
/// embedding table is always freshly initialized.
template <typename Scalar>
tensor::ParamStore<Scalar> transfer_params(const tensor::ParamStore<Scalar> &source,
                                           const ModelConfig &source_config,
                                           const ModelConfig &target_config,
                                           std::uint64_t seed) {
  target_config.validate();
  if (!source_config.same_encoder(target_config))
    throw DataError("checkpoint encoder config does not match the requested model config");
  check_params(source, source_config);
  std::mt19937_64 rng(seed);
  tensor::ParamStore<Scalar> out;
  for (const ParamSpec &spec: parameter_specs(target_config)) {
    if (spec.name == "embed.task")
      out.add(spec.name, initial_value<Scalar>(spec, rng));
    else
      out.add(spec.name, source[spec.name]);
  }
  return out;
}

template <typename Scalar>
struct ForwardOptions {
  // 1-based layer whose output rows for real atoms are returned as well.
  std::optional<int> capture_layer;
  // Enables dropout when non-null; inference leaves it unset.
  std::mt19937_64 *dropout_rng = nullptr;
};

template <typename Scalar>
struct ForwardResult {
  tensor::Var<Scalar> node_states;
  std::optional<tensor::Var<Scalar>> captured;
};

namespace internal {

inline void check_encoding(const EncodedGraph &enc, const ModelConfig &config) {
  if (enc.d_max != config.d_max) {
    throw std::invalid_argument("graph encoded with d_max " + std::to_string(enc.d_max)
                                + " but model expects " + std::to_string(config.d_max));
  }
  if (enc.spd.rows() != enc.num_nodes() || enc.spd.cols() != enc.num_nodes())
    throw std::invalid_argument("distance matrix does not match node count");
}

inline std::vector<int> iota_ids(int n) {
  std::vector<int> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

template <typename Scalar>
tensor::Var<Scalar> dropout(const tensor::Var<Scalar> &x, double rate, std::mt19937_64 *rng) {
  if (rng == nullptr || rate <= 0.0)
    return x;
  std::bernoulli_distribution keep(1.0 - rate);
  const Scalar scale = static_cast<Scalar>(1.0 / (1.0 - rate));
  tensor::Matrix<Scalar> mask(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i)
    mask.data()[i] = keep(*rng) ? scale : Scalar(0);
  return tensor::mul_constant(x, std::move(mask));
}

template <typename Scalar>
tensor::Var<Scalar> linear(tensor::Tape<Scalar> &tape, const tensor::ParamStore<Scalar> &store,
                           const tensor::Var<Scalar> &x, const std::string &w,
                           const std::string &b) {
  return tensor::add_row(tensor::matmul(x, tape.parameter(store, w)), tape.parameter(store, b));
}

}  // namespace internal

/// Input node features: atom rows are atom-type plus centrality embeddings,
/// the task row (last, when present) is the task embedding alone.
template <typename Scalar>
tensor::Var<Scalar> embed_nodes(tensor::Tape<Scalar> &tape,
                                const tensor::ParamStore<Scalar> &store,
                                const ModelConfig &config, const EncodedGraph &enc) {
  for (int id: enc.atom_type_ids) {
    if (id < 0 || id >= config.atom_vocab_size)
      throw std::out_of_range("atom type id " + std::to_string(id) + " out of range");
  }
  for (int c: enc.centrality) {
    if (c < 0 || c >= config.centrality_buckets)
      throw std::out_of_range("centrality " + std::to_string(c) + " out of range");
  }
  if (enc.centrality.size() != enc.atom_type_ids.size())
    throw std::invalid_argument("centrality and atom type lists differ in length");

  tensor::Var<Scalar> x =
      tensor::add(tensor::gather_rows(tape.parameter(store, "embed.atom"), enc.atom_type_ids),
                  tensor::gather_rows(tape.parameter(store, "embed.centrality"),
                                      enc.centrality));
  if (!enc.task_id)
    return x;
  if (*enc.task_id < 0 || *enc.task_id >= config.num_tasks)
    throw std::out_of_range("task id " + std::to_string(*enc.task_id) + " out of range");
  tensor::Var<Scalar> task = tensor::gather_rows(tape.parameter(store, "embed.task"),
                                                 std::vector<int> { *enc.task_id });
  return tensor::concat_rows<Scalar>({ x, task });
}

// One n x n additive logit bias per head, looked up from the spd buckets.
template <typename Scalar>
std::vector<tensor::Var<Scalar>> attention_bias(tensor::Tape<Scalar> &tape,
                                                const tensor::ParamStore<Scalar> &store,
                                                const ModelConfig &config,
                                                const EncodedGraph &enc) {
  tensor::Var<Scalar> table = tape.parameter(store, "spatial.bias");
  std::vector<tensor::Var<Scalar>> bias;
  bias.reserve(static_cast<std::size_t>(config.num_heads));
  for (int h = 0; h < config.num_heads; ++h)
    bias.push_back(tensor::lookup_grid(table, enc.spd, h));
  return bias;
}

/// Runs the encoder. `node_states` are the final-layer-normed states of all
/// nodes; `captured` holds the real-atom rows emitted by the residual block
/// of `options.capture_layer`.
template <typename Scalar>
ForwardResult<Scalar> forward(tensor::Tape<Scalar> &tape,
                              const tensor::ParamStore<Scalar> &store,
                              const ModelConfig &config, const EncodedGraph &enc,
                              const ForwardOptions<Scalar> &options = {}) {
  using tensor::Var;
  internal::check_encoding(enc, config);
  if (options.capture_layer
      && (*options.capture_layer < 1 || *options.capture_layer > config.num_layers)) {
    throw std::out_of_range("capture layer " + std::to_string(*options.capture_layer)
                            + " outside 1.." + std::to_string(config.num_layers));
  }

  const int dh = config.head_dim();
  const Scalar inv_sqrt_dh = Scalar(1) / std::sqrt(static_cast<Scalar>(dh));
  const std::vector<Var<Scalar>> bias = attention_bias(tape, store, config, enc);

  ForwardResult<Scalar> result;
  Var<Scalar> x = embed_nodes(tape, store, config, enc);
  for (int l = 1; l <= config.num_layers; ++l) {
    auto p = [&](const char *suffix) { return tape.parameter(store, layer_param(l, suffix)); };
    auto lin = [&](const Var<Scalar> &in, const char *w, const char *b) {
      return internal::linear(tape, store, in, layer_param(l, w), layer_param(l, b));
    };

    Var<Scalar> h = tensor::layer_norm(x, p("ln1.gamma"), p("ln1.beta"));
    Var<Scalar> q = lin(h, "attn.wq", "attn.bq");
    Var<Scalar> k = lin(h, "attn.wk", "attn.bk");
    Var<Scalar> v = lin(h, "attn.wv", "attn.bv");
    std::vector<Var<Scalar>> heads;
    for (int head = 0; head < config.num_heads; ++head) {
      const Eigen::Index start = static_cast<Eigen::Index>(head) * dh;
      Var<Scalar> logits = tensor::scale(
          tensor::matmul(tensor::slice_cols(q, start, dh),
                         tensor::transpose(tensor::slice_cols(k, start, dh))),
          inv_sqrt_dh);
      Var<Scalar> attn = tensor::softmax_rows(tensor::add(logits, bias[head]));
      heads.push_back(tensor::matmul(attn, tensor::slice_cols(v, start, dh)));
    }
    Var<Scalar> attn_out = lin(tensor::concat_cols(heads), "attn.wo", "attn.bo");
    x = tensor::add(x, internal::dropout(attn_out, config.dropout_rate, options.dropout_rng));

    Var<Scalar> h2 = tensor::layer_norm(x, p("ln2.gamma"), p("ln2.beta"));
    Var<Scalar> ffn = lin(tensor::gelu(lin(h2, "ffn.w1", "ffn.b1")), "ffn.w2", "ffn.b2");
    x = tensor::add(x, internal::dropout(ffn, config.dropout_rate, options.dropout_rng));

    if (options.capture_layer == l)
      result.captured = tensor::gather_rows(x, internal::iota_ids(enc.num_atoms()));
  }
  result.node_states = tensor::layer_norm(x, tape.parameter(store, "final_ln.gamma"),
                                          tape.parameter(store, "final_ln.beta"));
  return result;
}

namespace internal {

template <typename Scalar>
tensor::Var<Scalar> head(tensor::Tape<Scalar> &tape, const tensor::ParamStore<Scalar> &store,
                         const tensor::Var<Scalar> &rows) {
  return linear(tape, store, rows, "head.w", "head.b");
}

inline void require_task(const EncodedGraph &enc, const ModelConfig &config) {
  if (!enc.task_id)
    throw std::invalid_argument("prediction needs a graph encoded with a task node");
  if (*enc.task_id < 0 || *enc.task_id >= config.num_tasks)
    throw std::out_of_range("task id " + std::to_string(*enc.task_id) + " out of range");
}

}  // namespace internal

// Shared head on each real atom's final state; num_atoms x 1.
template <typename Scalar>
tensor::Var<Scalar> predict_atom_level(tensor::Tape<Scalar> &tape,
                                       const tensor::ParamStore<Scalar> &store,
                                       const ModelConfig &config, const EncodedGraph &enc,
                                       const ForwardOptions<Scalar> &options = {}) {
  internal::require_task(enc, config);
  if (config.head_kinds[static_cast<std::size_t>(*enc.task_id)] != HeadKind::kRegression)
    throw std::invalid_argument("atom-level prediction needs a regression task");
  ForwardResult<Scalar> out = forward(tape, store, config, enc, options);
  return internal::head(
      tape, store, tensor::gather_rows(out.node_states, internal::iota_ids(enc.num_atoms())));
}

// Shared head on the task node's final state; 1 x 1 (a logit for binary tasks).
template <typename Scalar>
tensor::Var<Scalar> predict_graph_level(tensor::Tape<Scalar> &tape,
                                        const tensor::ParamStore<Scalar> &store,
                                        const ModelConfig &config, const EncodedGraph &enc,
                                        const ForwardOptions<Scalar> &options = {}) {
  internal::require_task(enc, config);
  ForwardResult<Scalar> out = forward(tape, store, config, enc, options);
  return internal::head(tape, store,
                        tensor::gather_rows(out.node_states, std::vector<int> { enc.num_atoms() }));
}

// Inference conveniences that own their tape.

template <typename Scalar>
tensor::Matrix<Scalar> infer_atom_level(const tensor::ParamStore<Scalar> &store,
                                        const ModelConfig &config, const EncodedGraph &enc) {
  tensor::Tape<Scalar> tape;
  return predict_atom_level(tape, store, config, enc).value();
}

template <typename Scalar>
Scalar infer_graph_level(const tensor::ParamStore<Scalar> &store, const ModelConfig &config,
                         const EncodedGraph &enc) {
  tensor::Tape<Scalar> tape;
  return predict_graph_level(tape, store, config, enc).value()(0, 0);
}

template <typename Scalar>
tensor::Matrix<Scalar> capture_features(const tensor::ParamStore<Scalar> &store,
                                        const ModelConfig &config, const EncodedGraph &enc,
                                        int layer = 1) {
  tensor::Tape<Scalar> tape;
  ForwardOptions<Scalar> options;
  options.capture_layer = layer;
  return forward(tape, store, config, enc, options).captured->value();
}

// A model on disk: `<dir>/model.ckpt` next to `<dir>/config.json`.
template <typename Scalar>
struct SavedModel {
  ModelConfig config;
  tensor::ParamStore<Scalar> params;
  std::optional<tensor::AdamState<Scalar>> optimizer;
};

inline std::filesystem::path checkpoint_file(const std::filesystem::path &model_dir) {
  return model_dir / "model.ckpt";
}

template <typename Scalar>
void save_model(const std::filesystem::path &model_dir, const ModelConfig &config,
                const tensor::ParamStore<Scalar> &params,
                const tensor::AdamState<Scalar> *optimizer = nullptr) {
  check_params(params, config);
  std::filesystem::create_directories(model_dir);
  save_model_config(model_dir / "config.json", config);
  tensor::save_checkpoint(checkpoint_file(model_dir), params, optimizer);
}

// Accepts the model directory or the checkpoint file inside it.
template <typename Scalar>
SavedModel<Scalar> load_model(const std::filesystem::path &path) {
  const std::filesystem::path dir =
      std::filesystem::is_directory(path) ? path : path.parent_path();
  const std::filesystem::path ckpt =
      std::filesystem::is_directory(path) ? checkpoint_file(path) : path;
  SavedModel<Scalar> model;
  model.config = load_model_config(dir / "config.json");
  tensor::Checkpoint<Scalar> loaded = tensor::load_checkpoint<Scalar>(ckpt);
  check_params(loaded.params, model.config);
  model.params = std::move(loaded.params);
  model.optimizer = std::move(loaded.optimizer);
  return model;
}

}  // namespace molshift

#endif  // MOLSHIFT_GRAPHORMER_GRAPHORMER_HPP_
