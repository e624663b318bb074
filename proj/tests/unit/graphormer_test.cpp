//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "molshift/graphormer/config.hpp"
#include "molshift/graphormer/graphormer.hpp"
#include "molshift/molgraph/encode.hpp"
#include "molshift/molgraph/smiles.hpp"
#include "molshift/tensor/gradcheck.hpp"

namespace molshift {
namespace {

using tensor::Matrix;
using tensor::ParamStore;
using tensor::Tape;
using tensor::Var;

std::vector<std::string> read_lines(const std::string &name) {
  std::ifstream in(std::string(MOLSHIFT_TEST_DATA_DIR) + "/" + name);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty())
      lines.push_back(line);
  }
  return lines;
}

EncodedGraph encode_smiles(const std::string &smiles, int d_max = kDefaultMaxDistance,
                           std::optional<int> task = 0) {
  return encode(parse_smiles(smiles), AtomVocab::organic(), d_max, task);
}

ModelConfig small_config(int tasks = 1, int layers = 2, int hidden = 16, int heads = 4,
                         int d_max = kDefaultMaxDistance) {
  return make_model_config(hidden, layers, heads, d_max,
                           std::vector<HeadKind>(tasks, HeadKind::kRegression), 0.0);
}

TEST(ModelConfig, DefaultsAreValid) {
  ModelConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.hidden_dim, 64);
  EXPECT_EQ(c.num_layers, 4);
  EXPECT_EQ(c.num_heads, 4);
  EXPECT_DOUBLE_EQ(c.dropout_rate, 0.1);
  EXPECT_EQ(c.spd_buckets, c.d_max + 3);
}

TEST(ModelConfig, RejectsInconsistentFields) {
  ModelConfig c;
  c.num_heads = 5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = ModelConfig();
  c.num_tasks = 0;
  c.head_kinds.clear();
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = ModelConfig();
  c.spd_buckets = 7;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(ModelConfig, JsonRoundTrip) {
  ModelConfig c = make_model_config(32, 3, 2, 4, { HeadKind::kRegression, HeadKind::kBinary });
  EXPECT_EQ(model_config_from_json(to_json(c)), c);

  nlohmann::json j = to_json(c);
  j["extra"] = 1;
  EXPECT_THROW(model_config_from_json(j), DataError);
  j = to_json(c);
  j.erase("num_heads");
  EXPECT_THROW(model_config_from_json(j), DataError);
}

TEST(Params, InitMatchesSpecsAndIsSeeded) {
  const ModelConfig c = small_config();
  ParamStore<float> a = init_params<float>(c, 3);
  ParamStore<float> b = init_params<float>(c, 3);
  ParamStore<float> other = init_params<float>(c, 4);
  EXPECT_NO_THROW(check_params(a, c));
  EXPECT_EQ(a["layer1.attn.wq"], b["layer1.attn.wq"]);
  EXPECT_NE(a["layer1.attn.wq"], other["layer1.attn.wq"]);
  EXPECT_TRUE((a["layer2.ln1.gamma"].array() == 1.0f).all());
  EXPECT_TRUE((a["head.b"].array() == 0.0f).all());
  EXPECT_EQ(a["spatial.bias"].rows(), c.spd_buckets);
  EXPECT_EQ(a["spatial.bias"].cols(), c.num_heads);
  EXPECT_EQ(a["embed.centrality"].rows(), kMaxCentrality + 1);

  EXPECT_THROW(check_params(a, small_config(1, 3)), DataError);
}

TEST(EmbedNodes, ZeroTablesGiveZeros) {
  const ModelConfig c = small_config();
  ParamStore<double> p = init_params<double>(c, 1);
  p["embed.atom"].setZero();
  p["embed.centrality"].setZero();
  p["embed.task"].setZero();
  Tape<double> tape;
  Var<double> x = embed_nodes(tape, p, c, encode_smiles("CC(=O)N"));
  EXPECT_EQ(x.rows(), 5);
  EXPECT_TRUE((x.value().array() == 0.0).all());
}

TEST(EmbedNodes, BenzeneRowsIdentical) {
  const ModelConfig c = small_config();
  ParamStore<double> p = init_params<double>(c, 1);
  Tape<double> tape;
  Var<double> x = embed_nodes(tape, p, c, encode_smiles("c1ccccc1"));
  ASSERT_EQ(x.rows(), 7);
  for (int i = 1; i < 6; ++i)
    EXPECT_EQ(x.value().row(i), x.value().row(0));
  EXPECT_EQ(x.value().row(6), p["embed.task"].row(0));
  EXPECT_EQ(x.value().row(0), p["embed.atom"].row(2) + p["embed.centrality"].row(3));
}

TEST(EmbedNodes, OutOfRangeIds) {
  const ModelConfig c = small_config();
  ParamStore<double> p = init_params<double>(c, 1);
  EncodedGraph enc = encode_smiles("CO");
  enc.atom_type_ids[0] = c.atom_vocab_size;
  Tape<double> tape;
  EXPECT_THROW(embed_nodes(tape, p, c, enc), std::out_of_range);
  enc = encode_smiles("CO", kDefaultMaxDistance, 3);
  EXPECT_THROW(embed_nodes(tape, p, c, enc), std::out_of_range);
}

TEST(AttentionBias, LooksUpPerHeadBuckets) {
  const ModelConfig c = small_config(1, 1, 8, 2, 2);
  ParamStore<double> p = init_params<double>(c, 5);
  const EncodedGraph enc = encode_smiles("CCCCCC", 2);
  Tape<double> tape;
  auto bias = attention_bias(tape, p, c, enc);
  ASSERT_EQ(bias.size(), 2u);
  for (int h = 0; h < 2; ++h) {
    const auto &b = bias[h].value();
    EXPECT_EQ(b, b.transpose());
    // (0,4) and (1,5) are both beyond d_max = 2.
    EXPECT_EQ(b(0, 4), b(1, 5));
    EXPECT_EQ(b(0, 4), p["spatial.bias"](enc.far_bucket(), h));
    EXPECT_EQ(b(0, 6), p["spatial.bias"](enc.task_bucket(), h));
    EXPECT_EQ(b(2, 3), p["spatial.bias"](1, h));
  }
  p["spatial.bias"].setZero();
  Tape<double> tape2;
  for (const auto &b: attention_bias(tape2, p, c, enc))
    EXPECT_TRUE((b.value().array() == 0.0).all());
}

TEST(Forward, PermutationInvarianceAndEquivariance) {
  const ModelConfig c = make_model_config(32, 2, 4, kDefaultMaxDistance,
                                          { HeadKind::kRegression }, 0.0);
  const ParamStore<float> p = init_params<float>(c, 11);
  const std::vector<std::string> corpus = read_lines("corpus_smiles.txt");
  std::mt19937_64 rng(2026);
  float worst_graph = 0.0f, worst_atom = 0.0f;
  for (int trial = 0; trial < 100; ++trial) {
    const EncodedGraph enc = encode_smiles(corpus[trial % corpus.size()]);
    std::vector<int> order(static_cast<std::size_t>(enc.num_atoms()));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const EncodedGraph perm = permute_atoms(enc, order);

    worst_graph = std::max(worst_graph, std::abs(infer_graph_level(p, c, enc)
                                                 - infer_graph_level(p, c, perm)));
    const Matrix<float> atoms = infer_atom_level(p, c, enc);
    const Matrix<float> patoms = infer_atom_level(p, c, perm);
    for (int i = 0; i < enc.num_atoms(); ++i)
      worst_atom = std::max(worst_atom, std::abs(patoms(i, 0) - atoms(order[i], 0)));
  }
  EXPECT_LT(worst_graph, 1e-5f);
  EXPECT_LT(worst_atom, 1e-5f);
}

TEST(Forward, GradientMatchesFiniteDifferences) {
  const ModelConfig c = small_config(2, 2, 8, 2, 2);
  ParamStore<double> p = init_params<double>(c, 17);
  // Non-trivial norms and biases so every parameter carries signal.
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (Eigen::Index k = 0; k < p.value(i).size(); ++k)
      p.value(i).data()[k] += noise(rng);
  }
  const EncodedGraph atom_enc = encode_smiles("CC(=O)OC", 2, 0);
  const EncodedGraph mol_enc = with_task(atom_enc, 1);
  ASSERT_EQ(atom_enc.num_atoms(), 5);
  Matrix<double> atom_target(5, 1);
  atom_target << 0.3, -1.2, 0.8, 0.1, 2.0;
  Matrix<double> mol_target(1, 1);
  mol_target << 1.5;

  tensor::LossFn<double> loss = [&](Tape<double> &t, const ParamStore<double> &store) {
    Var<double> a = tensor::mse_loss(predict_atom_level(t, store, c, atom_enc), atom_target);
    Var<double> g = tensor::mse_loss(predict_graph_level(t, store, c, mol_enc), mol_target);
    return tensor::add(a, g);
  };
  const tensor::GradCheckResult r = tensor::check_gradients(p, loss);
  EXPECT_LT(r.max_rel_error, 1e-3) << r.worst_param << "[" << r.worst_index
                                   << "] analytic " << r.analytic << " numeric " << r.numeric;
  EXPECT_EQ(r.checked, p.num_scalars());
}

TEST(Forward, SingleAtomOneLayerMatchesHandComputation) {
  const ModelConfig c = small_config(1, 1, 8, 2);
  ParamStore<double> p = init_params<double>(c, 23);
  p["layer1.attn.bv"].setRandom();
  p["layer1.ffn.b1"].setRandom();
  const EncodedGraph enc = encode_smiles("O", kDefaultMaxDistance, std::nullopt);

  auto ln = [](const Matrix<double> &x, const Matrix<double> &g, const Matrix<double> &b) {
    const double mean = x.mean();
    const double var = (x.array() - mean).square().mean();
    Matrix<double> y = ((x.array() - mean) / std::sqrt(var + 1e-5)).matrix();
    return Matrix<double>(y.cwiseProduct(g) + b);
  };
  Matrix<double> x = p["embed.atom"].row(4) + p["embed.centrality"].row(2);
  // Attention of a single node with itself has weight one.
  Matrix<double> v = ln(x, p["layer1.ln1.gamma"], p["layer1.ln1.beta"]) * p["layer1.attn.wv"]
                     + p["layer1.attn.bv"];
  x += v * p["layer1.attn.wo"] + p["layer1.attn.bo"];
  Matrix<double> h = ln(x, p["layer1.ln2.gamma"], p["layer1.ln2.beta"]) * p["layer1.ffn.w1"]
                     + p["layer1.ffn.b1"];
  h = h.unaryExpr([](double z) { return 0.5 * z * (1.0 + std::erf(z / std::sqrt(2.0))); });
  x += h * p["layer1.ffn.w2"] + p["layer1.ffn.b2"];
  const Matrix<double> expected = ln(x, p["final_ln.gamma"], p["final_ln.beta"]);

  Tape<double> tape;
  const Matrix<double> got = forward(tape, p, c, enc).node_states.value();
  EXPECT_LT((got - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Forward, DistanceThresholdChangesOutput) {
  const ModelConfig wide = small_config(1, 2, 8, 2, 5);
  const ModelConfig narrow = small_config(1, 2, 8, 2, 1);
  const ParamStore<double> pw = init_params<double>(wide, 31);
  ParamStore<double> pn;
  for (std::size_t i = 0; i < pw.size(); ++i) {
    if (pw.name(i) != "spatial.bias")
      pn.add(pw.name(i), pw.value(i));
  }
  Matrix<double> table(narrow.spd_buckets, narrow.num_heads);
  table.row(0) = pw["spatial.bias"].row(0);
  table.row(1) = pw["spatial.bias"].row(1);
  table.row(2) = pw["spatial.bias"].row(wide.d_max + 1);
  table.row(3) = pw["spatial.bias"].row(wide.d_max + 2);
  pn.add("spatial.bias", table);

  const double far = infer_graph_level(pn, narrow, encode_smiles("CCC", 1));
  const double near = infer_graph_level(pw, wide, encode_smiles("CCC", 5));
  EXPECT_GT(std::abs(far - near), 1e-9);
}

TEST(Forward, CaptureIsPrefixProperty) {
  const ModelConfig deep = small_config(1, 3, 16, 4);
  const ModelConfig shallow = small_config(1, 1, 16, 4);
  const ParamStore<float> pd = init_params<float>(deep, 41);
  ParamStore<float> ps;
  for (const ParamSpec &spec: parameter_specs(shallow))
    ps.add(spec.name, pd[spec.name]);

  for (const std::string smiles: { "c1ccccc1O", "CC(C)N", "C" }) {
    const EncodedGraph enc = encode_smiles(smiles);
    const Matrix<float> a = capture_features(pd, deep, enc, 1);
    const Matrix<float> b = capture_features(ps, shallow, enc, 1);
    EXPECT_EQ(a.rows(), enc.num_atoms());
    EXPECT_EQ(a.cols(), 16);
    EXPECT_EQ(a, b) << smiles;
  }
}

TEST(Forward, CaptureLayerRange) {
  const ModelConfig c = small_config(1, 2);
  const ParamStore<float> p = init_params<float>(c, 1);
  const EncodedGraph enc = encode_smiles("CC");
  EXPECT_THROW(capture_features(p, c, enc, 0), std::out_of_range);
  EXPECT_THROW(capture_features(p, c, enc, 3), std::out_of_range);
  EXPECT_NO_THROW(capture_features(p, c, enc, 2));
}

TEST(Forward, ZeroParamsGiveHeadBias) {
  const ModelConfig c = small_config(2);
  ParamStore<double> p = init_params<double>(c, 1);
  p.set_zero();
  p["head.b"](0, 0) = 0.37;
  const EncodedGraph enc = encode_smiles("CC(=O)O", kDefaultMaxDistance, 1);
  const Matrix<double> atoms = infer_atom_level(p, c, enc);
  EXPECT_EQ(atoms.rows(), 4);
  EXPECT_TRUE((atoms.array() == 0.37).all());
  EXPECT_EQ(infer_graph_level(p, c, enc), 0.37);
  const Matrix<double> captured = capture_features(p, c, enc, 1);
  EXPECT_TRUE((captured.array() == 0.0).all());
}

TEST(Forward, TaskConditioningFlowsThroughTaskEmbedding) {
  const ModelConfig c = small_config(2);
  ParamStore<double> p = init_params<double>(c, 7);
  const EncodedGraph e0 = encode_smiles("OCC(N)C=O", kDefaultMaxDistance, 0);
  const EncodedGraph e1 = with_task(e0, 1);

  p["embed.task"].row(1) = p["embed.task"].row(0);
  EXPECT_EQ(infer_atom_level(p, c, e0), infer_atom_level(p, c, e1));
  EXPECT_EQ(infer_graph_level(p, c, e0), infer_graph_level(p, c, e1));

  p["embed.task"].row(1).setRandom();
  EXPECT_GT((infer_atom_level(p, c, e0) - infer_atom_level(p, c, e1)).cwiseAbs().maxCoeff(),
            0.0);
}

TEST(Predict, ContractErrors) {
  ModelConfig c = make_model_config(16, 1, 2, kDefaultMaxDistance,
                                    { HeadKind::kRegression, HeadKind::kBinary }, 0.0);
  const ParamStore<double> p = init_params<double>(c, 1);
  const EncodedGraph plain = encode_smiles("CCO", kDefaultMaxDistance, std::nullopt);
  EXPECT_THROW(infer_graph_level(p, c, plain), std::invalid_argument);
  EXPECT_THROW(infer_atom_level(p, c, plain), std::invalid_argument);
  EXPECT_THROW(infer_atom_level(p, c, with_task(plain, 1)), std::invalid_argument);
  EXPECT_NO_THROW(infer_graph_level(p, c, with_task(plain, 1)));
  EXPECT_THROW(infer_graph_level(p, c, encode_smiles("CCO", 3)), std::invalid_argument);
}

TEST(Predict, NotationVariantsGiveIdenticalOutputs) {
  const ModelConfig c = small_config();
  const ParamStore<float> p = init_params<float>(c, 9);
  for (const std::string &line: read_lines("folding_pairs.txt")) {
    const auto tab = line.find('\t');
    const EncodedGraph a =
        encode(fold_resonance(parse_smiles(line.substr(0, tab))), AtomVocab::organic(), 5, 0);
    const EncodedGraph b =
        encode(fold_resonance(parse_smiles(line.substr(tab + 1))), AtomVocab::organic(), 5, 0);
    EXPECT_EQ(a, b) << line;
    EXPECT_EQ(infer_graph_level(p, c, a), infer_graph_level(p, c, b)) << line;
    EXPECT_EQ(infer_atom_level(p, c, a), infer_atom_level(p, c, b)) << line;
  }
}

TEST(Dropout, OnlyActiveWithGenerator) {
  ModelConfig c = small_config();
  c.dropout_rate = 0.5;
  const ParamStore<double> p = init_params<double>(c, 2);
  const EncodedGraph enc = encode_smiles("CCCCO");
  std::mt19937_64 r1(1), r2(1);
  ForwardOptions<double> o1, o2;
  o1.dropout_rng = &r1;
  o2.dropout_rng = &r2;
  Tape<double> t1, t2, t3;
  const Matrix<double> a = predict_atom_level(t1, p, c, enc, o1).value();
  const Matrix<double> b = predict_atom_level(t2, p, c, enc, o2).value();
  const Matrix<double> plain = predict_atom_level(t3, p, c, enc).value();
  EXPECT_EQ(a, b);
  EXPECT_NE(a, plain);
  EXPECT_EQ(plain, infer_atom_level(p, c, enc));
}

TEST(Transfer, KeepsEncoderAndRefreshesTasks) {
  const ModelConfig src = small_config(4);
  const ModelConfig dst =
      make_model_config(16, 2, 4, kDefaultMaxDistance, { HeadKind::kBinary }, 0.1);
  const ParamStore<float> p = init_params<float>(src, 1);
  const ParamStore<float> q = transfer_params(p, src, dst, 99);
  EXPECT_NO_THROW(check_params(q, dst));
  EXPECT_EQ(q["layer2.ffn.w1"], p["layer2.ffn.w1"]);
  EXPECT_EQ(q["head.w"], p["head.w"]);
  EXPECT_EQ(q["embed.task"].rows(), 1);
  EXPECT_NE(q["embed.task"].row(0), p["embed.task"].row(0));
  EXPECT_THROW(transfer_params(p, src, small_config(1, 3), 1), DataError);
}

TEST(SaveLoad, RoundTrip) {
  const ModelConfig c = small_config(2);
  const ParamStore<float> p = init_params<float>(c, 8);
  const auto dir = std::filesystem::temp_directory_path() / "molshift_model_rt";
  std::filesystem::remove_all(dir);
  save_model(dir, c, p);
  SavedModel<float> m = load_model<float>(dir);
  EXPECT_EQ(m.config, c);
  EXPECT_FALSE(m.optimizer.has_value());
  const EncodedGraph enc = encode_smiles("c1ccncc1");
  EXPECT_EQ(infer_graph_level(m.params, m.config, enc), infer_graph_level(p, c, enc));
  SavedModel<float> again = load_model<float>(checkpoint_file(dir));
  EXPECT_EQ(again.params["head.w"], p["head.w"]);

  save_model_config(dir / "config.json", small_config(2, 3));
  EXPECT_THROW(load_model<float>(dir), DataError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace molshift
