//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molshift/featstats/features.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "molshift/errors.hpp"
#include "molshift/graphormer/graphormer.hpp"
#include "molshift/molgraph/encode.hpp"
#include "molshift/trainpipe/parallel.hpp"

namespace molshift {

static_assert(std::endian::native == std::endian::little, "feature files assume little-endian");

std::string to_string(ModelTag tag) {
  switch (tag) {
  case ModelTag::kScratch:
    return "scratch";
  case ModelTag::kMolPretrained:
    return "mol_pretrained";
  case ModelTag::kAtomPretrained:
    return "atom_pretrained";
  }
  return "?";
}

ModelTag model_tag_from_string(const std::string &name) {
  for (ModelTag tag: { ModelTag::kScratch, ModelTag::kMolPretrained, ModelTag::kAtomPretrained }) {
    if (to_string(tag) == name)
      return tag;
  }
  throw DataError("unknown model tag '" + name
                  + "' (expected scratch, mol_pretrained or atom_pretrained)");
}

std::vector<double> FeatureMatrix::column(int dim) const {
  std::vector<double> out(static_cast<std::size_t>(values.rows()));
  for (Eigen::Index r = 0; r < values.rows(); ++r)
    out[static_cast<std::size_t>(r)] = values(r, dim);
  return out;
}

void write_feature_file(const std::filesystem::path &path, const FeatureValues &values) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw DataError("cannot write feature file " + path.string());
  os.write(kFeatureMagic.data(), static_cast<std::streamsize>(kFeatureMagic.size()));
  const std::uint64_t dims[2] = { static_cast<std::uint64_t>(values.rows()),
                                  static_cast<std::uint64_t>(values.cols()) };
  os.write(reinterpret_cast<const char *>(dims), sizeof(dims));
  os.write(reinterpret_cast<const char *>(values.data()),
           static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (!os)
    throw DataError("failed writing feature file " + path.string());
}

FeatureValues read_feature_file(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is)
    throw DataError("cannot open feature file " + path.string());
  std::string magic(kFeatureMagic.size(), '\0');
  is.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (!is || magic != kFeatureMagic)
    throw DataError(path.string() + ": not a feature file (bad magic)");
  std::uint64_t dims[2] = {};
  is.read(reinterpret_cast<char *>(dims), sizeof(dims));
  if (!is)
    throw DataError(path.string() + ": truncated header");
  if (dims[0] > (1ULL << 32) || dims[1] > (1ULL << 20))
    throw DataError(path.string() + ": implausible shape");
  FeatureValues values(static_cast<Eigen::Index>(dims[0]), static_cast<Eigen::Index>(dims[1]));
  is.read(reinterpret_cast<char *>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (!is)
    throw DataError(path.string() + ": truncated payload");
  is.peek();
  if (!is.eof())
    throw DataError(path.string() + ": trailing bytes after payload");
  return values;
}

FeatureMatrix extract_features(const ModelBundle &bundle,
                               const std::vector<MolecularGraph> &graphs, SplitRole split,
                               ModelTag model, int capture_layer) {
  if (capture_layer < 1 || capture_layer > bundle.config.num_layers) {
    throw std::out_of_range("capture layer " + std::to_string(capture_layer) + " outside 1.."
                            + std::to_string(bundle.config.num_layers));
  }
  const AtomVocab vocab = AtomVocab::organic();
  std::vector<tensor::Matrix<Real>> parts(graphs.size());
  parallel_for(graphs.size(), [&](std::size_t i) {
    const EncodedGraph enc = encode(graphs[i], vocab, bundle.config.d_max, 0);
    parts[i] = capture_features(bundle.params, bundle.config, enc, capture_layer);
  });

  Eigen::Index rows = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!parts[i].allFinite())
      throw NumericError("non-finite activation in molecule " + std::to_string(i) + " ('"
                         + graphs[i].source_smiles + "')");
    rows += parts[i].rows();
  }
  FeatureMatrix out;
  out.split = split;
  out.model = model;
  out.values.resize(rows, bundle.config.hidden_dim);
  Eigen::Index at = 0;
  for (const auto &part: parts) {
    out.values.middleRows(at, part.rows()) = part;
    at += part.rows();
  }
  return out;
}

}  // namespace molshift
