//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "molshift/errors.hpp"
#include "molshift/featstats/features.hpp"
#include "molshift/featstats/normality.hpp"
#include "molshift/featstats/shift.hpp"
#include "molshift/graphormer/graphormer.hpp"
#include "molshift/molgraph/smiles.hpp"
#include "sample_stream.hpp"

namespace molshift {
namespace {

namespace fs = std::filesystem;
using testing::draw_sample;

fs::path scratch_dir(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / ("molshift_featstats_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Histogram make_hist(std::vector<std::size_t> counts, double width = 1.0) {
  Histogram h;
  for (std::size_t i = 0; i <= counts.size(); ++i)
    h.edges.push_back(static_cast<double>(i) * width);
  h.total = 0;
  for (std::size_t c: counts)
    h.total += c;
  h.counts = std::move(counts);
  return h;
}

// Straight from the textbook definitions, sharing nothing with the library.
Divergences direct_divergences(const std::vector<double> &p, const std::vector<double> &q,
                               double width) {
  const std::size_t k = p.size();
  Divergences d;
  const double eps = 1e-10;
  double zp = 0, zq = 0;
  for (std::size_t i = 0; i < k; ++i) {
    zp += p[i] + eps;
    zq += q[i] + eps;
  }
  for (std::size_t i = 0; i < k; ++i) {
    const double a = (p[i] + eps) / zp, b = (q[i] + eps) / zq;
    d.kl += a * std::log(a / b);
    const double m = (p[i] + q[i]) / 2;
    if (p[i] > 0)
      d.js += 0.5 * p[i] * std::log(p[i] / m);
    if (q[i] > 0)
      d.js += 0.5 * q[i] * std::log(q[i] / m);
    d.tv += 0.5 * std::abs(p[i] - q[i]);
    double cp = 0, cq = 0;
    for (std::size_t j = 0; j <= i; ++j) {
      cp += p[j];
      cq += q[j];
    }
    d.emd += std::abs(cp - cq) * width;
  }
  double bc = 0;
  for (std::size_t i = 0; i < k; ++i)
    bc += std::sqrt(p[i] * q[i]);
  d.hellinger = std::sqrt(std::max(0.0, 1 - bc));
  return d;
}

// Integral of |F_a - F_b| for point-mass samples, by sweeping sorted points.
double ecdf_l1(std::vector<double> a, std::vector<double> b) {
  std::vector<double> pts = a;
  pts.insert(pts.end(), b.begin(), b.end());
  std::sort(pts.begin(), pts.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  auto ecdf = [](const std::vector<double> &s, double x) {
    return static_cast<double>(std::upper_bound(s.begin(), s.end(), x) - s.begin())
           / static_cast<double>(s.size());
  };
  double area = 0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i)
    area += std::abs(ecdf(a, pts[i]) - ecdf(b, pts[i])) * (pts[i + 1] - pts[i]);
  return area;
}

// Every way to put `total` counts into `bins` bins.
void compositions(int bins, int total, std::vector<std::size_t> &cur,
                  std::vector<std::vector<std::size_t>> &out) {
  if (static_cast<int>(cur.size()) == bins - 1) {
    cur.push_back(static_cast<std::size_t>(total));
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int c = 0; c <= total; ++c) {
    cur.push_back(static_cast<std::size_t>(c));
    compositions(bins, total - c, cur, out);
    cur.pop_back();
  }
}

FeatureMatrix features_of(std::vector<std::vector<double>> columns, SplitRole split,
                          ModelTag model) {
  FeatureMatrix f;
  f.split = split;
  f.model = model;
  f.values.resize(static_cast<Eigen::Index>(columns[0].size()),
                  static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    for (std::size_t r = 0; r < columns[c].size(); ++r)
      f.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          static_cast<float>(columns[c][r]);
  }
  return f;
}

FeatureMatrix gaussian_features(int rows, int dims, std::uint64_t seed, SplitRole split,
                                ModelTag model, int shifted_dim = -1, double shift = 0.0) {
  std::vector<std::vector<double>> cols;
  for (int d = 0; d < dims; ++d) {
    std::vector<double> col = draw_sample("normal", rows, seed * 100 + static_cast<unsigned>(d));
    if (d == shifted_dim) {
      for (double &v: col)
        v += shift;
    }
    cols.push_back(std::move(col));
  }
  return features_of(std::move(cols), split, model);
}

// ---------------------------------------------------------------------------
// Normal distribution helpers

TEST(Normal, QuantileMatchesReference) {
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-13);
  EXPECT_NEAR(normal_quantile(1e-10), -6.361340902404056, 1e-11);
  EXPECT_EQ(normal_quantile(0.5), 0.0);
  for (double p: { 1e-6, 0.01, 0.2, 0.7, 0.999 })
    EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-14 + 1e-12 * p);
  EXPECT_THROW(normal_quantile(0.0), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Shapiro-Wilk

TEST(ShapiroWilk, MatchesReferenceImplementation) {
  std::ifstream in(std::string(MOLSHIFT_TEST_DATA_DIR) + "/shapiro_reference.csv");
  ASSERT_TRUE(in);
  std::string line;
  int checked = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("kind", 0) == 0)
      continue;
    std::stringstream ss(line);
    std::string kind, n, seed, w, p;
    std::getline(ss, kind, ',');
    std::getline(ss, n, ',');
    std::getline(ss, seed, ',');
    std::getline(ss, w, ',');
    std::getline(ss, p, ',');
    const auto sample = draw_sample(kind, std::stoi(n), std::stoull(seed));
    const ShapiroWilk r = shapiro_wilk(sample);
    EXPECT_NEAR(r.w, std::stod(w), 5e-5) << kind << " n=" << n;
    EXPECT_NEAR(r.p, std::stod(p), 5e-5) << kind << " n=" << n;
    ++checked;
  }
  EXPECT_EQ(checked, 20);
}

TEST(ShapiroWilk, NullCalibration) {
  int rejected = 0;
  for (int t = 0; t < 1000; ++t) {
    if (shapiro_wilk(draw_sample("normal", 200, 77000 + static_cast<unsigned>(t))).p < 0.05)
      ++rejected;
  }
  EXPECT_GE(rejected, 30);
  EXPECT_LE(rejected, 70);
}

TEST(ShapiroWilk, RejectsUniform) {
  int rejected = 0;
  for (int t = 0; t < 100; ++t) {
    if (shapiro_wilk(draw_sample("uniform", 500, 91000 + static_cast<unsigned>(t))).p < 0.01)
      ++rejected;
  }
  EXPECT_GE(rejected, 95);
}

TEST(ShapiroWilk, Contract) {
  EXPECT_THROW(shapiro_wilk({ 1.0, 2.0 }), std::invalid_argument);
  EXPECT_THROW(shapiro_wilk(std::vector<double>(20, 3.5)), DataError);
  const ShapiroWilk three = shapiro_wilk({ 1.0, 2.0, 3.0 });
  EXPECT_NEAR(three.w, 1.0, 1e-12);
  EXPECT_NEAR(three.p, 1.0, 1e-6);
  // Shuffling does not matter; W stays in (0, 1].
  auto s = draw_sample("exponential", 60, 5);
  const ShapiroWilk a = shapiro_wilk(s);
  std::reverse(s.begin(), s.end());
  EXPECT_EQ(shapiro_wilk(s).w, a.w);
  EXPECT_GT(a.w, 0.0);
  EXPECT_LE(a.w, 1.0);
}

TEST(ShapiroWilk, SubsamplesLargeInputsBySeed) {
  const auto big = draw_sample("normal", 12000, 3);
  const ShapiroWilk a = shapiro_wilk(big, 1);
  EXPECT_EQ(shapiro_wilk(big, 1).w, a.w);
  EXPECT_NE(shapiro_wilk(big, 2).w, a.w);
  EXPECT_GT(a.p, 0.0);
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov

TEST(Ks, KolmogorovSurvivalMatchesReference) {
  const std::vector<std::pair<double, double>> ref = {
    { 0.3, 0.9999906941986655 },  { 0.5, 0.9639452436648751 },
    { 1.0, 0.26999967167735456 }, { 1.18, 0.1234538094297657 },
    { 1.5, 0.022217962616525127 }, { 2.5, 7.453306344157342e-06 },
  };
  for (const auto &[lambda, sf]: ref)
    EXPECT_NEAR(kolmogorov_sf(lambda), sf, 1e-12) << lambda;
  EXPECT_EQ(kolmogorov_sf(0.0), 1.0);
}

TEST(Ks, QuantileSampleHasHalfStepDistance) {
  for (int n: { 8, 25, 400 }) {
    std::vector<double> q;
    for (int i = 1; i <= n; ++i)
      q.push_back(normal_quantile((i - 0.5) / n));
    EXPECT_NEAR(ks_sup_distance(q, normal_cdf), 0.5 / n, 1e-12) << n;
  }
}

TEST(Ks, LargeNormalSamplesFit) {
  int good = 0;
  for (int t = 0; t < 20; ++t) {
    const KsResult r = ks_normal(draw_sample("normal", 10000, 4400 + static_cast<unsigned>(t)));
    EXPECT_GE(r.d, 0.0);
    EXPECT_LE(r.p, 1.0);
    if (r.d < 0.02)
      ++good;
  }
  EXPECT_GE(good, 19);
}

TEST(Ks, Contract) {
  EXPECT_THROW(ks_normal(std::vector<double>(10, 1.0)), DataError);
  EXPECT_THROW(ks_normal({ 1, 2, 3 }), std::invalid_argument);
  EXPECT_LT(ks_normal(draw_sample("exponential", 2000, 8)).p, 1e-6);
}

// ---------------------------------------------------------------------------
// Histograms and divergences

TEST(Histogram, SharedEdges) {
  const std::vector<double> a = { 0.0, 0.5, 1.0, 1.5, 2.0 };
  const auto [p, q] = histogram_pair(a, a, 4);
  EXPECT_EQ(p.counts, q.counts);
  EXPECT_EQ(p.edges, (std::vector<double> { 0.0, 0.5, 1.0, 1.5, 2.0 }));
  EXPECT_EQ(p.counts, (std::vector<std::size_t> { 1, 1, 1, 2 }));

  const auto [l, r] = histogram_pair({ 0.0, 0.1 }, { 5.0, 5.1 }, 10);
  for (int b = 0; b < 10; ++b)
    EXPECT_EQ(l.counts[b] * r.counts[b], 0u);
  EXPECT_EQ(l.total, 2u);

  const auto [one_a, one_b] = histogram_pair({ 1, 2 }, { 7, 9, 11 }, 1);
  EXPECT_EQ(one_a.probabilities(), one_b.probabilities());
  const Divergences zero = divergences(one_a, one_b);
  EXPECT_EQ(zero.tv, 0.0);
  EXPECT_EQ(zero.emd, 0.0);
}

TEST(Histogram, DegenerateRangeFallsBackToOneBin) {
  const auto [p, q] = histogram_pair({ 2.0, 2.0 }, { 2.0 }, 64);
  EXPECT_EQ(p.bins(), 1);
  EXPECT_EQ(p.edges, (std::vector<double> { 1.5, 2.5 }));
  EXPECT_EQ(q.counts[0], 1u);
  EXPECT_THROW(histogram_pair({}, { 1.0 }, 4), std::invalid_argument);
}

TEST(Divergences, BoundaryIdentities) {
  const Histogram p = make_hist({ 3, 1, 0, 4 });
  const Divergences same = divergences(p, p);
  EXPECT_NEAR(same.kl, 0.0, 1e-15);
  EXPECT_EQ(same.js, 0.0);
  EXPECT_EQ(same.emd, 0.0);
  EXPECT_EQ(same.tv, 0.0);
  EXPECT_EQ(same.hellinger, 0.0);

  const Divergences apart = divergences(make_hist({ 1, 0 }), make_hist({ 0, 1 }));
  EXPECT_EQ(apart.emd, 1.0);
  EXPECT_EQ(apart.tv, 1.0);
  EXPECT_EQ(apart.hellinger, 1.0);
  EXPECT_EQ(apart.js, std::log(2.0));
}

TEST(Divergences, KlExampleAndAsymmetry) {
  const Histogram p = make_hist({ 5, 5 });
  const Histogram q = make_hist({ 9, 1 });
  const double expected = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
  EXPECT_NEAR(divergences(p, q).kl, expected, 1e-9);
  EXPECT_NEAR(expected, 0.5108, 1e-4);
  EXPECT_GT(std::abs(divergences(q, p).kl - expected), 0.05);
  EXPECT_THROW(divergences(p, make_hist({ 5, 5 }, 2.0)), std::invalid_argument);
}

TEST(Divergences, MatchDirectFormulasAndBounds) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> bins(1, 12), count(0, 6);
  std::uniform_real_distribution<double> width(0.01, 3.0);
  for (int t = 0; t < 10000; ++t) {
    const int k = bins(rng);
    const double w = width(rng);
    std::vector<std::size_t> a(k), b(k);
    for (int i = 0; i < k; ++i) {
      a[i] = count(rng);
      b[i] = count(rng);
    }
    a[0] += 1;
    b[k - 1] += 1;
    const Histogram p = make_hist(a, w), q = make_hist(b, w);
    const Divergences d = divergences(p, q);
    ASSERT_GE(d.kl, 0.0);
    ASSERT_GE(d.js, 0.0);
    ASSERT_LE(d.js, std::log(2.0));
    ASSERT_GE(d.tv, 0.0);
    ASSERT_LE(d.tv, 1.0);
    ASSERT_GE(d.hellinger, 0.0);
    ASSERT_LE(d.hellinger, 1.0);
    ASSERT_GE(d.emd, 0.0);
    ASSERT_LE(d.emd, k * w * (1 + 1e-12));

    const Divergences r = divergences(q, p);
    ASSERT_NEAR(r.js, d.js, 1e-15);
    ASSERT_NEAR(r.tv, d.tv, 1e-15);
    ASSERT_NEAR(r.hellinger, d.hellinger, 1e-15);
    ASSERT_NEAR(r.emd, d.emd, 1e-12);

    if (t < 1000) {
      const Divergences o = direct_divergences(p.probabilities(), q.probabilities(), w);
      for (ShiftMetric m: kShiftMetrics)
        ASSERT_NEAR(d[m], o[m], 1e-10) << to_string(m) << " trial " << t;
    }
  }
}

TEST(Divergences, EmdEqualsEcdfDistanceExhaustively) {
  int pairs = 0;
  for (int k = 1; k <= 6; ++k) {
    std::vector<std::vector<std::size_t>> all;
    std::vector<std::size_t> cur;
    compositions(k, 3, cur, all);
    for (const auto &a: all) {
      for (const auto &b: all) {
        const double w = 0.5;
        auto points = [&](const std::vector<std::size_t> &c) {
          std::vector<double> s;
          for (int i = 0; i < k; ++i)
            s.insert(s.end(), c[i], (i + 0.5) * w);
          return s;
        };
        const double d = divergences(make_hist(a, w), make_hist(b, w)).emd;
        ASSERT_NEAR(d, ecdf_l1(points(a), points(b)), 1e-12);
        ++pairs;
      }
    }
  }
  EXPECT_EQ(pairs, 1 + 16 + 100 + 400 + 1225 + 3136);
}

TEST(Divergences, BinRefinementIsStable) {
  const auto a = draw_sample("normal", 5000, 61);
  auto b = draw_sample("normal", 5000, 62);
  for (double &v: b)
    v += 0.3;
  for (int bins: { 16, 32, 64 }) {
    const auto [p1, q1] = histogram_pair(a, b, bins);
    const auto [p2, q2] = histogram_pair(a, b, 2 * bins);
    EXPECT_LT(std::abs(divergences(p1, q1).js - divergences(p2, q2).js), 0.05) << bins;
  }
}

// ---------------------------------------------------------------------------
// Shift reports

TEST(Shift, IdenticalModelsGiveZeroDifference) {
  const FeatureMatrix tr = gaussian_features(300, 4, 1, SplitRole::kTrain, ModelTag::kScratch);
  const FeatureMatrix te = gaussian_features(200, 4, 2, SplitRole::kTest, ModelTag::kScratch);
  const DifferencedShift r = shift_report(tr, te, tr, te);
  for (const Divergences &d: r.delta) {
    for (ShiftMetric m: kShiftMetrics)
      EXPECT_EQ(d[m], 0.0);
  }
}

TEST(Shift, StableModelBGivesNonNegativeDelta) {
  const FeatureMatrix a_tr = gaussian_features(300, 5, 1, SplitRole::kTrain, ModelTag::kScratch);
  const FeatureMatrix a_te = gaussian_features(300, 5, 9, SplitRole::kTest, ModelTag::kScratch);
  FeatureMatrix b_tr = gaussian_features(300, 5, 4, SplitRole::kTrain, ModelTag::kAtomPretrained);
  FeatureMatrix b_te = b_tr;
  b_te.split = SplitRole::kTest;
  const DifferencedShift r = shift_report(a_tr, a_te, b_tr, b_te);
  for (const Divergences &d: r.delta) {
    for (ShiftMetric m: kShiftMetrics)
      EXPECT_GE(d[m], 0.0);
  }
}

TEST(Shift, ConstructedMeanShiftShowsInEmd) {
  const FeatureMatrix a_tr = gaussian_features(5000, 4, 11, SplitRole::kTrain, ModelTag::kScratch);
  const FeatureMatrix a_te =
      gaussian_features(5000, 4, 12, SplitRole::kTest, ModelTag::kScratch, 0, 1.0);
  const FeatureMatrix b_tr =
      gaussian_features(5000, 4, 13, SplitRole::kTrain, ModelTag::kAtomPretrained);
  const FeatureMatrix b_te =
      gaussian_features(5000, 4, 14, SplitRole::kTest, ModelTag::kAtomPretrained);
  const DifferencedShift r = shift_report(a_tr, a_te, b_tr, b_te);
  EXPECT_NEAR(r.a.dims[0].emd, 1.0, 0.1);
  for (int d = 1; d < 4; ++d)
    EXPECT_LT(r.a.dims[d].emd, 0.1);
  EXPECT_GT(r.delta[0].emd, 0.8);
  EXPECT_EQ(r.a.split_pair(), "train-test");
}

TEST(Shift, Errors) {
  const FeatureMatrix a = gaussian_features(50, 4, 1, SplitRole::kTrain, ModelTag::kScratch);
  const FeatureMatrix b = gaussian_features(50, 3, 2, SplitRole::kTest, ModelTag::kScratch);
  EXPECT_THROW(split_shift(a, b), DataError);
  const FeatureMatrix c = gaussian_features(50, 4, 2, SplitRole::kValid, ModelTag::kScratch);
  const FeatureMatrix d = gaussian_features(50, 4, 2, SplitRole::kTest, ModelTag::kScratch);
  EXPECT_THROW(shift_report(a, c, a, d), DataError);
}

// ---------------------------------------------------------------------------
// Normality reports

TEST(Normality, SummaryConventions) {
  NormalityReport r;
  r.dims.resize(3);
  for (auto &d: r.dims)
    d.shapiro = ShapiroWilk { 0.9, 0.5 };
  EXPECT_EQ(normality_summary(r), (std::pair<double, double> { 0.5, 0.0 }));
  r.dims.resize(2);
  r.dims[0].shapiro->p = 0.0;
  r.dims[1].shapiro->p = 1.0;
  EXPECT_EQ(normality_summary(r), (std::pair<double, double> { 0.5, 0.5 }));
  r.dims.clear();
  EXPECT_THROW(normality_summary(r), std::invalid_argument);
}

TEST(Normality, ReportMarksDegenerateDimensions) {
  FeatureMatrix f = gaussian_features(100, 3, 5, SplitRole::kTrain, ModelTag::kScratch);
  f.values.col(1).setConstant(0.25f);
  const NormalityReport r = normality_report(f);
  ASSERT_EQ(r.dims.size(), 3u);
  EXPECT_TRUE(r.dims[0].shapiro && r.dims[0].ks);
  EXPECT_FALSE(r.dims[1].shapiro);
  EXPECT_EQ(r.dims[1].note, "degenerate");
  EXPECT_NO_THROW(normality_summary(r));

  const fs::path dir = scratch_dir("normality");
  write_normality_csv(dir / "n.csv", { r });
  std::ifstream in(dir / "n.csv");
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header, "dimension,model,split,test,statistic,p_value,note");
  EXPECT_EQ(first.rfind("0,scratch,train,shapiro_wilk,", 0), 0u);
}

// ---------------------------------------------------------------------------
// Feature files and extraction

TEST(Features, FileRoundTrip) {
  const fs::path dir = scratch_dir("files");
  FeatureValues v(3, 2);
  v << 1.0f, -2.5f, 3.25f, 0.0f, 1e-7f, 7.0f;
  write_feature_file(dir / "f.msfeat", v);
  EXPECT_EQ(read_feature_file(dir / "f.msfeat"), v);

  std::ofstream(dir / "bad.msfeat") << "MSFEATX";
  EXPECT_THROW(read_feature_file(dir / "bad.msfeat"), DataError);
  const auto size = fs::file_size(dir / "f.msfeat");
  fs::copy_file(dir / "f.msfeat", dir / "short.msfeat");
  fs::resize_file(dir / "short.msfeat", size - 1);
  EXPECT_THROW(read_feature_file(dir / "short.msfeat"), DataError);
  EXPECT_THROW(read_feature_file(dir / "missing.msfeat"), DataError);
}

TEST(Features, ExtractionRowsAndDeterminism) {
  ModelBundle bundle;
  bundle.config = make_model_config(8, 2, 2, 5, { HeadKind::kRegression });
  bundle.params = init_params<Real>(bundle.config, 3);
  bundle.tasks = { TaskInfo {} };
  std::vector<MolecularGraph> graphs;
  for (const char *s: { "c1ccccc1", "CO", "CC(C)(C)CC(=O)OC" })
    graphs.push_back(fold_resonance(parse_smiles(s)));
  const FeatureMatrix f = extract_features(bundle, graphs, SplitRole::kValid, ModelTag::kScratch);
  EXPECT_EQ(f.rows(), 6 + 2 + 9);
  EXPECT_EQ(f.dims(), 8);
  EXPECT_EQ(f.split, SplitRole::kValid);
  const FeatureMatrix g = extract_features(bundle, graphs, SplitRole::kValid, ModelTag::kScratch);
  EXPECT_EQ(f.values, g.values);
  EXPECT_THROW(extract_features(bundle, graphs, SplitRole::kValid, ModelTag::kScratch, 3),
               std::out_of_range);

  bundle.params.set_zero();
  const FeatureMatrix z = extract_features(bundle, graphs, SplitRole::kTest, ModelTag::kScratch);
  for (Eigen::Index r = 1; r < z.values.rows(); ++r)
    EXPECT_EQ(z.values.row(r), z.values.row(0));
}

TEST(Features, ModelTags) {
  for (ModelTag t: { ModelTag::kScratch, ModelTag::kMolPretrained, ModelTag::kAtomPretrained })
    EXPECT_EQ(model_tag_from_string(to_string(t)), t);
  EXPECT_THROW(model_tag_from_string("finetuned"), DataError);
}

TEST(Features, HistogramDump) {
  const FeatureMatrix tr = gaussian_features(40, 25, 1, SplitRole::kTrain, ModelTag::kScratch);
  const FeatureMatrix te = gaussian_features(30, 25, 2, SplitRole::kTest, ModelTag::kScratch);
  const fs::path dir = scratch_dir("hist");
  write_histogram_csv(dir / "h.csv", { tr, te }, 8);
  std::ifstream in(dir / "h.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "dimension,bin_left,bin_right,count,model,split");
  int rows = 0;
  while (std::getline(in, line))
    ++rows;
  EXPECT_EQ(rows, 20 * 2 * 8);
}

}  // namespace
}  // namespace molshift
