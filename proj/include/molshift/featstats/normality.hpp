//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLSHIFT_FEATSTATS_NORMALITY_HPP_
#define MOLSHIFT_FEATSTATS_NORMALITY_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "molshift/featstats/features.hpp"

namespace molshift {

// Largest sample handed to the Shapiro-Wilk approximation.
inline constexpr std::size_t kShapiroMaxN = 5000;

double normal_cdf(double x);
// Inverse standard normal CDF (AS 241), p in (0, 1).
double normal_quantile(double p);

struct ShapiroWilk {
  double w = 1.0;
  double p = 1.0;
};

/// Royston's Shapiro-Wilk test (AS R94). Samples above kShapiroMaxN are
/// replaced by a uniform subsample of that size drawn with `subsample_seed`.
/// Throws std::invalid_argument for n < 3 and DataError for a zero-range
/// sample.
ShapiroWilk shapiro_wilk(std::vector<double> sample, std::uint64_t subsample_seed = 0);

struct KsResult {
  double d = 0.0;
  double p = 1.0;
};

// Kolmogorov survival function Q(lambda) = 2 sum_k (-1)^(k-1) exp(-2 k^2 lambda^2).
double kolmogorov_sf(double lambda);

// sup_x |F_n(x) - cdf(x)| of an ascending sample.
double ks_sup_distance(const std::vector<double> &sorted, double (*cdf)(double));

/// One-sample KS of the z-scored sample against N(0, 1), with the asymptotic
/// p-value. The mean and std come from the sample itself, so p is
/// conservative (the Lilliefors caveat). Needs n >= 8; throws DataError on
/// zero variance.
KsResult ks_normal(const std::vector<double> &sample);

inline constexpr const char *kKsCaveat = "estimated-parameters";

struct DimensionNormality {
  int dimension = 0;
  std::optional<ShapiroWilk> shapiro;
  std::optional<KsResult> ks;
  // Why a test is missing, e.g. "degenerate".
  std::string note;
};

struct NormalityReport {
  ModelTag model = ModelTag::kScratch;
  SplitRole split = SplitRole::kTrain;
  std::vector<DimensionNormality> dims;
};

// Both tests on every feature dimension, independently and in parallel.
NormalityReport normality_report(const FeatureMatrix &features, std::uint64_t seed = 0);

/// Mean and population std of the Shapiro-Wilk p-values; dimensions without
/// a result are skipped. Throws std::invalid_argument when none remain.
std::pair<double, double> normality_summary(const NormalityReport &report);
std::pair<double, double> mean_and_std(const std::vector<double> &values);

// CSV `dimension,model,split,test,statistic,p_value,note`.
void write_normality_csv(const std::filesystem::path &path,
                         const std::vector<NormalityReport> &reports);

}  // namespace molshift

#endif  // MOLSHIFT_FEATSTATS_NORMALITY_HPP_
