//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLSHIFT_FEATSTATS_SHIFT_HPP_
#define MOLSHIFT_FEATSTATS_SHIFT_HPP_

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "molshift/featstats/features.hpp"

namespace molshift {

inline constexpr int kDefaultBins = 64;
inline constexpr double kKlSmoothing = 1e-10;

// Equal-width bins; counts.size() + 1 == edges.size().
struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
  std::size_t total = 0;

  int bins() const { return static_cast<int>(counts.size()); }
  std::vector<double> probabilities() const;
};

/// Histograms of several samples over shared equal-width edges spanning the
/// union of their values. When every value is equal the result falls back to
/// one bin of unit width centered on that value. Samples must be nonempty.
std::vector<Histogram> histogram_set(const std::vector<std::vector<double>> &samples, int bins);
std::pair<Histogram, Histogram> histogram_pair(const std::vector<double> &a,
                                               const std::vector<double> &b,
                                               int bins = kDefaultBins);

enum class ShiftMetric {
  kKl,
  kJs,
  kEmd,
  kTv,
  kHellinger,
};

inline constexpr std::array<ShiftMetric, 5> kShiftMetrics = {
  ShiftMetric::kKl, ShiftMetric::kJs, ShiftMetric::kEmd, ShiftMetric::kTv, ShiftMetric::kHellinger
};

std::string to_string(ShiftMetric metric);

struct Divergences {
  double kl = 0.0;
  double js = 0.0;
  double emd = 0.0;
  double tv = 0.0;
  double hellinger = 0.0;

  double operator[](ShiftMetric metric) const;
};

/// All five divergences between histograms on identical edges, in nats.
/// KL alone smooths both sides by kKlSmoothing and renormalizes; EMD is in
/// the units of the binned values. Throws std::invalid_argument on
/// mismatched edges.
Divergences divergences(const Histogram &p, const Histogram &q);

// Per-dimension divergences between two splits of one model.
struct ShiftReport {
  ModelTag model = ModelTag::kScratch;
  SplitRole first = SplitRole::kTrain;
  SplitRole second = SplitRole::kTest;
  std::vector<Divergences> dims;

  std::string split_pair() const;
};

ShiftReport split_shift(const FeatureMatrix &first, const FeatureMatrix &second,
                        int bins = kDefaultBins);

// delta[d][m] = a.dims[d][m] - b.dims[d][m]; positive means model B shifts less.
struct DifferencedShift {
  ShiftReport a;
  ShiftReport b;
  std::vector<Divergences> delta;
};

/// Shift of model A between its two splits minus that of model B. Both
/// models must cover the same split pair with the same feature width.
DifferencedShift shift_report(const FeatureMatrix &a_first, const FeatureMatrix &a_second,
                              const FeatureMatrix &b_first, const FeatureMatrix &b_second,
                              int bins = kDefaultBins);

// CSV `dimension,metric,split_pair,model,value`.
void write_shift_csv(const std::filesystem::path &path, const std::vector<ShiftReport> &reports);
// CSV `dimension,metric,delta`.
void write_delta_csv(const std::filesystem::path &path, const DifferencedShift &report);

/// Histograms of dimensions [0, max_dims) for every split of one model, on
/// edges shared across the splits. CSV
/// `dimension,bin_left,bin_right,count,model,split`.
void write_histogram_csv(const std::filesystem::path &path,
                         const std::vector<FeatureMatrix> &splits, int bins = kDefaultBins,
                         int max_dims = 20);

}  // namespace molshift

#endif  // MOLSHIFT_FEATSTATS_SHIFT_HPP_
