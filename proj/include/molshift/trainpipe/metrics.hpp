//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLSHIFT_TRAINPIPE_METRICS_HPP_
#define MOLSHIFT_TRAINPIPE_METRICS_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace molshift {

enum class Metric {
  kMae,
  kRocAuc,
  kPrAuc,
  kSpearman,
};

std::string to_string(Metric metric);
Metric metric_from_string(const std::string &name);
bool higher_is_better(Metric metric);
bool is_binary_metric(Metric metric);

// All metrics need equal lengths of at least two; binary metrics need labels
// in {0, 1} with both classes present. Violations throw DataError.

double metric_mae(const std::vector<double> &predictions, const std::vector<double> &labels);

// Probability that a random positive outscores a random negative; ties count 1/2.
double metric_rocauc(const std::vector<double> &scores, const std::vector<double> &labels);

// Average precision: sum over score thresholds of (recall step) x precision.
double metric_prauc(const std::vector<double> &scores, const std::vector<double> &labels);

// Pearson correlation of average ranks. Returns 0 when either side is
// constant, since no ordering information exists.
double metric_spearman(const std::vector<double> &predictions, const std::vector<double> &labels);

double compute_metric(Metric metric, const std::vector<double> &predictions,
                      const std::vector<double> &labels);

// 1-based ranks, tied values sharing the average of their positions.
std::vector<double> average_ranks(const std::vector<double> &values);

struct MetricRow {
  std::string task;
  std::uint64_t seed = 0;
  std::string split;
  std::string metric;
  double value = 0.0;
};

// CSV with header `task,seed,split,metric,value`; values printed round-trip exact.
void write_metrics_csv(const std::filesystem::path &path, const std::vector<MetricRow> &rows);

}  // namespace molshift

#endif  // MOLSHIFT_TRAINPIPE_METRICS_HPP_
