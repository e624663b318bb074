//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molshift/trainpipe/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "molshift/errors.hpp"

namespace molshift {

std::string to_string(Metric metric) {
  switch (metric) {
  case Metric::kMae: return "MAE";
  case Metric::kRocAuc: return "ROC-AUC";
  case Metric::kPrAuc: return "PR-AUC";
  case Metric::kSpearman: return "Spearman";
  }
  return "?";
}

Metric metric_from_string(const std::string &name) {
  std::string lower;
  for (char c: name)
    lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "mae")
    return Metric::kMae;
  if (lower == "roc-auc" || lower == "rocauc" || lower == "auroc")
    return Metric::kRocAuc;
  if (lower == "pr-auc" || lower == "prauc" || lower == "auprc")
    return Metric::kPrAuc;
  if (lower == "spearman")
    return Metric::kSpearman;
  throw DataError("unknown metric '" + name + "'");
}

bool higher_is_better(Metric metric) { return metric != Metric::kMae; }

bool is_binary_metric(Metric metric) {
  return metric == Metric::kRocAuc || metric == Metric::kPrAuc;
}

namespace {

void check_lengths(const std::vector<double> &a, const std::vector<double> &b) {
  if (a.size() != b.size()) {
    throw DataError("metric inputs differ in length: " + std::to_string(a.size()) + " vs "
                    + std::to_string(b.size()));
  }
  if (a.size() < 2)
    throw DataError("metrics need at least two samples");
}

// Returns the number of positives after checking labels are a two-class 0/1 set.
std::size_t check_binary(const std::vector<double> &labels) {
  std::size_t positives = 0;
  for (double y: labels) {
    if (y != 0.0 && y != 1.0)
      throw DataError("binary labels must be 0 or 1");
    positives += y == 1.0 ? 1 : 0;
  }
  if (positives == 0 || positives == labels.size())
    throw DataError("degenerate labels: only one class present");
  return positives;
}

}  // namespace

std::vector<double> average_ranks(const std::vector<double> &values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]])
      ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double metric_mae(const std::vector<double> &predictions, const std::vector<double> &labels) {
  check_lengths(predictions, labels);
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    total += std::abs(predictions[i] - labels[i]);
  return total / static_cast<double>(labels.size());
}

double metric_rocauc(const std::vector<double> &scores, const std::vector<double> &labels) {
  check_lengths(scores, labels);
  const double pos = static_cast<double>(check_binary(labels));
  const double neg = static_cast<double>(labels.size()) - pos;
  // Mann-Whitney U from average ranks; ties contribute one half.
  const std::vector<double> ranks = average_ranks(scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1.0)
      rank_sum += ranks[i];
  }
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

double metric_prauc(const std::vector<double> &scores, const std::vector<double> &labels) {
  check_lengths(scores, labels);
  const double pos = static_cast<double>(check_binary(labels));
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  // Each distinct score is one threshold; tied items enter together.
  double tp = 0.0, seen = 0.0, prev_recall = 0.0, ap = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      tp += labels[order[j]];
      seen += 1.0;
      ++j;
    }
    const double recall = tp / pos;
    ap += (recall - prev_recall) * (tp / seen);
    prev_recall = recall;
    i = j;
  }
  return ap;
}

double metric_spearman(const std::vector<double> &predictions, const std::vector<double> &labels) {
  check_lengths(predictions, labels);
  const std::vector<double> a = average_ranks(predictions);
  const std::vector<double> b = average_ranks(labels);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va == 0.0 || vb == 0.0)
    return 0.0;
  return cov / std::sqrt(va * vb);
}

double compute_metric(Metric metric, const std::vector<double> &predictions,
                      const std::vector<double> &labels) {
  switch (metric) {
  case Metric::kMae: return metric_mae(predictions, labels);
  case Metric::kRocAuc: return metric_rocauc(predictions, labels);
  case Metric::kPrAuc: return metric_prauc(predictions, labels);
  case Metric::kSpearman: return metric_spearman(predictions, labels);
  }
  throw std::logic_error("unhandled metric");
}

void write_metrics_csv(const std::filesystem::path &path, const std::vector<MetricRow> &rows) {
  std::ofstream os(path);
  if (!os)
    throw DataError("cannot write " + path.string());
  os << "task,seed,split,metric,value\n";
  for (const MetricRow &r: rows) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), r.value);
    os << r.task << ',' << r.seed << ',' << r.split << ',' << r.metric << ','
       << std::string(buf, end) << '\n';
  }
  if (!os)
    throw DataError("failed writing " + path.string());
}

}  // namespace molshift
