//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molshift/featstats/shift.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "molshift/errors.hpp"
#include "molshift/trainpipe/parallel.hpp"

namespace molshift {
namespace {

std::string fmt(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

std::ofstream open_csv(const std::filesystem::path &path) {
  std::ofstream os(path);
  if (!os)
    throw DataError("cannot write " + path.string());
  return os;
}

// sum p ln(p / q) over p > 0.
double kl_sum(const std::vector<double> &p, const std::vector<double> &q) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0)
      sum += p[i] * std::log(p[i] / q[i]);
  }
  return sum;
}

}  // namespace

std::vector<double> Histogram::probabilities() const {
  std::vector<double> p(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i)
    p[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
  return p;
}

std::vector<Histogram> histogram_set(const std::vector<std::vector<double>> &samples, int bins) {
  if (bins < 1)
    throw std::invalid_argument("histogram needs at least one bin");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto &s: samples) {
    if (s.empty())
      throw std::invalid_argument("histogram of an empty sample");
    for (double v: s) {
      if (!std::isfinite(v))
        throw DataError("histogram of a non-finite value");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  std::vector<double> edges;
  if (!(hi > lo)) {
    bins = 1;
    edges = { lo - 0.5, lo + 0.5 };
  } else {
    edges.resize(static_cast<std::size_t>(bins) + 1);
    const double width = (hi - lo) / bins;
    for (int i = 0; i <= bins; ++i)
      edges[static_cast<std::size_t>(i)] = lo + i * width;
    edges.back() = hi;
  }
  const double lo_edge = edges.front();
  const double width = (edges.back() - lo_edge) / bins;

  std::vector<Histogram> out;
  for (const auto &s: samples) {
    Histogram h;
    h.edges = edges;
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    for (double v: s) {
      int b = static_cast<int>((v - lo_edge) / width);
      b = std::clamp(b, 0, bins - 1);
      ++h.counts[static_cast<std::size_t>(b)];
    }
    h.total = s.size();
    out.push_back(std::move(h));
  }
  return out;
}

std::pair<Histogram, Histogram> histogram_pair(const std::vector<double> &a,
                                               const std::vector<double> &b, int bins) {
  std::vector<Histogram> both = histogram_set({ a, b }, bins);
  return { std::move(both[0]), std::move(both[1]) };
}

std::string to_string(ShiftMetric metric) {
  switch (metric) {
  case ShiftMetric::kKl:
    return "KL";
  case ShiftMetric::kJs:
    return "JS";
  case ShiftMetric::kEmd:
    return "EMD";
  case ShiftMetric::kTv:
    return "TV";
  case ShiftMetric::kHellinger:
    return "Hellinger";
  }
  return "?";
}

double Divergences::operator[](ShiftMetric metric) const {
  switch (metric) {
  case ShiftMetric::kKl:
    return kl;
  case ShiftMetric::kJs:
    return js;
  case ShiftMetric::kEmd:
    return emd;
  case ShiftMetric::kTv:
    return tv;
  case ShiftMetric::kHellinger:
    return hellinger;
  }
  return 0.0;
}

Divergences divergences(const Histogram &hp, const Histogram &hq) {
  if (hp.edges != hq.edges)
    throw std::invalid_argument("divergences need histograms on identical edges");
  if (hp.total == 0 || hq.total == 0)
    throw std::invalid_argument("divergences of an empty histogram");
  const std::vector<double> p = hp.probabilities();
  const std::vector<double> q = hq.probabilities();
  const std::size_t k = p.size();
  Divergences out;

  const double norm = 1.0 + static_cast<double>(k) * kKlSmoothing;
  std::vector<double> ps(k), qs(k), m(k);
  for (std::size_t i = 0; i < k; ++i) {
    ps[i] = (p[i] + kKlSmoothing) / norm;
    qs[i] = (q[i] + kKlSmoothing) / norm;
    m[i] = 0.5 * (p[i] + q[i]);
  }
  out.kl = std::max(0.0, kl_sum(ps, qs));
  out.js = std::clamp(0.5 * kl_sum(p, m) + 0.5 * kl_sum(q, m), 0.0, std::log(2.0));

  const double width = (hp.edges.back() - hp.edges.front()) / static_cast<double>(k);
  double cdf_p = 0.0, cdf_q = 0.0, emd = 0.0, tv = 0.0, h2 = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    cdf_p += p[i];
    cdf_q += q[i];
    emd += std::abs(cdf_p - cdf_q);
    tv += std::abs(p[i] - q[i]);
    const double r = std::sqrt(p[i]) - std::sqrt(q[i]);
    h2 += r * r;
  }
  out.emd = emd * width;
  out.tv = std::min(1.0, 0.5 * tv);
  out.hellinger = std::min(1.0, std::sqrt(0.5 * h2));
  return out;
}

std::string ShiftReport::split_pair() const {
  return to_string(first) + "-" + to_string(second);
}

ShiftReport split_shift(const FeatureMatrix &first, const FeatureMatrix &second, int bins) {
  if (first.dims() != second.dims())
    throw DataError("feature widths differ: " + std::to_string(first.dims()) + " vs "
                    + std::to_string(second.dims()));
  if (first.model != second.model)
    throw DataError("split_shift compares splits of one model");
  if (first.rows() == 0 || second.rows() == 0)
    throw DataError("split_shift: a split has no feature rows");
  ShiftReport report;
  report.model = first.model;
  report.first = first.split;
  report.second = second.split;
  report.dims.resize(static_cast<std::size_t>(first.dims()));
  parallel_for(report.dims.size(), [&](std::size_t d) {
    const int dim = static_cast<int>(d);
    const auto [p, q] = histogram_pair(first.column(dim), second.column(dim), bins);
    report.dims[d] = divergences(p, q);
  });
  return report;
}

DifferencedShift shift_report(const FeatureMatrix &a_first, const FeatureMatrix &a_second,
                              const FeatureMatrix &b_first, const FeatureMatrix &b_second,
                              int bins) {
  if (a_first.dims() != b_first.dims())
    throw DataError("models differ in feature width: " + std::to_string(a_first.dims()) + " vs "
                    + std::to_string(b_first.dims()));
  if (a_first.split != b_first.split || a_second.split != b_second.split)
    throw DataError("models must be compared on the same split pair");
  DifferencedShift out;
  out.a = split_shift(a_first, a_second, bins);
  out.b = split_shift(b_first, b_second, bins);
  out.delta.resize(out.a.dims.size());
  for (std::size_t d = 0; d < out.delta.size(); ++d) {
    const Divergences &x = out.a.dims[d];
    const Divergences &y = out.b.dims[d];
    out.delta[d] = { x.kl - y.kl, x.js - y.js, x.emd - y.emd, x.tv - y.tv,
                     x.hellinger - y.hellinger };
  }
  return out;
}

void write_shift_csv(const std::filesystem::path &path, const std::vector<ShiftReport> &reports) {
  std::ofstream os = open_csv(path);
  os << "dimension,metric,split_pair,model,value\n";
  for (const ShiftReport &r: reports) {
    for (std::size_t d = 0; d < r.dims.size(); ++d) {
      for (ShiftMetric m: kShiftMetrics) {
        os << d << "," << to_string(m) << "," << r.split_pair() << "," << to_string(r.model)
           << "," << fmt(r.dims[d][m]) << "\n";
      }
    }
  }
}

void write_delta_csv(const std::filesystem::path &path, const DifferencedShift &report) {
  std::ofstream os = open_csv(path);
  os << "dimension,metric,delta\n";
  for (std::size_t d = 0; d < report.delta.size(); ++d) {
    for (ShiftMetric m: kShiftMetrics)
      os << d << "," << to_string(m) << "," << fmt(report.delta[d][m]) << "\n";
  }
}

void write_histogram_csv(const std::filesystem::path &path,
                         const std::vector<FeatureMatrix> &splits, int bins, int max_dims) {
  if (splits.empty())
    throw std::invalid_argument("write_histogram_csv needs at least one split");
  std::ofstream os = open_csv(path);
  os << "dimension,bin_left,bin_right,count,model,split\n";
  const int dims = std::min(max_dims, splits.front().dims());
  for (int d = 0; d < dims; ++d) {
    std::vector<std::vector<double>> samples;
    for (const FeatureMatrix &f: splits)
      samples.push_back(f.column(d));
    const std::vector<Histogram> hists = histogram_set(samples, bins);
    for (std::size_t s = 0; s < splits.size(); ++s) {
      const Histogram &h = hists[s];
      for (int b = 0; b < h.bins(); ++b) {
        os << d << "," << fmt(h.edges[static_cast<std::size_t>(b)]) << ","
           << fmt(h.edges[static_cast<std::size_t>(b) + 1]) << ","
           << h.counts[static_cast<std::size_t>(b)] << "," << to_string(splits[s].model) << ","
           << to_string(splits[s].split) << "\n";
      }
    }
  }
}

}  // namespace molshift
