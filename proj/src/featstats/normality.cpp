//
// Project molshift - Copyright 2026 The molshift Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molshift/featstats/normality.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "molshift/errors.hpp"
#include "molshift/trainpipe/parallel.hpp"

namespace molshift {
namespace {

double poly(const double *c, int order, double x) {
  double result = c[0];
  if (order > 1) {
    double p = x * c[order - 1];
    for (int j = order - 2; j > 0; --j)
      p = (p + c[j]) * x;
    result += p;
  }
  return result;
}

std::string fmt(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

}  // namespace

double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::invalid_argument("normal_quantile: p must lie in (0, 1)");
  // Wichura (1988), algorithm AS 241, PPND16.
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q
           * (((((((2509.0809287301226727 * r + 33430.575583588128105) * r
                   + 67265.770927008700853) * r + 45921.953931549871457) * r
                 + 13731.693765509461125) * r + 1971.5909503065514427) * r
               + 133.14166789178437745) * r + 3.387132872796366608)
           / (((((((5226.495278852545925 * r + 28729.085735721942674) * r
                   + 39307.89580009271061) * r + 21213.794301586595867) * r
                 + 5394.1960214247511077) * r + 687.1870074920579083) * r
               + 42.313330701600911252) * r + 1.0);
  }
  double r = q < 0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r
                  + 0.24178072517745061177) * r + 1.27045825245236838258) * r
                + 3.64784832476320460504) * r + 5.7694972214606914055) * r
              + 4.6303378461565452959) * r + 1.42343711074968357734)
            / (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r
                    + 0.0151986665636164571966) * r + 0.14810397642748007459) * r
                  + 0.68976733498510000455) * r + 1.6763848301838038494) * r
                + 2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
                  + 0.0012426609473880784386) * r + 0.026532189526576123093) * r
                + 0.29656057182850489123) * r + 1.7848265399172913358) * r
              + 5.4637849111641143699) * r + 6.6579046435011037772)
            / (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r
                    + 1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r
                  + 0.0148753612908506148525) * r + 0.13692988092273580531) * r
                + 0.59983220655588793769) * r + 1.0);
  }
  return q < 0 ? -value : value;
}

ShapiroWilk shapiro_wilk(std::vector<double> x, std::uint64_t subsample_seed) {
  if (x.size() < 3)
    throw std::invalid_argument("shapiro_wilk needs at least 3 values, got "
                                + std::to_string(x.size()));
  for (double v: x) {
    if (!std::isfinite(v))
      throw DataError("shapiro_wilk: sample holds a non-finite value");
  }
  if (x.size() > kShapiroMaxN) {
    std::vector<double> picked;
    picked.reserve(kShapiroMaxN);
    std::mt19937_64 rng(subsample_seed);
    std::sample(x.begin(), x.end(), std::back_inserter(picked), kShapiroMaxN, rng);
    x = std::move(picked);
  }
  std::sort(x.begin(), x.end());
  const int n = static_cast<int>(x.size());
  const double an = n;
  const int nn2 = n / 2;

  const double range = x.back() - x.front();
  if (range < 1e-19 * std::max(1.0, std::abs(x.front())))
    throw DataError("degenerate sample: all values equal");

  // Coefficients a[1..nn2] for the upper half, Royston (1992).
  std::vector<double> a(static_cast<std::size_t>(nn2) + 1, 0.0);
  if (n == 3) {
    a[1] = std::sqrt(0.5);
  } else {
    static const double c1[6] = { 0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056 };
    static const double c2[6] = { 0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633 };
    const double an25 = an + 0.25;
    double summ2 = 0.0;
    for (int i = 1; i <= nn2; ++i) {
      a[i] = normal_quantile((i - 0.375) / an25);
      summ2 += a[i] * a[i];
    }
    summ2 *= 2.0;
    const double ssumm2 = std::sqrt(summ2);
    const double rsn = 1.0 / std::sqrt(an);
    const double a1 = poly(c1, 6, rsn) - a[1] / ssumm2;
    int i1;
    double fac;
    if (n > 5) {
      i1 = 3;
      const double a2 = -a[2] / ssumm2 + poly(c2, 6, rsn);
      fac = std::sqrt((summ2 - 2.0 * a[1] * a[1] - 2.0 * a[2] * a[2])
                      / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
      a[2] = a2;
    } else {
      i1 = 2;
      fac = std::sqrt((summ2 - 2.0 * a[1] * a[1]) / (1.0 - 2.0 * a1 * a1));
    }
    a[1] = a1;
    for (int i = i1; i <= nn2; ++i)
      a[i] /= -fac;
  }

  // W as the squared correlation of the ordered sample with the coefficients;
  // w1 = 1 - W is formed directly to keep precision near W = 1.
  auto coef = [&](int i) {
    const int j = n - 1 - i;
    if (i == j)
      return 0.0;
    return i < j ? -a[static_cast<std::size_t>(i) + 1] : a[static_cast<std::size_t>(j) + 1];
  };
  double sa = 0.0, sx = 0.0;
  for (int i = 0; i < n; ++i) {
    sa += coef(i);
    sx += x[i] / range;
  }
  sa /= n;
  sx /= n;
  double ssa = 0.0, ssx = 0.0, sax = 0.0;
  for (int i = 0; i < n; ++i) {
    const double asa = coef(i) - sa;
    const double xsx = x[i] / range - sx;
    ssa += asa * asa;
    ssx += xsx * xsx;
    sax += asa * xsx;
  }
  const double ssassx = std::sqrt(ssa * ssx);
  const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
  ShapiroWilk out;
  out.w = 1.0 - w1;

  if (n == 3) {
    const double pi6 = 6.0 / M_PI;
    const double stqr = M_PI / 3.0;
    out.p = std::max(0.0, pi6 * (std::asin(std::sqrt(out.w)) - stqr));
    return out;
  }
  static const double g[2] = { -2.273, 0.459 };
  static const double c3[4] = { 0.544, -0.39978, 0.025054, -6.714e-4 };
  static const double c4[4] = { 1.3822, -0.77857, 0.062767, -0.0020322 };
  static const double c5[4] = { -1.5861, -0.31082, -0.083751, 0.0038915 };
  static const double c6[3] = { -0.4803, -0.082676, 0.0030302 };
  double y = std::log(w1);
  double m, s;
  if (n <= 11) {
    const double gamma = poly(g, 2, an);
    if (y >= gamma) {
      out.p = 1e-99;
      return out;
    }
    y = -std::log(gamma - y);
    m = poly(c3, 4, an);
    s = std::exp(poly(c4, 4, an));
  } else {
    const double xx = std::log(an);
    m = poly(c5, 4, xx);
    s = std::exp(poly(c6, 3, xx));
  }
  out.p = 0.5 * std::erfc((y - m) / s / std::sqrt(2.0));
  return out;
}

double kolmogorov_sf(double lambda) {
  if (lambda <= 0.0)
    return 1.0;
  // The alternating series converges slowly for small lambda; use the
  // Jacobi-theta form of the CDF there.
  if (lambda < 1.18) {
    const double y = std::exp(-M_PI * M_PI / (8.0 * lambda * lambda));
    double sum = 0.0;
    for (int k = 1; k <= 9; k += 2)
      sum += std::pow(y, k * k);
    return std::clamp(1.0 - std::sqrt(2.0 * M_PI) / lambda * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-300)
      break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_sup_distance(const std::vector<double> &sorted, double (*cdf)(double)) {
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({ d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n });
  }
  return d;
}

KsResult ks_normal(const std::vector<double> &sample) {
  if (sample.size() < 8)
    throw std::invalid_argument("ks_normal needs at least 8 values, got "
                                + std::to_string(sample.size()));
  const auto [mean, std] = mean_and_std(sample);
  if (!(std > 0.0))
    throw DataError("degenerate sample: zero variance");
  std::vector<double> z(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i)
    z[i] = (sample[i] - mean) / std;
  std::sort(z.begin(), z.end());
  KsResult out;
  out.d = ks_sup_distance(z, normal_cdf);
  out.p = kolmogorov_sf(std::sqrt(static_cast<double>(z.size())) * out.d);
  return out;
}

std::pair<double, double> mean_and_std(const std::vector<double> &values) {
  if (values.empty())
    throw std::invalid_argument("mean_and_std of an empty sequence");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double sq = 0.0;
  for (double v: values)
    sq += (v - mean) * (v - mean);
  return { mean, std::sqrt(sq / n) };
}

NormalityReport normality_report(const FeatureMatrix &features, std::uint64_t seed) {
  NormalityReport report;
  report.model = features.model;
  report.split = features.split;
  report.dims.resize(static_cast<std::size_t>(features.dims()));
  parallel_for(report.dims.size(), [&](std::size_t d) {
    DimensionNormality &dim = report.dims[d];
    dim.dimension = static_cast<int>(d);
    const std::vector<double> column = features.column(static_cast<int>(d));
    try {
      dim.shapiro = shapiro_wilk(column, seed + d);
      if (column.size() >= 8)
        dim.ks = ks_normal(column);
      else
        dim.note = "too few rows for KS";
    } catch (const DataError &) {
      dim.note = "degenerate";
    } catch (const std::invalid_argument &) {
      dim.note = "too few rows";
    }
  });
  return report;
}

std::pair<double, double> normality_summary(const NormalityReport &report) {
  std::vector<double> p;
  for (const DimensionNormality &d: report.dims) {
    if (d.shapiro)
      p.push_back(d.shapiro->p);
  }
  if (p.empty())
    throw std::invalid_argument("normality_summary: no dimension has a Shapiro-Wilk result");
  return mean_and_std(p);
}

void write_normality_csv(const std::filesystem::path &path,
                         const std::vector<NormalityReport> &reports) {
  std::ofstream os(path);
  if (!os)
    throw DataError("cannot write " + path.string());
  os << "dimension,model,split,test,statistic,p_value,note\n";
  for (const NormalityReport &r: reports) {
    const std::string prefix = "," + to_string(r.model) + "," + to_string(r.split) + ",";
    for (const DimensionNormality &d: r.dims) {
      if (d.shapiro) {
        os << d.dimension << prefix << "shapiro_wilk," << fmt(d.shapiro->w) << ","
           << fmt(d.shapiro->p) << "," << d.note << "\n";
      }
      if (d.ks) {
        os << d.dimension << prefix << "ks_normal," << fmt(d.ks->d) << "," << fmt(d.ks->p) << ","
           << kKsCaveat << "\n";
      }
      if (!d.shapiro && !d.ks)
        os << d.dimension << prefix << "none,,," << d.note << "\n";
    }
  }
}

}  // namespace molshift
