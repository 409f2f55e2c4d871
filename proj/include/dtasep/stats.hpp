#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dtasep/errors.hpp"

namespace dtasep {

struct MeanSem {
  double mean = 0.0;
  double sem = 0.0;
  std::size_t count = 0;
};

// Sample mean and standard error of the mean (n-1 variance).
inline MeanSem mean_sem(std::span<const double> xs) {
  MeanSem out;
  out.count = xs.size();
  if (xs.empty()) return out;
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;
  for (double x : xs) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  out.mean = mean;
  if (n > 1) out.sem = std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n));
  return out;
}

inline double combined_sem(double a, double b) { return std::hypot(a, b); }

/// Kolmogorov limiting survival function Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2).
inline double kolmogorov_survival(double lambda) {
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * lambda * lambda);
    sum += term;
    if (std::abs(term) < 1e-16 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t samples = 0;
};

/// One-sample Kolmogorov-Smirnov test of `sample` against a continuous CDF.
/// The p-value uses the asymptotic distribution with Stephens' small-sample
/// correction to the scaling.
template <class Cdf>
KsResult ks_test(std::vector<double> sample, Cdf&& cdf) {
  if (sample.empty()) throw ParameterError("KS test needs at least one sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t k = 0; k < sample.size(); ++k) {
    const double f = cdf(sample[k]);
    d = std::max({d, static_cast<double>(k + 1) / n - f, f - static_cast<double>(k) / n});
  }
  const double sqrt_n = std::sqrt(n);
  return {d, kolmogorov_survival((sqrt_n + 0.12 + 0.11 / sqrt_n) * d), sample.size()};
}

}  // namespace dtasep
