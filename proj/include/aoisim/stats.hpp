#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "aoisim/error.hpp"
#include "aoisim/random.hpp"

namespace aoisim::stats {

struct KsResult {
  double statistic;  // sup |F_n - F|
  double p_value;
  std::size_t n;
};

// Asymptotic Kolmogorov tail Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2),
// evaluated at the Stephens-corrected argument (sqrt(n) + 0.12 + 0.11/sqrt(n)) D.
inline double kolmogorov_p_value(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double x = (sn + 0.12 + 0.11 / sn) * d;
  if (x < 1e-3) return 1.0;
  double sum = 0.0, sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = sign * std::exp(-2.0 * k * k * x * x);
    sum += term;
    if (std::abs(term) < 1e-16 * std::abs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

// One-sample Kolmogorov-Smirnov test against a continuous cdf.
inline KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw ParameterError("KS test needs at least one sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return {d, kolmogorov_p_value(d, samples.size()), samples.size()};
}

inline KsResult ks_test_exponential(std::vector<double> samples, double rate) {
  return ks_test(std::move(samples), [rate](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); });
}

// Percentile-bootstrap 95% half-widths, (q97.5 - q2.5)/2, of several ratio
// estimators sum(numerator)/sum(denominator) that share the same iid units.
//
// `table` is row-major with one row per unit and `ratios` (numerator,
// denominator) column pairs per row. Resample b draws its unit indices from
// substream (seed, b).
inline std::vector<double> bootstrap_ratio_halfwidths(std::span<const double> table,
                                                      std::size_t ratios,
                                                      std::size_t resamples,
                                                      std::uint64_t seed) {
  const std::size_t width = 2 * ratios;
  if (ratios == 0 || table.empty() || table.size() % width != 0)
    throw ParameterError("bootstrap table must hold whole rows of (numerator, denominator) pairs");
  if (resamples < 2) throw ParameterError("bootstrap needs >= 2 resamples");
  const std::size_t units = table.size() / width;

  std::vector<std::vector<double>> draws(ratios, std::vector<double>(resamples));
  std::vector<double> sums(width);
  for (std::size_t b = 0; b < resamples; ++b) {
    ExpStream rng(derive_seed(seed, b, StreamKind::bootstrap));
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t i = 0; i < units; ++i) {
      const auto u = std::min(units - 1,
                              static_cast<std::size_t>(rng.uniform() * static_cast<double>(units)));
      const double* row = table.data() + u * width;
      for (std::size_t c = 0; c < width; ++c) sums[c] += row[c];
    }
    for (std::size_t j = 0; j < ratios; ++j) draws[j][b] = sums[2 * j] / sums[2 * j + 1];
  }

  auto quantile = [](const std::vector<double>& v, double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(v.size() - 1, lo + 1);
    const double w = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - w) + v[hi] * w;
  };
  std::vector<double> out(ratios);
  for (std::size_t j = 0; j < ratios; ++j) {
    std::sort(draws[j].begin(), draws[j].end());
    out[j] = 0.5 * (quantile(draws[j], 0.975) - quantile(draws[j], 0.025));
  }
  return out;
}

}  // namespace aoisim::stats
