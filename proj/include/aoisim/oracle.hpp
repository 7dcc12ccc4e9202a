#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "aoisim/analytics.hpp"
#include "aoisim/error.hpp"
#include "aoisim/failure_detector.hpp"
#include "aoisim/metrics.hpp"
#include "aoisim/params.hpp"

// Brute-force checks of the closed forms. Nothing here calls the simplified
// error-rate formula: the error is integrated from the conditional densities,
// and the recovery-time density is itself rebuilt by numerically convolving
// the operational density with the uniform recovery offset.
namespace aoisim::oracle {

inline constexpr double kAbsTolerance = 1e-10;

namespace detail {

// Adaptive Gauss-Kronrod (7/15) over [a, b]; b may be +infinity. Throws
// instead of returning an estimate that missed the tolerance.
template <class F>
double integrate(F&& f, double a, double b, double abs_tol = kAbsTolerance) {
  if (!(b > a)) return 0.0;
  double err = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, /*max_depth=*/15, /*tolerance=*/1e-11, &err);
  if (!std::isfinite(value) || !(err <= abs_tol))
    throw OracleError("quadrature on [" + std::to_string(a) + ", " + std::to_string(b) +
                      "] did not converge: error estimate " + std::to_string(err));
  return value;
}

}  // namespace detail

// Density of z in R2 written out directly.
inline double operational_density(double z, double lambda, double nu) {
  const double c = lambda + nu;
  return c * std::exp(-c * z);
}

// Density of z(f) + U, U ~ Uniform[0, r], by numerical convolution:
// f(z) = (1/r) * integral_0^min(r, z) operational_density(z - u) du.
inline double recovery_density_by_convolution(double z, double lambda, double nu, double r) {
  if (z <= 0.0) return 0.0;
  const double upper = std::min(r, z);
  return detail::integrate(
             [&](double u) { return operational_density(z - u, lambda, nu); }, 0.0, upper) /
         r;
}

// P(s0) P(z > tau | R2) + P(s1) P(z < tau | R3) for the rule "declare a
// failure when z > tau", any tau >= 0 (including +infinity).
inline double quadrature_error_rate(double lambda, double nu, double r, double tau) {
  if (!(lambda > 0.0) || !(nu > 0.0) || !(r > 0.0))
    throw ParameterError("quadrature_error_rate needs lambda, nu, r > 0");
  if (!(tau >= 0.0)) throw ParameterError("tau must be >= 0");
  const double p_failed = r * nu / (1.0 + r * nu);
  const double p_working = 1.0 / (1.0 + r * nu);

  const double inf = std::numeric_limits<double>::infinity();
  const double miss_working =
      std::isinf(tau) ? 0.0
                      : detail::integrate([&](double z) { return operational_density(z, lambda, nu); },
                                          tau, inf);

  // The recovery density has a kink at z = r; integrate the pieces separately.
  auto g = [&](double z) { return recovery_density_by_convolution(z, lambda, nu, r); };
  double miss_failed = detail::integrate(g, 0.0, std::min(tau, r));
  if (tau > r) miss_failed += detail::integrate(g, r, tau);

  return p_working * miss_working + p_failed * miss_failed;
}

// Grid argmin of quadrature_error_rate; ties keep the first grid point.
inline double scan_optimal_threshold(double lambda, double nu, double r,
                                     std::span<const double> grid) {
  if (grid.empty()) throw ParameterError("threshold grid is empty");
  double best = grid.front();
  double best_err = std::numeric_limits<double>::infinity();
  for (double tau : grid) {
    if (!(tau >= 0.0)) throw ParameterError("threshold grid values must be >= 0");
    const double e = quadrature_error_rate(lambda, nu, r, tau);
    if (e < best_err) {
      best_err = e;
      best = tau;
    }
  }
  return best;
}

// start, start + step, ... up to stop (inclusive within half a step).
inline std::vector<double> make_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start)) throw ParameterError("grid needs start <= stop, step > 0");
  std::vector<double> g;
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 0.5));
  for (std::size_t i = 0; i <= n; ++i) g.push_back(start + static_cast<double>(i) * step);
  return g;
}

struct CrossCheckReport {
  SimParams params;
  DecisionRule rule;
  std::uint64_t periods_without_delivery = 0;

  double aoi_analytic = 0.0;
  double aoi_empirical = 0.0;
  double aoi_rel_dev = 0.0;
  double aoi_ci = 0.0;

  double err_analytic = 0.0;
  bool err_degenerate = false;
  // Error over R2 and R3, the span the closed form describes.
  double err_empirical = 0.0;
  double err_rel_dev = 0.0;
  double err_ci = 0.0;
  double fp_rate = 0.0;
  double fn_rate = 0.0;
  // Error over the whole measured span, R1 included.
  double err_empirical_full = 0.0;
  double err_full_rel_dev = 0.0;
  double err_full_ci = 0.0;

  RegionAverages regions;
  analytics::RegionMeans region_analytic{};
};

// Simulates, measures, and sets the results against the closed forms.
inline CrossCheckReport monte_carlo_cross_check(const SimParams& params, const DecisionRule& rule,
                                                unsigned threads = 0,
                                                std::size_t resamples = 1000) {
  validate(params, /*require_stable=*/true);
  const auto m = run_metrics(params, {rule}, threads);
  const auto ci = bootstrap_intervals(m, resamples);
  const auto an = analytics::report(params);
  const auto& e = m.errors.front();

  CrossCheckReport rep;
  rep.params = params;
  rep.rule = rule;
  rep.periods_without_delivery = m.periods_without_delivery;
  rep.aoi_analytic = an.mean_aoi;
  rep.aoi_empirical = m.mean_aoi();
  rep.aoi_rel_dev = std::abs(rep.aoi_empirical - rep.aoi_analytic) / rep.aoi_analytic;
  rep.aoi_ci = ci.aoi;

  rep.err_analytic = an.error_rate;
  rep.err_degenerate = an.degenerate;
  rep.err_empirical = e.error_rate_excluding_r1();
  rep.err_rel_dev = std::abs(rep.err_empirical - rep.err_analytic) / rep.err_analytic;
  rep.err_ci = ci.error_no_r1.front();
  const double span = e.measured_time - e.r1_time;
  rep.fp_rate = (e.false_positive_time - e.r1_false_positive_time) / span;
  rep.fn_rate = e.false_negative_time / span;
  rep.err_empirical_full = e.error_rate;
  rep.err_full_rel_dev = std::abs(e.error_rate - rep.err_analytic) / rep.err_analytic;
  rep.err_full_ci = ci.error.front();

  rep.regions = m.regions;
  rep.region_analytic = an.region_means;
  return rep;
}

}  // namespace aoisim::oracle
