#pragma once

#include <cmath>

#include "aoisim/error.hpp"
#include "aoisim/failure_detector.hpp"
#include "aoisim/params.hpp"

namespace aoisim::analytics {

namespace detail {

inline void require_rates(double lambda, double nu) {
  if (!(std::isfinite(lambda) && lambda > 0.0)) throw ParameterError("lambda must be > 0");
  if (!(std::isfinite(nu) && nu > 0.0)) throw ParameterError("nu must be > 0");
}

inline void require_utilization(double rho, double mu) {
  if (!(std::isfinite(mu) && mu > 0.0)) throw ParameterError("mu must be > 0");
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("rho = lambda/mu must lie in (0, 1)");
}

}  // namespace detail

// Density of z(t) while operational: (lambda+nu) exp(-(lambda+nu) z).
inline double pdf_z_given_r2(double z, double lambda, double nu) {
  detail::require_rates(lambda, nu);
  if (!(z >= 0.0)) throw ParameterError("z must be >= 0");
  const double c = lambda + nu;
  return c * std::exp(-c * z);
}

// Density of z(t) during recovery: z(f) + U with U ~ Uniform[0, r].
inline double pdf_z_given_r3(double z, double lambda, double nu, double r) {
  detail::require_rates(lambda, nu);
  if (!(r > 0.0)) throw ParameterError("r must be > 0");
  if (!(z >= 0.0)) throw ParameterError("z must be >= 0");
  const double c = lambda + nu;
  if (z < r) return -std::expm1(-c * z) / r;
  return std::exp(-c * z) * std::expm1(c * r) / r;
}

// P(s1) = r nu / (1 + r nu): fraction of time spent recovering.
inline double prior_s1(double nu, double r) { return r * nu / (1.0 + r * nu); }

struct ErrorRateValue {
  double value;
  bool degenerate;  // tau >= r; value is the always-s0 error prior_s1
};

inline ErrorRateValue error_rate_closed_form(double lambda, double nu, double r) {
  detail::require_rates(lambda, nu);
  if (!(std::isfinite(r) && r >= 0.0)) throw ParameterError("r must be >= 0");
  const double tau = map_threshold(lambda, nu);
  if (tau >= r) return {prior_s1(nu, r), true};
  const double scale = 1.0 + r * nu;
  const double q = nu / (lambda + 2.0 * nu);
  const double false_pos = q / scale;
  const double false_neg = nu / scale * (std::log(lambda / nu + 2.0) + q - 1.0) / (lambda + nu);
  return {false_pos + false_neg, false};
}

// Average age of a failure-free FCFS M/M/1 queue:
// (1/mu)(1 + 1/rho + rho^2/(1-rho)).
inline double aoi_mm1(double rho, double mu) {
  detail::require_utilization(rho, mu);
  return (1.0 + 1.0 / rho + rho * rho / (1.0 - rho)) / mu;
}

// Long-run average age with failures:
// aoi_mm1 + (r^2/2 + r/mu + 1/mu^2) nu / (1 + r nu).
inline double mean_aoi_closed_form(double lambda, double mu, double nu, double r) {
  detail::require_rates(lambda, nu);
  if (!(std::isfinite(r) && r >= 0.0)) throw ParameterError("r must be >= 0");
  const double base = aoi_mm1(lambda / mu, mu);
  return base + (0.5 * r * r + r / mu + 1.0 / (mu * mu)) * nu / (1.0 + r * nu);
}

struct RegionMeans {
  double r1, r2, r3;
};

// Expected time-average age inside each region.
inline RegionMeans region_means_closed_form(double lambda, double mu, double nu, double r) {
  detail::require_rates(lambda, nu);
  if (!(std::isfinite(r) && r >= 0.0)) throw ParameterError("r must be >= 0");
  const double base = aoi_mm1(lambda / mu, mu);
  return {base + r + 0.5 / mu, base, base + 0.5 * r};
}

struct AnalyticReport {
  double tau;
  bool degenerate;
  double error_rate;
  double aoi_mm1;
  double mean_aoi;
  double prior_s1;
  RegionMeans region_means;
};

inline AnalyticReport report(const SimParams& p) {
  validate(p, /*require_stable=*/true);
  const auto err = error_rate_closed_form(p.lambda, p.nu, p.r);
  return {map_threshold(p.lambda, p.nu),
          err.degenerate,
          err.value,
          aoi_mm1(p.rho(), p.mu),
          mean_aoi_closed_form(p.lambda, p.mu, p.nu, p.r),
          prior_s1(p.nu, p.r),
          region_means_closed_form(p.lambda, p.mu, p.nu, p.r)};
}

}  // namespace aoisim::analytics
