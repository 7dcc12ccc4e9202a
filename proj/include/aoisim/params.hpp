#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>

#include "aoisim/error.hpp"

namespace aoisim {

// Model parameters of the failing-sensor status update system.
//
// Rates are in 1/seconds, the recovery duration in seconds. The defaults are
// the reference configuration: lambda = 1/2, mu = 1, E[T] = 1/nu = 200,
// r = 20 and 1e5 failure/recovery periods.
struct SimParams {
  double lambda = 0.5;   // update generation rate
  double mu = 1.0;       // service rate of the FCFS queue
  double nu = 0.005;     // failure hazard rate
  double r = 20.0;       // deterministic recovery duration
  std::uint64_t periods = 100000;
  std::uint64_t master_seed = 20240101;
  bool enforce_assumption3 = false;  // resample periods without a delivery

  double rho() const { return lambda / mu; }
  double expected_failure_time() const { return 1.0 / nu; }
  bool stable() const { return rho() < 1.0; }
};

namespace detail {

inline bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

inline std::string describe(const char* name, double value, const char* constraint) {
  std::ostringstream os;
  os << name << " = " << value << " violates " << constraint;
  return os.str();
}

}  // namespace detail

// Throws ParameterError naming the first violated constraint. With
// `require_stable`, also enforces 0 < lambda/mu < 1, which analytics and
// detection rely on (departures of a stable M/M/1 queue are Poisson).
inline void validate(const SimParams& p, bool require_stable = false) {
  if (!detail::positive_finite(p.lambda))
    throw ParameterError(detail::describe("lambda", p.lambda, "lambda > 0"));
  if (!detail::positive_finite(p.mu))
    throw ParameterError(detail::describe("mu", p.mu, "mu > 0"));
  if (!detail::positive_finite(p.nu))
    throw ParameterError(detail::describe("nu", p.nu, "nu > 0"));
  if (!std::isfinite(p.r) || p.r < 0.0)
    throw ParameterError(detail::describe("r", p.r, "r >= 0"));
  if (p.periods < 1)
    throw ParameterError("periods = 0 violates periods >= 1");
  if (require_stable && !(p.rho() < 1.0))
    throw ParameterError(
        detail::describe("rho = lambda/mu", p.rho(), "0 < rho < 1 (queue stability)"));
}

}  // namespace aoisim
