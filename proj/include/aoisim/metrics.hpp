#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "aoisim/aoi_metrics.hpp"
#include "aoisim/failure_detector.hpp"
#include "aoisim/segments.hpp"
#include "aoisim/sim_core.hpp"
#include "aoisim/stats.hpp"

namespace aoisim {

// Burke sample: per period, the gap after delivery number kBurkeWarmup (the
// queue has forgotten its empty start by then), kept only when the failure
// comes at least kBurkeGuardGaps mean gaps after that delivery. The guard does
// not look at the gap itself; requiring the gap to end before the failure
// would favour short gaps and shift the observed rate to lambda + nu.
inline constexpr std::size_t kBurkeWarmup = 24;
inline constexpr double kBurkeGuardGaps = 20.0;

// Appends the Burke-sample gap of `p`, if it has one.
inline void collect_burke_gap(const PeriodTrace& p, double lambda, std::vector<double>& out) {
  if (p.delivered() <= kBurkeWarmup + 1) return;
  if (p.failure_time - p.arrivals[kBurkeWarmup] <= kBurkeGuardGaps / lambda) return;
  out.push_back(p.arrivals[kBurkeWarmup + 1] - p.arrivals[kBurkeWarmup]);
}

// Everything measured from one simulated configuration, gathered in a single
// streaming pass so the full timeline never has to be held in memory.
//
// Per-period columns are kept for the bootstrap: periods are the iid unit.
struct RunMetrics {
  SimParams params;
  bool unstable = false;
  RegionAverages regions;
  std::vector<DecisionRule> rules;
  std::vector<ErrorBreakdown> errors;  // one per rule

  std::uint64_t deliveries = 0;
  std::uint64_t discarded = 0;
  std::uint64_t periods_without_delivery = 0;

  std::vector<double> period_area;        // age integral over the measured part
  std::vector<double> period_time;        // measured time
  std::vector<double> period_time_no_r1;  // measured time outside R1
  // Row-major [period][rule].
  std::vector<double> period_mismatch;
  std::vector<double> period_mismatch_no_r1;

  std::vector<double> failure_durations;  // T_p
  std::vector<double> burke_gaps;         // one steady-state inter-arrival gap per period

  double mean_aoi() const { return regions.overall(); }
};

namespace detail {

struct PeriodMeasure {
  double area = 0.0, time = 0.0, time_no_r1 = 0.0;
};

}  // namespace detail

// Simulates `params` and measures age and the error of each rule.
inline RunMetrics run_metrics(const SimParams& params, std::vector<DecisionRule> rules,
                              unsigned threads = 0) {
  RunMetrics m;
  m.params = params;
  m.unstable = !params.stable();
  m.rules = std::move(rules);
  const std::size_t k = m.rules.size();

  RegionAoiAccumulator regions;
  std::vector<ErrorAccumulator> errors;
  for (const auto& r : m.rules) errors.emplace_back(r);

  m.period_area.reserve(params.periods);
  m.period_time.reserve(params.periods);
  m.period_time_no_r1.reserve(params.periods);
  m.period_mismatch.reserve(params.periods * k);
  m.period_mismatch_no_r1.reserve(params.periods * k);
  m.failure_durations.reserve(params.periods);

  WalkState walk;
  std::vector<double> mis(k), mis_no_r1(k);

  for_each_period(
      params,
      [&](PeriodTrace&& p) {
        regions.add(p);
        m.deliveries += p.delivered();
        m.discarded += p.discarded_count;
        if (!p.has_delivery()) ++m.periods_without_delivery;
        m.failure_durations.push_back(p.failure_time - p.start_time);
        collect_burke_gap(p, params.lambda, m.burke_gaps);

        detail::PeriodMeasure pm;
        std::fill(mis.begin(), mis.end(), 0.0);
        std::fill(mis_no_r1.begin(), mis_no_r1.end(), 0.0);
        walk_period(p, walk, [&](const Segment& s) {
          const double len = s.length();
          pm.area += s.age_area();
          pm.time += len;
          if (s.region != Region::r1) pm.time_no_r1 += len;
          for (std::size_t j = 0; j < k; ++j) {
            errors[j].add(s);
            const double declared = declared_failure_time(s, m.rules[j]);
            const double wrong = s.region == Region::r3 ? len - declared : declared;
            mis[j] += wrong;
            if (s.region != Region::r1) mis_no_r1[j] += wrong;
          }
        });
        m.period_area.push_back(pm.area);
        m.period_time.push_back(pm.time);
        m.period_time_no_r1.push_back(pm.time_no_r1);
        m.period_mismatch.insert(m.period_mismatch.end(), mis.begin(), mis.end());
        m.period_mismatch_no_r1.insert(m.period_mismatch_no_r1.end(), mis_no_r1.begin(),
                                       mis_no_r1.end());
      },
      threads);

  m.regions = regions.result();
  for (const auto& e : errors) m.errors.push_back(e.result());
  return m;
}

// 95% bootstrap half-widths of the age average and of every rule's error rate
// (full span and excluding R1), resampling periods.
struct RunIntervals {
  double aoi = 0.0;
  std::vector<double> error;
  std::vector<double> error_no_r1;
};

inline RunIntervals bootstrap_intervals(const RunMetrics& m, std::size_t resamples = 1000) {
  const std::size_t n = m.period_time.size();
  const std::size_t k = m.rules.size();
  const std::size_t ratios = 1 + 2 * k;
  std::vector<double> table;
  table.reserve(n * 2 * ratios);
  for (std::size_t i = 0; i < n; ++i) {
    table.push_back(m.period_area[i]);
    table.push_back(m.period_time[i]);
    for (std::size_t j = 0; j < k; ++j) {
      table.push_back(m.period_mismatch[i * k + j]);
      table.push_back(m.period_time[i]);
      table.push_back(m.period_mismatch_no_r1[i * k + j]);
      table.push_back(m.period_time_no_r1[i]);
    }
  }
  const auto hw = stats::bootstrap_ratio_halfwidths(table, ratios, resamples,
                                                    m.params.master_seed ^ 0xb0075742ULL);
  RunIntervals out;
  out.aoi = hw[0];
  for (std::size_t j = 0; j < k; ++j) {
    out.error.push_back(hw[1 + 2 * j]);
    out.error_no_r1.push_back(hw[2 + 2 * j]);
  }
  return out;
}

}  // namespace aoisim
