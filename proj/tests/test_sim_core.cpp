#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "aoisim/sim_core.hpp"
#include "aoisim/stats.hpp"

namespace aoisim {
namespace {

SimParams small_params(std::uint64_t periods = 200, std::uint64_t seed = 7) {
  SimParams p;
  p.periods = periods;
  p.master_seed = seed;
  return p;
}

TEST(GeneratePeriod, HandComputedFcfsRecursion) {
  // d = (0, 1.0, 1.5), S = (2.0, 0.4, 1.0), T = 5, r = 2.
  SimParams p;
  p.r = 2.0;
  FixedDraws draws({5.0}, {1.0, 0.5}, {2.0, 0.4, 1.0});
  const auto t = generate_period(p, draws, 0.0);
  EXPECT_EQ(t.generations, (std::vector<double>{0.0, 1.0, 1.5}));
  EXPECT_EQ(t.arrivals, (std::vector<double>{2.0, 2.4, 3.4}));
  EXPECT_EQ(t.discarded_count, 0u);
  EXPECT_EQ(t.failure_time, 5.0);
  EXPECT_EQ(t.recovery_end, 7.0);
}

TEST(GeneratePeriod, FailureBeforeFirstServiceDiscards) {
  SimParams p;
  p.r = 1.0;
  FixedDraws draws({2.0}, {}, {3.0});
  const auto t = generate_period(p, draws, 0.0);
  EXPECT_TRUE(t.arrivals.empty());
  EXPECT_EQ(t.discarded_count, 1u);
  EXPECT_EQ(t.recovery_end, 3.0);
  EXPECT_EQ(t.r1_end(), t.failure_time);
}

TEST(GeneratePeriod, InServicePacketIsDiscardedAtFailure) {
  // Second packet would finish at 4.5 > T = 4.
  SimParams p;
  p.r = 1.0;
  FixedDraws draws({4.0}, {1.0}, {2.0, 2.5});
  const auto t = generate_period(p, draws, 0.0);
  EXPECT_EQ(t.arrivals, (std::vector<double>{2.0}));
  EXPECT_EQ(t.discarded_count, 1u);
}

TEST(GeneratePeriod, ConditionedPeriodsRedrawUntilDelivery) {
  SimParams p;
  p.r = 1.0;
  p.enforce_assumption3 = true;
  FixedDraws draws({2.0, 10.0}, {}, {3.0, 1.0});
  const auto t = generate_period(p, draws, 0.0);
  EXPECT_EQ(t.failure_time, 10.0);
  EXPECT_EQ(t.arrivals, (std::vector<double>{1.0}));
}

TEST(GeneratePeriod, StartOffsetShiftsEverything) {
  SimParams p;
  p.r = 2.0;
  FixedDraws draws({5.0}, {1.0, 0.5}, {2.0, 0.4, 1.0});
  const auto t = generate_period(p, draws, 100.0);
  EXPECT_EQ(t.start_time, 100.0);
  EXPECT_EQ(t.generations.front(), 100.0);
  EXPECT_EQ(t.arrivals, (std::vector<double>{102.0, 102.4, 103.4}));
  EXPECT_EQ(t.recovery_end, 107.0);
}

TEST(GeneratePeriod, EventCapIsAnError) {
  SimParams p;
  FixedDraws draws({100.0}, std::vector<double>(50, 1.0), std::vector<double>(60, 0.1));
  EXPECT_THROW(generate_period(p, draws, 0.0, /*event_cap=*/10), InternalLimitError);
}

TEST(GeneratePeriod, RejectsInvalidParameters) {
  FixedDraws draws({1.0}, {}, {0.1});
  for (auto mutate : std::vector<void (*)(SimParams&)>{
           [](SimParams& p) { p.lambda = 0.0; }, [](SimParams& p) { p.mu = -1.0; },
           [](SimParams& p) { p.nu = 0.0; }, [](SimParams& p) { p.r = -1.0; },
           [](SimParams& p) { p.periods = 0; },
           [](SimParams& p) { p.lambda = std::numeric_limits<double>::quiet_NaN(); }}) {
    SimParams p;
    mutate(p);
    EXPECT_THROW(generate_period(p, draws, 0.0), ParameterError);
  }
}

TEST(SimParamsValidation, StabilityOnlyWhenRequested) {
  SimParams p;
  p.lambda = 1.5;
  EXPECT_NO_THROW(validate(p));
  EXPECT_THROW(validate(p, true), ParameterError);
  p.periods = 3;
  const auto tl = simulate(p, 1);
  EXPECT_TRUE(tl.unstable);
  EXPECT_EQ(tl.periods.size(), 3u);
}

// Structural invariants of random periods, with the recursion re-applied to
// the recorded draws.
TEST(GeneratePeriod, RandomPeriodInvariants) {
  const SimParams p = small_params();
  for (std::uint64_t i = 0; i < 300; ++i) {
    PeriodDraws inner(p, i);
    RecordingDraws rec(inner);
    const double start = 37.25 * static_cast<double>(i);
    const auto t = generate_period(p, rec, start);

    ASSERT_FALSE(t.generations.empty());
    EXPECT_EQ(t.generations.front(), start);
    for (std::size_t k = 1; k < t.generations.size(); ++k)
      EXPECT_LT(t.generations[k - 1], t.generations[k]);
    for (double g : t.generations) EXPECT_LE(g, t.failure_time);

    for (std::size_t k = 1; k < t.arrivals.size(); ++k) EXPECT_LT(t.arrivals[k - 1], t.arrivals[k]);
    for (double a : t.arrivals) EXPECT_LE(a, t.failure_time);

    // a_k = max(d_k, a_{k-1}) + S_k, in local time, exactly.
    double prev = -std::numeric_limits<double>::infinity();
    double local_gen = 0.0;
    for (std::size_t k = 0; k < t.arrivals.size(); ++k) {
      if (k > 0) local_gen += rec.gaps[k - 1];
      prev = std::max(local_gen, prev) + rec.services[k];
      EXPECT_EQ(t.arrivals[k], prev + start);
    }

    EXPECT_EQ(t.generations.size(), t.arrivals.size() + t.discarded_count);
    EXPECT_NEAR(t.recovery_end - t.failure_time, p.r, 4 * std::numeric_limits<double>::epsilon() * t.recovery_end);
    EXPECT_NEAR(t.duration(), rec.failures.back() + p.r,
                4 * std::numeric_limits<double>::epsilon() * t.recovery_end);
  }
}

// The event-driven queue and the recursion agree bit for bit on shared draws.
TEST(LindleyEquivalence, EventDrivenMatchesRecursionExactly) {
  SimParams p = small_params();
  p.lambda = 0.9;  // busy queue, long waits
  for (std::uint64_t i = 0; i < 300; ++i) {
    PeriodDraws inner(p, i);
    RecordingDraws rec(inner);
    const auto t = generate_period(p, rec, 0.0);

    std::vector<double> services = rec.services;
    ExpStream extra(derive_seed(99, i, StreamKind::service));
    while (services.size() < t.generations.size()) services.push_back(extra.exponential(p.mu));

    const auto des = event_driven_departures(t.generations, services, t.failure_time);
    EXPECT_EQ(des, t.arrivals);

    const auto full = lindley_arrivals(t.generations, services);
    const auto full_des = event_driven_departures(t.generations, services);
    EXPECT_EQ(full, full_des);

    // Waiting-time form W_n = max(0, Y_{n-1} - X_n), a_n = d_n + W_n + S_n.
    double y_prev = 0.0;
    for (std::size_t k = 0; k < full.size(); ++k) {
      const double x = k ? t.generations[k] - t.generations[k - 1] : 0.0;
      const double w = k ? std::max(0.0, y_prev - x) : 0.0;
      const double y = w + services[k];
      EXPECT_NEAR(t.generations[k] + y, full[k], 1e-9 * (1.0 + full[k]));
      y_prev = y;
    }
  }
}

TEST(Simulate, SinglePeriodStartsAtZero) {
  const auto tl = simulate(small_params(1), 1);
  ASSERT_EQ(tl.periods.size(), 1u);
  EXPECT_EQ(tl.periods.front().start_time, 0.0);
  EXPECT_EQ(tl.total_time, tl.periods.front().recovery_end);
}

TEST(Simulate, PeriodsAbut) {
  const auto tl = simulate(small_params(500), 1);
  for (std::size_t i = 1; i < tl.periods.size(); ++i)
    EXPECT_EQ(tl.periods[i].start_time, tl.periods[i - 1].recovery_end);
}

bool identical(const Timeline& a, const Timeline& b) {
  if (a.periods.size() != b.periods.size() || a.total_time != b.total_time) return false;
  for (std::size_t i = 0; i < a.periods.size(); ++i) {
    const auto& x = a.periods[i];
    const auto& y = b.periods[i];
    if (x.start_time != y.start_time || x.failure_time != y.failure_time ||
        x.recovery_end != y.recovery_end || x.generations != y.generations ||
        x.arrivals != y.arrivals || x.discarded_count != y.discarded_count)
      return false;
  }
  return true;
}

TEST(Simulate, DeterministicForSeedAndThreadCount) {
  const auto p = small_params(5000, 11);
  const auto serial = simulate(p, 1);
  EXPECT_TRUE(identical(serial, simulate(p, 1)));
  EXPECT_TRUE(identical(serial, simulate(p, 4)));
  EXPECT_TRUE(identical(serial, simulate(p, 7)));
  EXPECT_FALSE(identical(serial, simulate(small_params(5000, 12), 1)));
}

TEST(Simulate, MeanPeriodLengthAtDefaults) {
  SimParams p;  // 1e5 periods
  double total = 0.0;
  std::uint64_t n = 0;
  for_each_period(p, [&](PeriodTrace&& t) {
    total += t.duration();
    ++n;
  });
  const double mean = total / static_cast<double>(n);
  EXPECT_NEAR(mean, 1.0 / p.nu + p.r, 0.02 * 220.0);
}

TEST(Simulate, FailureTimesAreExponential) {
  const auto p = small_params(10000, 3);
  std::vector<double> t;
  for_each_period(p, [&](PeriodTrace&& x) { t.push_back(x.failure_time - x.start_time); });
  EXPECT_GT(stats::ks_test_exponential(t, p.nu).p_value, 0.01);
}

TEST(ExpStream, UniformNeverHitsEndpoints) {
  ExpStream s(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

}  // namespace
}  // namespace aoisim
