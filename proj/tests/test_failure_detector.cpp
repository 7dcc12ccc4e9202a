#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "aoisim/failure_detector.hpp"
#include "aoisim/metrics.hpp"
#include "aoisim/sim_core.hpp"

namespace aoisim {
namespace {

PeriodTrace make_period(double start, double failure, double r, std::vector<double> gens,
                        std::vector<double> arrivals) {
  PeriodTrace p;
  p.start_time = start;
  p.failure_time = failure;
  p.recovery_end = failure + r;
  p.generations = std::move(gens);
  p.arrivals = std::move(arrivals);
  p.discarded_count = p.generations.size() - p.arrivals.size();
  return p;
}

Timeline single(PeriodTrace p) {
  Timeline tl;
  tl.total_time = p.recovery_end;
  tl.periods.push_back(std::move(p));
  return tl;
}

TEST(MapThreshold, ReferenceConfiguration) {
  EXPECT_NEAR(map_threshold(0.5, 0.005), 9.16, 0.005);
}

TEST(MapThreshold, LogArgumentOfE) {
  // lambda/nu + 2 = e, so tau = 1 / (lambda + nu) = 1 / (e - 1).
  const double e = std::numbers::e;
  EXPECT_NEAR(map_threshold(e - 2.0, 1.0), 1.0 / (e - 1.0), 1e-12);
  EXPECT_NEAR(map_threshold(e - 2.0, 1.0), 0.58198, 1e-5);
}

TEST(MapThreshold, ScalesInverselyWithRates) {
  for (double c : {0.1, 2.0, 37.0})
    EXPECT_NEAR(map_threshold(c * 0.3, c * 0.01), map_threshold(0.3, 0.01) / c,
                1e-12 * map_threshold(0.3, 0.01) / c);
}

TEST(MapThreshold, RejectsNonPositiveRates) {
  EXPECT_THROW(map_threshold(0.0, 0.1), ParameterError);
  EXPECT_THROW(map_threshold(0.5, -0.1), ParameterError);
}

TEST(DecisionRule, MapIsDegenerateExactlyWhenTauReachesR) {
  const double tau = map_threshold(0.5, 0.005);
  EXPECT_FALSE(DecisionRule::map(0.5, 0.005, 20.0).degenerate);
  EXPECT_TRUE(DecisionRule::map(0.5, 0.005, tau).degenerate);
  EXPECT_TRUE(DecisionRule::map(0.5, 0.005, 5.0).degenerate);
}

TEST(Decide, Branches) {
  const auto rule = DecisionRule::map(0.5, 0.005, 20.0);
  EXPECT_EQ(decide(0.0, rule), SensorState::s0);
  EXPECT_EQ(decide(rule.tau, rule), SensorState::s0);  // tie goes to s0
  EXPECT_EQ(decide(rule.tau + 0.001, rule), SensorState::s1);
  const auto degenerate = DecisionRule::map(0.5, 0.005, 2.0);
  for (double z : {0.0, 5.0, 1e6}) EXPECT_EQ(decide(z, degenerate), SensorState::s0);
  EXPECT_THROW(decide(-1.0, rule), ParameterError);
}

TEST(EstimatedTrajectory, ShortGapStaysOperational) {
  const double tau = 4.0;
  const auto tl = single(make_period(0.0, 2.0, 0.0, {0.0, 1.0}, {0.0, 0.5 * tau}));
  const auto est = estimated_state_trajectory(tl, DecisionRule::threshold(tau));
  ASSERT_EQ(est.size(), 1u);
  EXPECT_EQ(est[0].state, SensorState::s0);
  EXPECT_EQ(est[0].begin, 0.0);
  EXPECT_EQ(est[0].end, 0.5 * tau);
}

TEST(EstimatedTrajectory, LongGapFlipsAtTau) {
  const double tau = 4.0;
  const auto tl = single(make_period(0.0, 2 * tau, 0.0, {0.0, 1.0}, {0.0, 2 * tau}));
  const auto est = estimated_state_trajectory(tl, DecisionRule::threshold(tau));
  ASSERT_EQ(est.size(), 2u);
  EXPECT_EQ(est[0].state, SensorState::s0);
  EXPECT_EQ(est[0].end, tau);
  EXPECT_EQ(est[1].state, SensorState::s1);
  EXPECT_EQ(est[1].begin, tau);
  EXPECT_EQ(est[1].end, 2 * tau);
}

TEST(EstimatedTrajectory, DegenerateRuleNeverDeclaresFailure) {
  const auto tl = single(make_period(0.0, 50.0, 100.0, {0.0}, {1.0}));
  const auto est = estimated_state_trajectory(tl, DecisionRule{5.0, true});
  ASSERT_EQ(est.size(), 1u);
  EXPECT_EQ(est[0].state, SensorState::s0);
  EXPECT_EQ(est[0].end, 150.0);
}

TEST(EmpiricalError, MissedFailureUntilThresholdCrossing) {
  // Last arrival 3.4, failure at 5, recovery until 25, tau = 9.16:
  // the estimate stays s0 until 12.56, so [5, 12.56] is a miss.
  const auto tl = single(make_period(0.0, 5.0, 20.0, {0.0, 1.0, 1.5}, {2.0, 2.4, 3.4}));
  const auto e = empirical_error_rate(tl, DecisionRule::threshold(9.16));
  EXPECT_NEAR(e.false_negative_time, 7.56, 1e-12);
  EXPECT_EQ(e.false_positive_time, 0.0);
  EXPECT_NEAR(e.measured_time, 23.0, 1e-12);
  EXPECT_NEAR(e.error_rate, 7.56 / 23.0, 1e-12);
}

TEST(EmpiricalError, GapWithinThresholdCostsNothing) {
  const auto tl = single(make_period(0.0, 20.0, 1.0, {0.0, 3.0}, {1.0, 4.0}));
  const auto e = empirical_error_rate(tl, DecisionRule::threshold(3.0));
  // Gap 3.0 <= tau: no false positive between the arrivals; after 4.0 the
  // estimate flips at 7.0 and stays s1 through the failure at 20.
  EXPECT_NEAR(e.false_positive_time, 20.0 - 7.0, 1e-12);
  EXPECT_EQ(e.false_negative_time, 0.0);
}

TEST(EmpiricalError, LongOperationalGapCostsGapMinusTau) {
  const double g = 12.0, tau = 5.0;
  const auto tl = single(make_period(0.0, 14.0, 1.0, {0.0, 1.0}, {1.0, 1.0 + g}));
  const auto e = empirical_error_rate(tl, DecisionRule::threshold(tau));
  // g - tau inside the gap; the next flip would be at 18, after the failure at
  // 14, so the whole recovery [14, 15) is a miss.
  EXPECT_NEAR(e.false_positive_time, g - tau, 1e-12);
  EXPECT_NEAR(e.false_negative_time, 1.0, 1e-12);
}

TEST(EmpiricalError, EmptyTimelineIsAnError) {
  const auto tl = single(make_period(0.0, 1.0, 1.0, {0.0}, {}));
  EXPECT_THROW(empirical_error_rate(tl, DecisionRule::threshold(1.0)), EmptyTrajectoryError);
  EXPECT_THROW(estimated_state_trajectory(tl, DecisionRule::threshold(1.0)), EmptyTrajectoryError);
}

// Independent route: intersect the estimated intervals with the true failure
// intervals.
struct IntersectionError {
  double fp = 0.0, fn = 0.0, measured = 0.0;
};

IntersectionError by_intersection(const Timeline& tl, const DecisionRule& rule) {
  const auto est = estimated_state_trajectory(tl, rule);
  const auto truth = true_failure_intervals(tl);
  const double begin = est.front().begin, end = est.back().end;
  double declared = 0.0, failed = 0.0, both = 0.0;
  for (const auto& e : est)
    if (e.state == SensorState::s1) declared += e.end - e.begin;
  for (const auto& t : truth) failed += std::max(0.0, t.end - std::max(t.begin, begin));
  std::size_t i = 0, j = 0;
  while (i < est.size() && j < truth.size()) {
    const double lo = std::max({est[i].begin, truth[j].begin, begin});
    const double hi = std::min(est[i].end, truth[j].end);
    if (est[i].state == SensorState::s1 && hi > lo) both += hi - lo;
    (est[i].end < truth[j].end) ? ++i : ++j;
  }
  return {declared - both, failed - both, end - begin};
}

class SimulatedDetection : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    SimParams p;
    p.periods = 3000;
    p.master_seed = 23;
    p.nu = 0.02;
    timeline_ = new Timeline(simulate(p, 1));
  }
  static void TearDownTestSuite() { delete timeline_; }
  static Timeline* timeline_;
};
Timeline* SimulatedDetection::timeline_ = nullptr;

TEST_F(SimulatedDetection, SegmentIntegrationMatchesIntervalIntersection) {
  for (double tau : {0.5, 3.0, 7.0, 15.0, 40.0}) {
    const auto rule = DecisionRule::threshold(tau);
    const auto e = empirical_error_rate(*timeline_, rule);
    const auto x = by_intersection(*timeline_, rule);
    EXPECT_NEAR(e.false_positive_time, x.fp, 1e-6);
    EXPECT_NEAR(e.false_negative_time, x.fn, 1e-6);
    EXPECT_NEAR(e.measured_time, x.measured, 1e-6);
  }
}

TEST_F(SimulatedDetection, DegenerateErrorIsFailedFraction) {
  const auto e = empirical_error_rate(*timeline_, DecisionRule{3.0, true});
  const double begin = timeline_->all_arrivals().front().arrived;
  double failed = 0.0;
  for (const auto& t : true_failure_intervals(*timeline_))
    failed += std::max(0.0, t.end - std::max(t.begin, begin));
  EXPECT_EQ(e.false_positive_time, 0.0);
  EXPECT_EQ(e.false_negative_time, e.failed_time);
  EXPECT_DOUBLE_EQ(e.error_rate, e.failed_time / e.measured_time);
  EXPECT_NEAR(e.failed_time, failed, 1e-9 * failed);
}

TEST_F(SimulatedDetection, ComponentsAreConsistent) {
  const auto e = empirical_error_rate(*timeline_, DecisionRule::map(0.5, 0.02, 20.0));
  EXPECT_GE(e.false_positive_time, 0.0);
  EXPECT_GE(e.false_negative_time, 0.0);
  EXPECT_GE(e.false_positive_time, e.r1_false_positive_time);
  EXPECT_DOUBLE_EQ(e.error_rate, (e.false_positive_time + e.false_negative_time) / e.measured_time);
  EXPECT_GE(e.error_rate, 0.0);
  EXPECT_LE(e.error_rate, 1.0);
}

TEST_F(SimulatedDetection, InvariantUnderTimeShift) {
  Timeline shifted = *timeline_;
  const double offset = 1024.0;  // power of two keeps the shift nearly exact
  for (auto& p : shifted.periods) {
    p.start_time += offset;
    p.failure_time += offset;
    p.recovery_end += offset;
    for (double& g : p.generations) g += offset;
    for (double& a : p.arrivals) a += offset;
  }
  const auto rule = DecisionRule::threshold(7.0);
  const auto a = estimated_state_trajectory(*timeline_, rule);
  const auto b = estimated_state_trajectory(shifted, rule);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].state, b[i].state);
    EXPECT_NEAR(a[i].begin + offset, b[i].begin, 1e-7);
    EXPECT_NEAR(a[i].end + offset, b[i].end, 1e-7);
  }
  const auto ea = empirical_error_rate(*timeline_, rule);
  const auto eb = empirical_error_rate(shifted, rule);
  EXPECT_NEAR(ea.error_rate, eb.error_rate, 1e-9);
}

TEST(ThresholdOptimality, MapBeatsScaledThresholdsAtDefaults) {
  SimParams p;  // 1e5 periods
  const double tau = map_threshold(p.lambda, p.nu);
  std::vector<DecisionRule> rules;
  for (double f : {0.25, 0.5, 1.0, 2.0}) rules.push_back(DecisionRule::threshold(f * tau));
  rules.push_back(DecisionRule::threshold(std::min(4.0 * tau, p.r)));
  const auto m = run_metrics(p, rules);
  for (std::size_t i = 0; i < rules.size(); ++i) {
    if (i == 2) continue;
    EXPECT_LT(m.errors[2].error_rate, m.errors[i].error_rate) << "threshold " << rules[i].tau;
    EXPECT_LT(m.errors[2].error_rate_excluding_r1(), m.errors[i].error_rate_excluding_r1());
  }
}

}  // namespace
}  // namespace aoisim
