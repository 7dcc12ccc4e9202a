#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "aoisim/error.hpp"
#include "aoisim/segments.hpp"
#include "aoisim/sim_core.hpp"

namespace aoisim {

enum class SensorState { s0 = 0, s1 = 1 };  // operational, failed

// MAP threshold on the time since the last reception,
// tau = log(lambda/nu + 2) / (lambda + nu). Natural log.
inline double map_threshold(double lambda, double nu) {
  if (!(std::isfinite(lambda) && lambda > 0.0) || !(std::isfinite(nu) && nu > 0.0))
    throw ParameterError("map_threshold requires lambda > 0 and nu > 0");
  return std::log(lambda / nu + 2.0) / (lambda + nu);
}

// Threshold test on z(t). A degenerate rule always answers s0.
struct DecisionRule {
  double tau = 0.0;
  bool degenerate = false;

  // The MAP rule; degenerate exactly when tau >= r.
  static DecisionRule map(double lambda, double nu, double r) {
    const double tau = map_threshold(lambda, nu);
    return {tau, tau >= r};
  }

  // Plain "declare failure once z > tau" test with an arbitrary threshold,
  // used for threshold sweeps. Never degenerate.
  static DecisionRule threshold(double tau) {
    if (!(tau >= 0.0)) throw ParameterError("threshold must be >= 0");
    return {tau, false};
  }
};

inline SensorState decide(double z, const DecisionRule& rule) {
  if (!(z >= 0.0)) throw ParameterError("time since last update must be >= 0");
  if (rule.degenerate) return SensorState::s0;
  return z <= rule.tau ? SensorState::s0 : SensorState::s1;
}

struct StateInterval {
  double begin;
  double end;
  SensorState state;
};

// Estimated status over [first arrival, end of last period] as an ordered,
// gap-free list of intervals with alternating states. The estimate switches to
// s1 at a + tau when no reception follows within tau and back to s0 at the
// next reception.
inline std::vector<StateInterval> estimated_state_trajectory(const Timeline& timeline,
                                                             const DecisionRule& rule) {
  std::vector<double> arrivals;
  for (const auto& p : timeline.periods)
    arrivals.insert(arrivals.end(), p.arrivals.begin(), p.arrivals.end());
  if (arrivals.empty())
    throw EmptyTrajectoryError("timeline has no delivered update; estimate is undefined");
  const double end = timeline.periods.back().recovery_end;

  std::vector<StateInterval> out;
  auto push = [&](double b, double e, SensorState s) {
    if (!(e > b)) return;
    if (!out.empty() && out.back().state == s && out.back().end == b)
      out.back().end = e;
    else
      out.push_back({b, e, s});
  };
  for (std::size_t k = 0; k < arrivals.size(); ++k) {
    const double a = arrivals[k];
    const double next = k + 1 < arrivals.size() ? arrivals[k + 1] : end;
    const double flip = a + rule.tau;
    if (!rule.degenerate && next > flip) {
      push(a, flip, SensorState::s0);
      push(flip, next, SensorState::s1);
    } else {
      push(a, next, SensorState::s0);
    }
  }
  return out;
}

// Intervals [failure_time, recovery_end) of every period.
inline std::vector<StateInterval> true_failure_intervals(const Timeline& timeline) {
  std::vector<StateInterval> out;
  out.reserve(timeline.periods.size());
  for (const auto& p : timeline.periods)
    out.push_back({p.failure_time, p.recovery_end, SensorState::s1});
  return out;
}

struct ErrorBreakdown {
  double error_rate = 0.0;
  double false_positive_time = 0.0;  // estimate s1 while operational
  double false_negative_time = 0.0;  // estimate s0 while failed
  double measured_time = 0.0;
  double r1_false_positive_time = 0.0;  // part of the false positives inside R1
  double r1_time = 0.0;                 // measured time inside R1
  double failed_time = 0.0;             // measured time in s1

  // Error rate over R2 and R3 only, the span on which the MAP rule is derived.
  double error_rate_excluding_r1() const {
    return (false_positive_time - r1_false_positive_time + false_negative_time) /
           (measured_time - r1_time);
  }
};

// Length of the part of a segment where the rule declares s1.
inline double declared_failure_time(const Segment& s, const DecisionRule& rule) {
  if (rule.degenerate) return 0.0;
  return std::max(0.0, s.end - std::max(s.begin, s.last_arrival + rule.tau));
}

// Mismatch between estimate and truth, integrated exactly per segment.
class ErrorAccumulator {
 public:
  explicit ErrorAccumulator(DecisionRule rule) : rule_(rule) {}

  void add(const PeriodTrace& p) {
    walk_period(p, state_, [&](const Segment& s) { add(s); });
  }

  void add(const Segment& s) {
    const double len = s.length();
    const double declared = declared_failure_time(s, rule_);
    out_.measured_time += len;
    if (s.region == Region::r3) {
      out_.failed_time += len;
      out_.false_negative_time += len - declared;
    } else {
      out_.false_positive_time += declared;
      if (s.region == Region::r1) {
        out_.r1_false_positive_time += declared;
        out_.r1_time += len;
      }
    }
  }

  ErrorBreakdown result() const {
    if (!(out_.measured_time > 0.0))
      throw EmptyTrajectoryError("no measured time; error rate is undefined");
    ErrorBreakdown b = out_;
    b.error_rate = (b.false_positive_time + b.false_negative_time) / b.measured_time;
    return b;
  }

  const DecisionRule& rule() const { return rule_; }

 private:
  DecisionRule rule_;
  WalkState state_;
  ErrorBreakdown out_;
};

// Time-averaged |s_hat(t) - s(t)| over [first arrival, end of last period].
inline ErrorBreakdown empirical_error_rate(const Timeline& timeline, const DecisionRule& rule) {
  ErrorAccumulator acc(rule);
  for (const auto& p : timeline.periods) acc.add(p);
  return acc.result();
}

}  // namespace aoisim
