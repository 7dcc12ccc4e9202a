#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <limits>
#include <vector>

#include "aoisim/error.hpp"
#include "aoisim/segments.hpp"
#include "aoisim/sim_core.hpp"

namespace aoisim {

// Sawtooth age process. Each breakpoint starts a piece on which the age
// grows with slope 1 from `age` until the next breakpoint (or the end).
struct AoiTrajectory {
  struct Breakpoint {
    double time;
    double age;
  };

  std::vector<Breakpoint> breakpoints;
  double measurement_start = 0.0;
  double measurement_end = 0.0;

  // Age at time t in [measurement_start, measurement_end].
  double age_at(double t) const {
    auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t,
                               [](double v, const Breakpoint& b) { return v < b.time; });
    if (it == breakpoints.begin()) return std::numeric_limits<double>::quiet_NaN();
    --it;
    return it->age + (t - it->time);
  }
};

// Builds the age process of a timeline: it starts at the first arrival and
// drops to a - d at every arrival (a, d), up to the end of the last period.
inline AoiTrajectory age_trajectory(const Timeline& timeline) {
  AoiTrajectory traj;
  for (const auto& p : timeline.periods)
    for (std::size_t k = 0; k < p.delivered(); ++k)
      traj.breakpoints.push_back({p.arrivals[k], p.arrivals[k] - p.generations[k]});
  if (traj.breakpoints.empty())
    throw EmptyTrajectoryError("timeline has no delivered update; age is undefined");
  traj.measurement_start = traj.breakpoints.front().time;
  traj.measurement_end = timeline.periods.back().recovery_end;
  return traj;
}

// Integral of the trajectory over its measurement span, one trapezoid per
// piece.
inline double integrate_age(const AoiTrajectory& traj) {
  if (traj.breakpoints.empty()) throw EmptyTrajectoryError("empty age trajectory");
  double area = 0.0;
  const auto& bp = traj.breakpoints;
  for (std::size_t i = 0; i < bp.size(); ++i) {
    const double until = i + 1 < bp.size() ? bp[i + 1].time : traj.measurement_end;
    const double len = until - bp[i].time;
    area += len * (bp[i].age + 0.5 * len);
  }
  return area;
}

inline double time_average_aoi(const AoiTrajectory& traj) {
  const double span = traj.measurement_end - traj.measurement_start;
  if (!(span > 0.0)) throw UndefinedAverageError("zero-length measurement span");
  return integrate_age(traj) / span;
}

struct RegionAverages {
  double avg_r1 = 0.0, avg_r2 = 0.0, avg_r3 = 0.0;
  double time_r1 = 0.0, time_r2 = 0.0, time_r3 = 0.0;
  double area_r1 = 0.0, area_r2 = 0.0, area_r3 = 0.0;

  double measured_time() const { return time_r1 + time_r2 + time_r3; }
  // Duration-weighted combination of the three regions.
  double overall() const { return (area_r1 + area_r2 + area_r3) / measured_time(); }
};

// Running per-region age integrals; fed one period at a time.
class RegionAoiAccumulator {
 public:
  void add(const PeriodTrace& p) {
    walk_period(p, state_, [&](const Segment& s) {
      const auto i = static_cast<std::size_t>(s.region);
      area_[i] += s.age_area();
      time_[i] += s.length();
    });
  }

  RegionAverages result() const {
    if (!state_.measuring)
      throw EmptyTrajectoryError("timeline has no delivered update; age is undefined");
    RegionAverages out;
    auto avg = [](double a, double t) {
      return t > 0.0 ? a / t : std::numeric_limits<double>::quiet_NaN();
    };
    out.area_r1 = area_[0], out.area_r2 = area_[1], out.area_r3 = area_[2];
    out.time_r1 = time_[0], out.time_r2 = time_[1], out.time_r3 = time_[2];
    out.avg_r1 = avg(area_[0], time_[0]);
    out.avg_r2 = avg(area_[1], time_[1]);
    out.avg_r3 = avg(area_[2], time_[2]);
    return out;
  }

 private:
  WalkState state_;
  std::array<double, 3> area_{};
  std::array<double, 3> time_{};
};

// Per-region time-average age. A region with no measured time reports NaN.
inline RegionAverages region_average_aoi(const Timeline& timeline) {
  RegionAoiAccumulator acc;
  for (const auto& p : timeline.periods) acc.add(p);
  return acc.result();
}

}  // namespace aoisim
