#pragma once

#include "aoisim/sim_core.hpp"

namespace aoisim {

enum class Region { r1 = 0, r2 = 1, r3 = 2 };

// A maximal stretch of time inside one region during which the freshest
// delivered update does not change. Age rises with slope 1 across it.
struct Segment {
  double begin;
  double end;
  Region region;
  double last_generated;  // d of the freshest delivered update
  double last_arrival;    // a of that update

  double length() const { return end - begin; }
  double age_at_begin() const { return begin - last_generated; }
  // Exact integral of the age over the segment (trapezoid).
  double age_area() const {
    const double len = length();
    return len * (age_at_begin() + 0.5 * len);
  }
};

// Carries the freshest delivery across period boundaries. Nothing is
// measured before the first arrival of the run.
struct WalkState {
  bool measuring = false;
  double last_generated = 0.0;
  double last_arrival = 0.0;
};

// Cuts a period into measured segments at its region boundaries and its
// arrivals and hands them to `visit` in time order. Periods without a
// delivery have their whole pre-failure span tagged R1.
template <class Visitor>
void walk_period(const PeriodTrace& p, WalkState& st, Visitor&& visit) {
  double cursor = p.start_time;
  auto emit_until = [&](double x, Region region) {
    if (st.measuring && x > cursor)
      visit(Segment{cursor, x, region, st.last_generated, st.last_arrival});
    if (x > cursor) cursor = x;
  };

  for (std::size_t k = 0; k < p.arrivals.size(); ++k) {
    emit_until(p.arrivals[k], k == 0 ? Region::r1 : Region::r2);
    st.measuring = true;
    st.last_generated = p.generations[k];
    st.last_arrival = p.arrivals[k];
  }
  emit_until(p.failure_time, p.has_delivery() ? Region::r2 : Region::r1);
  emit_until(p.recovery_end, Region::r3);
}

}  // namespace aoisim
