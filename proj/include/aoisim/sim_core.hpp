#pragma once

#include <algorithm>
#include <atomic>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "aoisim/error.hpp"
#include "aoisim/params.hpp"
#include "aoisim/random.hpp"

namespace aoisim {

inline constexpr std::uint64_t kDefaultEventCap = 1'000'000'000ULL;

// One update that made it through the queue before the failure.
struct Delivery {
  double generated;  // d_k, departure from the sensor
  double arrived;    // a_k, reception at the monitor

  friend bool operator==(const Delivery&, const Delivery&) = default;
};

// One failure-to-failure period on the absolute clock.
//
// Layout: [start_time, first arrival) is R1, [first arrival, failure_time)
// is R2 and [failure_time, recovery_end) is R3. Under FCFS the delivered
// packets are always a prefix of the generated ones, so `arrivals[k]` pairs
// with `generations[k]` and no separate departure list is kept.
struct PeriodTrace {
  double start_time = 0.0;
  double failure_time = 0.0;
  double recovery_end = 0.0;
  std::vector<double> generations;
  std::vector<double> arrivals;
  std::uint64_t discarded_count = 0;

  std::size_t delivered() const { return arrivals.size(); }
  bool has_delivery() const { return !arrivals.empty(); }
  Delivery delivery(std::size_t k) const { return {generations[k], arrivals[k]}; }

  std::vector<Delivery> deliveries() const {
    std::vector<Delivery> out;
    out.reserve(arrivals.size());
    for (std::size_t k = 0; k < arrivals.size(); ++k) out.push_back(delivery(k));
    return out;
  }

  double duration() const { return recovery_end - start_time; }

  // End of R1: the first arrival, or the failure if nothing was delivered.
  double r1_end() const { return has_delivery() ? arrivals.front() : failure_time; }
};

struct Timeline {
  std::vector<PeriodTrace> periods;
  double total_time = 0.0;
  bool unstable = false;  // rho >= 1 was simulated; analytics do not apply

  std::vector<Delivery> all_arrivals() const {
    std::vector<Delivery> out;
    for (const auto& p : periods)
      for (std::size_t k = 0; k < p.delivered(); ++k) out.push_back(p.delivery(k));
    return out;
  }

  std::size_t delivery_count() const {
    std::size_t n = 0;
    for (const auto& p : periods) n += p.delivered();
    return n;
  }
};

// Anything that can feed the three random quantities of a period.
template <class D>
concept DrawSource = requires(D& d) {
  { d.failure_duration() } -> std::convertible_to<double>;
  { d.generation_gap() } -> std::convertible_to<double>;
  { d.service_time() } -> std::convertible_to<double>;
};

// Seeded draws for period `index`, one independent stream per quantity. Using
// separate streams keeps the k-th service time the same regardless of how many
// gaps were drawn, which gives common random numbers across parameter sweeps.
class PeriodDraws {
 public:
  PeriodDraws(const SimParams& p, std::uint64_t index)
      : lambda_(p.lambda), mu_(p.mu), nu_(p.nu),
        failure_(derive_seed(p.master_seed, index, StreamKind::failure)),
        generation_(derive_seed(p.master_seed, index, StreamKind::generation)),
        service_(derive_seed(p.master_seed, index, StreamKind::service)) {}

  double failure_duration() { return failure_.exponential(nu_); }
  double generation_gap() { return generation_.exponential(lambda_); }
  double service_time() { return service_.exponential(mu_); }

 private:
  double lambda_, mu_, nu_;
  ExpStream failure_, generation_, service_;
};

// Replays prescribed draws. An exhausted gap list yields +infinity (no
// further generation); exhausted failure or service lists are an error.
class FixedDraws {
 public:
  FixedDraws(std::vector<double> failures, std::vector<double> gaps,
             std::vector<double> services)
      : failures_(std::move(failures)), gaps_(std::move(gaps)), services_(std::move(services)) {}

  double failure_duration() { return take(failures_, fi_, "failure"); }
  double generation_gap() {
    if (gi_ >= gaps_.size()) return std::numeric_limits<double>::infinity();
    return gaps_[gi_++];
  }
  double service_time() { return take(services_, si_, "service"); }

 private:
  static double take(const std::vector<double>& v, std::size_t& i, const char* what) {
    if (i >= v.size()) throw ParameterError(std::string("fixed draws exhausted: ") + what);
    return v[i++];
  }

  std::vector<double> failures_, gaps_, services_;
  std::size_t fi_ = 0, gi_ = 0, si_ = 0;
};

// Wraps a draw source and keeps a copy of everything it produced.
template <DrawSource D>
class RecordingDraws {
 public:
  explicit RecordingDraws(D& inner) : inner_(inner) {}

  double failure_duration() { return push(failures, inner_.failure_duration()); }
  double generation_gap() { return push(gaps, inner_.generation_gap()); }
  double service_time() { return push(services, inner_.service_time()); }

  std::vector<double> failures, gaps, services;

 private:
  static double push(std::vector<double>& v, double x) {
    v.push_back(x);
    return x;
  }
  D& inner_;
};

namespace detail {

// One attempt at a period in local time (start at 0).
template <DrawSource D>
PeriodTrace draw_local_period(D& draws, std::uint64_t event_cap) {
  PeriodTrace t;
  const double horizon = draws.failure_duration();
  t.failure_time = horizon;

  double d = 0.0;
  t.generations.push_back(d);
  for (;;) {
    const double next = d + draws.generation_gap();
    if (!(next <= horizon)) break;
    if (t.generations.size() >= event_cap)
      throw InternalLimitError("period exceeded the event cap of " + std::to_string(event_cap) +
                               " generations");
    t.generations.push_back(next);
    d = next;
  }

  // FCFS: a_k = max(d_k, a_{k-1}) + S_k; the first miss ends deliveries since
  // later packets finish even later.
  double prev = -std::numeric_limits<double>::infinity();
  for (double g : t.generations) {
    const double a = std::max(g, prev) + draws.service_time();
    if (!(a <= horizon)) break;
    t.arrivals.push_back(a);
    prev = a;
  }
  t.discarded_count = t.generations.size() - t.arrivals.size();
  return t;
}

inline void shift_period(PeriodTrace& t, double start, double r) {
  t.start_time = start;
  if (start != 0.0) {
    for (double& g : t.generations) g += start;
    for (double& a : t.arrivals) a += start;
    t.failure_time += start;
  }
  t.recovery_end = t.failure_time + r;
}

}  // namespace detail

// Generates one period beginning with an update generated at `start`.
//
// The period is drawn in local time and then shifted, so a period's contents
// do not depend on where it lands on the absolute clock beyond that addition.
// With `enforce_assumption3`, periods without any delivery are redrawn from
// the same streams.
template <DrawSource D>
PeriodTrace generate_period(const SimParams& params, D& draws, double start,
                            std::uint64_t event_cap = kDefaultEventCap) {
  validate(params);
  PeriodTrace t = detail::draw_local_period(draws, event_cap);
  while (params.enforce_assumption3 && !t.has_delivery())
    t = detail::draw_local_period(draws, event_cap);
  detail::shift_period(t, start, params.r);
  return t;
}

// Streams the P periods of a run, in order, into `sink`. Periods are drawn in
// parallel chunks (each from its own counter-derived substreams) and placed
// on the clock serially, so the output is identical for any `threads`.
// `threads == 0` picks the hardware concurrency.
template <class Sink>
void for_each_period(const SimParams& params, Sink&& sink, unsigned threads = 0,
                     std::uint64_t event_cap = kDefaultEventCap) {
  validate(params);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  constexpr std::uint64_t kChunk = 2048;

  std::vector<PeriodTrace> chunk;
  double clock = 0.0;
  for (std::uint64_t base = 0; base < params.periods; base += kChunk) {
    const std::uint64_t n = std::min(kChunk, params.periods - base);
    chunk.assign(n, PeriodTrace{});

    auto work = [&](std::uint64_t i) {
      PeriodDraws draws(params, base + i);
      PeriodTrace t = detail::draw_local_period(draws, event_cap);
      while (params.enforce_assumption3 && !t.has_delivery())
        t = detail::draw_local_period(draws, event_cap);
      chunk[i] = std::move(t);
    };

    if (threads == 1 || n < 2) {
      for (std::uint64_t i = 0; i < n; ++i) work(i);
    } else {
      std::atomic<std::uint64_t> next{0};
      std::exception_ptr failure;
      std::atomic<bool> failed{false};
      std::vector<std::jthread> pool;
      const unsigned workers = static_cast<unsigned>(std::min<std::uint64_t>(threads, n));
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::uint64_t i = next++; i < n && !failed; i = next++) {
            try {
              work(i);
            } catch (...) {
              if (!failed.exchange(true)) failure = std::current_exception();
            }
          }
        });
      }
      pool.clear();
      if (failure) std::rethrow_exception(failure);
    }

    for (auto& t : chunk) {
      detail::shift_period(t, clock, params.r);
      clock = t.recovery_end;
      sink(std::move(t));
    }
  }
}

// Runs the whole configuration and keeps every period in memory.
inline Timeline simulate(const SimParams& params, unsigned threads = 0) {
  Timeline tl;
  tl.unstable = !params.stable();
  tl.periods.reserve(params.periods);
  for_each_period(params, [&](PeriodTrace&& t) { tl.periods.push_back(std::move(t)); }, threads);
  tl.total_time = tl.periods.empty() ? 0.0 : tl.periods.back().recovery_end;
  return tl;
}

// Direct Lindley recursion a_k = max(d_k, a_{k-1}) + S_k for all packets.
inline std::vector<double> lindley_arrivals(std::span<const double> generations,
                                            std::span<const double> services) {
  std::vector<double> out;
  out.reserve(generations.size());
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < generations.size(); ++k) {
    prev = std::max(generations[k], prev) + services[k];
    out.push_back(prev);
  }
  return out;
}

// Event-driven single-server FCFS queue. Packets enter at `generations`,
// take `services`, and everything still queued or in service when `horizon`
// passes is dropped. Returns completion times in completion order.
inline std::vector<double> event_driven_departures(
    std::span<const double> generations, std::span<const double> services,
    double horizon = std::numeric_limits<double>::infinity()) {
  enum class Kind { completion = 0, arrival = 1 };
  struct Event {
    double time;
    Kind kind;
    std::size_t packet;
    bool operator>(const Event& o) const {
      if (time != o.time) return time > o.time;
      return kind > o.kind;
    }
  };

  std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
  for (std::size_t k = 0; k < generations.size(); ++k)
    events.push({generations[k], Kind::arrival, k});

  std::queue<std::size_t> waiting;
  bool busy = false;
  std::vector<double> done;

  auto start_service = [&](std::size_t packet, double now) {
    busy = true;
    events.push({now + services[packet], Kind::completion, packet});
  };

  while (!events.empty()) {
    const Event ev = events.top();
    events.pop();
    if (ev.time > horizon) break;
    if (ev.kind == Kind::arrival) {
      if (busy)
        waiting.push(ev.packet);
      else
        start_service(ev.packet, ev.time);
    } else {
      done.push_back(ev.time);
      busy = false;
      if (!waiting.empty()) {
        const std::size_t nxt = waiting.front();
        waiting.pop();
        start_service(nxt, ev.time);
      }
    }
  }
  return done;
}

}  // namespace aoisim
