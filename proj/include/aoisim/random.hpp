#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace aoisim {

// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent draw sequences used inside one period.
enum class StreamKind : std::uint64_t {
  failure = 1,     // time to failure T
  generation = 2,  // inter-generation gaps X
  service = 3,     // service times S
  bootstrap = 4,   // resampling in the oracle, keyed by "period" = resample batch
};

// Counter-based substream seed: the seed of (period, kind) depends only on
// the master seed and the two counters, never on evaluation order. Each
// counter is folded in through a full SplitMix64 round, so neighbouring
// periods get unrelated engine states.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t period,
                                    StreamKind kind) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ period);
  h = splitmix64(h ^ static_cast<std::uint64_t>(kind));
  return h;
}

// Exponential variates by inversion from a 64-bit Mersenne Twister. Both the
// engine output and the transform are fully specified, so streams are
// reproducible across standard library implementations (unlike
// std::exponential_distribution).
class ExpStream {
 public:
  explicit ExpStream(std::uint64_t seed) : engine_(seed) {}

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() {
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace aoisim
