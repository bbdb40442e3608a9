#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace ergofit {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// SplitMix64 finalizer (full 64-bit avalanche).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based generator: output i depends only on (key, i), so per-replicate
// streams can be handed to worker threads without coordination and every run
// replays exactly for a fixed key, regardless of thread count.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  // Key derivation for named streams, e.g. (seed, "mean_width", seed_idx, rep).
  static std::uint64_t derive_key(std::uint64_t seed, std::string_view label,
                                  std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : label) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
    return mix64(mix64(seed ^ h) ^ mix64(a ^ (0x517cc1b727220a95ULL * b)));
  }

  std::uint64_t next_u64() { return mix64(key_ ^ mix64(ctr_++)); }

  // Uniform in (0,1); never returns 0, safe under log().
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Box-Muller; draws two uniforms per value, the sine partner is discarded
  // so the stream position does not depend on call parity.
  double gaussian() {
    double u = uniform01();
    double v = uniform01();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * kPi * v);
  }

  double rademacher() { return (next_u64() & 1) ? 1.0 : -1.0; }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

}  // namespace ergofit
