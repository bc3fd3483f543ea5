#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace mstate {

// Counter-based random streams.
//
// A stream is identified by a master seed plus a short key (for example
// generation and individual index). Streams with different keys are
// statistically independent, so work can be handed to any thread in any order
// without changing results. The engine is SplitMix64; keys are folded into the
// starting state with the same finalizer.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t state) : state_(state) {}

  static RandomStream keyed(std::uint64_t seed,
                            std::initializer_list<std::uint64_t> key) {
    std::uint64_t s = mix(seed ^ 0x6a09e667f3bcc909ULL);
    for (std::uint64_t k : key) s = mix(s ^ mix(k + 0x9e3779b97f4a7c15ULL));
    return RandomStream(s);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform on the open interval (0, 1); safe for inverse-CDF transforms.
  double uniform_open() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), unbiased (Lemire's multiply-shift with
  // rejection).
  std::uint64_t below(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

__extension__ typedef unsigned __int128 u128;

inline std::uint64_t RandomStream::below(std::uint64_t n) {
  if (n <= 1) return 0;
  u128 m = static_cast<u128>((*this)()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<u128>((*this)()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

// Standard normal variate by inverse-CDF transform of one uniform draw.
double standard_normal(RandomStream& rng);

}  // namespace mstate
