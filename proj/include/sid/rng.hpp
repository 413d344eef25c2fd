#ifndef SID_RNG_HPP
#define SID_RNG_HPP

#include <cmath>
#include <cstdint>

namespace sid {

// Counter-based 64-bit generator. Output i is a fixed integer mix of
// (key + i * golden_gamma), so a stream is fully determined by its key and
// independent of how it is consumed or forked. Same seed, same bytes, on
// every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed ^ 0x6A09E667F3BCC909ULL)) {}

  // Independent child stream. fork(a).fork(b) != fork(b).fork(a).
  Rng fork(std::uint64_t stream) const {
    Rng r(0);
    r.key_ = mix(key_ ^ mix(stream + 0x9E3779B97F4A7C15ULL));
    r.counter_ = 0;
    return r;
  }

  std::uint64_t next_u64() {
    return mix(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL);
  }

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive bounds.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next_u64() % span);
  }

  // Box-Muller; second value cached.
  double gauss() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(a);
    have_cached_ = true;
    return r * std::cos(a);
  }

 private:
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace sid

#endif  // SID_RNG_HPP
