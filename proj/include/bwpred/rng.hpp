#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace bwpred {

/// FNV-1a 64-bit hash. Used for schema stamps and for deriving named
/// sub-streams from a base seed.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

/// Deterministic random stream. std::mt19937_64 output is fully specified
/// by the standard, so sequences are reproducible across platforms; the
/// distributions are hand-rolled because the standard does not pin down
/// std::*_distribution output.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  /// Independent stream for a named purpose (flow generation, telemetry
  /// noise, weight init, ...) so consumers cannot perturb each other.
  RngStream derive(std::string_view name) const {
    return RngStream(seed_ ^ fnv1a64(name));
  }

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [lo, hi) built from the top 53 bits.
  double uniform(double lo, double hi) {
    double u = static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  /// Uniform integer in [lo, hi], inclusive. Rejection keeps it unbiased.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % range;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % range);
  }

  /// Box-Muller; the spare value is cached so draws come in a fixed order.
  double normal(double mean, double stddev) {
    if (has_spare_) {
      has_spare_ = false;
      return mean + stddev * spare_;
    }
    double u1, u2;
    do {
      u1 = uniform(0.0, 1.0);
    } while (u1 <= 0.0);
    u2 = uniform(0.0, 1.0);
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return mean + stddev * r * std::cos(a);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bwpred
