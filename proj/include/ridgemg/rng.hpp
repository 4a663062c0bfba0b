#pragma once

#include <cstdint>
#include <cmath>
#include <numbers>

namespace ridgemg {

// Counter-based pseudo-random generator: the k-th draw is the splitmix64
// output function applied to seed + k * 0x9E3779B97F4A7C15.  The sequence is
// a pure function of (seed, counter) and therefore identical on every
// platform and in every language that follows the same recipe:
//
//   z = seed + k * 0x9E3779B97F4A7C15
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   u64(k) = z ^ (z >> 31)
//
//   uniform [0,1):  (u64 >> 11) * 2^-53
//   uniform (0,1]:  ((u64 >> 11) + 1) * 2^-53
//   normal:         Box-Muller on consecutive draws u1 in (0,1], u2 in [0,1):
//                   r = sqrt(-2 ln u1), first = r cos(2 pi u2),
//                   second (cached) = r sin(2 pi u2)
//   index [0,n):    floor(uniform * n), clamped to n-1
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1]; never zero, safe under log().
  double next_double_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the sine variate of each pair is cached.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = next_double_open();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t next_index(std::uint64_t n) {
    const auto v = static_cast<std::uint64_t>(next_double() * static_cast<double>(n));
    return v >= n ? n - 1 : v;
  }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace ridgemg
