#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace coinfer {

// Seeded generator with explicit, platform-stable draw functions. The standard
// distribution objects are implementation-defined, which would break the
// byte-identical reproducibility contract, so all shaping is done here from
// raw mt19937_64 output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer on [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(eng_() % span);
  }

  double exponential(double lambda) { return -std::log1p(-uniform01()) / lambda; }

  /// Zero-mean Laplacian with E|Z| = scale.
  double laplace(double scale) {
    const double mag = -scale * std::log1p(-uniform01());
    return uniform01() < 0.5 ? -mag : mag;
  }

  /// Standard normal via Box-Muller (deterministic draw order).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    constexpr double two_pi = 6.283185307179586476925286766559;
    spare_ = r * std::sin(two_pi * u2);
    has_spare_ = true;
    return r * std::cos(two_pi * u2);
  }

  /// Random sign, +1 or -1.
  double sign() { return (eng_() & 1u) ? 1.0 : -1.0; }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace coinfer
