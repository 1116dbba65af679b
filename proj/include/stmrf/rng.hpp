#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace stmrf {

/// Deterministic sampling utilities. The engine sequence is fixed by the
/// standard; the transforms below avoid the implementation-defined standard
/// distributions so identical seeds give identical streams everywhere.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform in [0, 1).
  double uniform() { return (eng_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }

  /// Standard normal (Box-Muller; the sine partner is discarded).
  double normal() {
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  /// Gamma with the given shape and unit scale (Marsaglia-Tsang).
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform();
      return gamma(shape + 1.0) * std::pow(u <= 0.0 ? 5e-324 : u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    while (true) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
        return d * v;
    }
  }

  /// Unit-mean multiplicative speckle with the given number of looks.
  double speckle(double looks) { return gamma(looks) / looks; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace stmrf
