#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace ovaib {

// Deterministic random source. All draws are built from the raw mt19937_64
// stream so that sequences are identical across standard libraries, not just
// across runs (std::normal_distribution is implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal via Box-Muller; the spare draw is cached.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * pi_ * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  // Unit exponential via inverse CDF.
  double exponential() {
    double u = uniform01();
    while (u >= 1.0) u = uniform01();
    return -std::log1p(-u);
  }

  // Uniform integer in [0, n). Modulo bias is irrelevant at our scales
  // (n << 2^64) and keeps the draw fully portable.
  std::uint64_t below(std::uint64_t n) { return engine_() % n; }

  // Derive an independent stream for a named purpose.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  static constexpr double pi_ = 3.14159265358979323846;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ovaib
