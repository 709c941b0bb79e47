#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace onebit {

/// Purpose tags for derived random streams. Values are part of the
/// reproducibility contract; never renumber.
enum class StreamPurpose : std::uint32_t {
  Channel = 1,
  Symbols = 2,
  Noise = 3,
  Test = 99,
};

/// A random stream label: the master seed plus (purpose, trial, slot).
/// Equal labels give identical streams on every platform; distinct labels
/// give independent streams.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  StreamPurpose purpose = StreamPurpose::Test;
  std::uint64_t trial = 0;
  std::uint64_t slot = 0;
};

/// Seed-stable generator. The engine and the seeding algorithm are fully
/// specified by the standard; the distributions below are written out by hand
/// because the std:: distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(const SeedSpec& spec) {
    std::seed_seq seq{lo(spec.master_seed), hi(spec.master_seed), static_cast<std::uint32_t>(spec.purpose),
                      lo(spec.trial),       hi(spec.trial),       lo(spec.slot),
                      hi(spec.slot)};
    engine_.seed(seq);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n) by rejection; n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % n;
  }

  /// Standard normal via Box-Muller, caching the second variate.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Circularly-symmetric complex Gaussian with variance `var_per_dim` in each
  /// of the real and imaginary parts.
  std::complex<double> complex_normal(double var_per_dim) {
    const double s = std::sqrt(var_per_dim);
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
  }

 private:
  static std::uint32_t lo(std::uint64_t v) { return static_cast<std::uint32_t>(v); }
  static std::uint32_t hi(std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace onebit
