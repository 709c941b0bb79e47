#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <vector>

#include "onebit/error.hpp"

namespace onebit {

using cplx = std::complex<double>;

inline double abs2(cplx z) noexcept { return z.real() * z.real() + z.imag() * z.imag(); }

/// One-bit transmit alphabet, one DAC bit per I/Q rail. Index order is part
/// of the tie-breaking contract of every precoder.
inline constexpr std::size_t kAlphabetSize = 4;
inline const std::array<cplx, kAlphabetSize> kQpskAlphabet = {
    cplx(std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2),
    cplx(std::numbers::sqrt2 / 2, -std::numbers::sqrt2 / 2),
    cplx(-std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2),
    cplx(-std::numbers::sqrt2 / 2, -std::numbers::sqrt2 / 2),
};

/// Square N^2-QAM grid of full extent `range` per real dimension.
///
/// Points are ordered row-major with the imaginary level as the outer index:
/// point (a, b) sits at index b * N + a with real part -c/2 + a*d and
/// imaginary part -c/2 + b*d.
class QamConstellation {
 public:
  QamConstellation(int n_side, double range) : n_side_(n_side), range_(range) {
    detail::require(n_side >= 2 && n_side % 2 == 0, Errc::InvalidParameter,
                    "QAM side must be an even integer >= 2");
    detail::require(std::isfinite(range) && range > 0.0, Errc::InvalidParameter,
                    "QAM range must be positive and finite");
    min_distance_ = range / (n_side - 1);
    const auto n = static_cast<std::size_t>(n_side);
    points_.reserve(n * n);
    neighbors_.reserve(n * n);
    for (int b = 0; b < n_side; ++b) {
      for (int a = 0; a < n_side; ++a) {
        points_.emplace_back(level(a), level(b));
        const int edge_a = (a == 0 || a == n_side - 1) ? 1 : 0;
        const int edge_b = (b == 0 || b == n_side - 1) ? 1 : 0;
        neighbors_.push_back(4 - edge_a - edge_b);
      }
    }
  }

  int n_side() const noexcept { return n_side_; }
  double range() const noexcept { return range_; }
  double min_distance() const noexcept { return min_distance_; }
  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<cplx>& points() const noexcept { return points_; }
  const std::vector<int>& neighbor_counts() const noexcept { return neighbors_; }
  cplx operator[](std::size_t i) const { return points_[i]; }

  /// Real-axis coordinate of grid column a (same levels on the imaginary axis).
  double level(int a) const noexcept { return -range_ / 2 + a * min_distance_; }

  /// Index of the nearest point; exact ties go to the smallest index.
  std::size_t quantize(cplx y) const {
    detail::require(std::isfinite(y.real()) && std::isfinite(y.imag()), Errc::InvalidInput,
                    "cannot quantize a non-finite sample");
    return static_cast<std::size_t>(axis_index(y.imag())) * static_cast<std::size_t>(n_side_) +
           static_cast<std::size_t>(axis_index(y.real()));
  }

 private:
  // The grid distance separates per axis, so the nearest level per axis gives
  // the 2-D argmin. Rounding half down keeps the lower level (smaller index).
  int axis_index(double v) const noexcept {
    const double u = (v + range_ / 2) / min_distance_;
    if (!(u > 0.5)) return 0;
    if (u >= n_side_ - 1) return n_side_ - 1;
    const int k = static_cast<int>(std::ceil(u - 0.5));
    return k < n_side_ - 1 ? k : n_side_ - 1;
  }

  int n_side_;
  double range_;
  double min_distance_ = 0.0;
  std::vector<cplx> points_;
  std::vector<int> neighbors_;
};

inline QamConstellation build_qam(int n_side, double range) { return QamConstellation(n_side, range); }

inline std::size_t quantize(const QamConstellation& constellation, cplx y) { return constellation.quantize(y); }

struct PowerMoments {
  double mean;      // E|s|^2
  double variance;  // E(|s|^2 - mean)^2
};

/// Closed-form mean and variance of |s|^2 for s uniform over the N^2 grid.
inline PowerMoments symbol_power_moments(int n_side, double range) {
  detail::require(n_side >= 2 && n_side % 2 == 0, Errc::InvalidParameter,
                  "QAM side must be an even integer >= 2");
  detail::require(std::isfinite(range) && range > 0.0, Errc::InvalidParameter,
                  "QAM range must be positive and finite");
  const double n = n_side;
  const double c2 = range * range;
  const double mean = (n + 1) / (6 * (n - 1)) * c2;
  const double variance = (n + 1) * (n * n - 4) / (90 * (n - 1) * (n - 1) * (n - 1)) * c2 * c2;
  return {mean, variance};
}

/// Mean number of minimum-distance neighbours, 4(1 - 1/N).
inline double avg_neighbor_count(int n_side) {
  detail::require(n_side >= 2, Errc::InvalidParameter, "QAM side must be >= 2");
  return 4.0 * (1.0 - 1.0 / n_side);
}

}  // namespace onebit
