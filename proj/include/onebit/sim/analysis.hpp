#pragma once

#include <cmath>
#include <optional>
#include <string_view>
#include <vector>

#include "onebit/error.hpp"
#include "onebit/sim/table.hpp"

namespace onebit::sim {

struct Series {
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> std_error;
  std::vector<double> analytic;
};

/// Rows of one scheme/metric in table order.
inline Series extract_series(const ResultTable& table, std::string_view scheme, std::string_view metric) {
  Series s;
  for (const auto& r : table.rows) {
    if (r.scheme != scheme || r.metric != metric) continue;
    s.x.push_back(r.value);
    s.mean.push_back(r.mean);
    s.std_error.push_back(r.std_error);
    s.analytic.push_back(r.analytic);
  }
  return s;
}

/// First x at which a decreasing curve falls to `target`, interpolating
/// log10(y) linearly between the bracketing points. Empty if never reached.
inline std::optional<double> crossing(const std::vector<double>& xs, const std::vector<double>& ys, double target) {
  onebit::detail::require(xs.size() == ys.size(), Errc::DimensionMismatch, "crossing needs equally long x and y");
  onebit::detail::require(target > 0.0, Errc::InvalidParameter, "crossing target must be positive");
  for (std::size_t i = 0; i < ys.size(); ++i) {
    if (ys[i] > target) continue;
    if (i == 0) return xs[0];
    const double y0 = ys[i - 1];
    const double y1 = ys[i];
    if (y1 <= 0.0) {
      // Log interpolation is undefined at zero; fall back to linear.
      return xs[i - 1] + (xs[i] - xs[i - 1]) * (y0 - target) / (y0 - y1);
    }
    const double l0 = std::log10(y0);
    const double l1 = std::log10(y1);
    const double lt = std::log10(target);
    if (l0 == l1) return xs[i];
    return xs[i - 1] + (xs[i] - xs[i - 1]) * (l0 - lt) / (l0 - l1);
  }
  return std::nullopt;
}

}  // namespace onebit::sim
