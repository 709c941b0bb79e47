#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>

#include "onebit/constellation.hpp"
#include "onebit/error.hpp"
#include "onebit/range_design.hpp"

namespace onebit {

/// Gaussian tail probability Q(u) = P(N(0,1) > u).
inline double q_function(double u) { return 0.5 * std::erfc(u / std::numbers::sqrt2); }

/// Two-exponential surrogate of Q for u >= 0. Loose; never used for predictions.
inline double q_approx(double u) {
  detail::require(u >= 0.0, Errc::InvalidParameter, "q_approx needs a non-negative argument");
  return std::exp(-u * u / 2.0) / 12.0 + std::exp(-2.0 * u * u / 3.0) / 4.0;
}

inline double clip_probability(double p) { return std::clamp(p, 0.0, 1.0); }

/// Probability that the detector prefers s_j over the intended s_i when the
/// noiseless receive point is s_hat and the noise is CN(0, 2 sigma^2).
inline double pairwise_error_prob(cplx s_hat, cplx s_i, cplx s_j, double sigma) {
  detail::require(s_i != s_j, Errc::InvalidParameter, "pairwise error needs distinct symbols");
  detail::require(sigma > 0.0, Errc::InvalidParameter, "noise standard deviation must be positive");
  const double d_ij = std::abs(s_i - s_j);
  const double dhat_ij_sq = abs2(s_hat - s_j);
  const double dhat_ii_sq = abs2(s_hat - s_i);
  return q_function((dhat_ij_sq - dhat_ii_sq) / (2.0 * d_ij * sigma));
}

/// Nearest-neighbour SER approximation: average over symbols of the summed
/// pairwise error probabilities towards each minimum-distance neighbour.
/// `s_hat[i]` is the noiseless receive point when symbol i is intended.
inline double ser_nearest_neighbor(const QamConstellation& constellation, std::span<const cplx> s_hat,
                                   double sigma) {
  detail::require(s_hat.size() == constellation.size(), Errc::DimensionMismatch,
                  "one receive point per constellation symbol is required");
  const int n = constellation.n_side();
  double total = 0.0;
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) {
      const auto i = static_cast<std::size_t>(b * n + a);
      const auto add = [&](int aa, int bb) {
        if (aa < 0 || bb < 0 || aa >= n || bb >= n) return;
        const auto j = static_cast<std::size_t>(bb * n + aa);
        total += pairwise_error_prob(s_hat[i], constellation[i], constellation[j], sigma);
      };
      add(a - 1, b);
      add(a + 1, b);
      add(a, b - 1);
      add(a, b + 1);
    }
  }
  return clip_probability(total / static_cast<double>(constellation.size()));
}

/// Triangle-inequality SER bound sum_i g_i / N^2 Q((d - 2 dhat_ii) / (2 sigma)),
/// where dhat_ii is the distortion of symbol i's noiseless receive point.
inline double ser_upper_bound(const QamConstellation& constellation, std::span<const double> dhat_ii,
                              double sigma) {
  detail::require(dhat_ii.size() == constellation.size(), Errc::DimensionMismatch,
                  "one distortion per constellation symbol is required");
  detail::require(sigma > 0.0, Errc::InvalidParameter, "noise standard deviation must be positive");
  const double d = constellation.min_distance();
  const auto& g = constellation.neighbor_counts();
  double total = 0.0;
  for (std::size_t i = 0; i < dhat_ii.size(); ++i) {
    detail::require(dhat_ii[i] >= 0.0, Errc::InvalidParameter, "distortions must be non-negative");
    total += g[i] * q_function((d - 2.0 * dhat_ii[i]) / (2.0 * sigma));
  }
  return clip_probability(total / static_cast<double>(constellation.size()));
}

enum class SerScheme { ZfInfinite, OneBit };

struct SerPrediction {
  SerScheme scheme;
  double min_distance;
  double predicted_ser;
};

/// SER with exact reconstruction: avg_neighbors(N) * Q(d / (2 sigma)), clipped.
inline double analytic_ser(int n_side, double min_distance, double sigma) {
  detail::require(n_side >= 2 && n_side % 2 == 0, Errc::InvalidParameter,
                  "QAM side must be an even integer >= 2");
  detail::require(min_distance > 0.0, Errc::InvalidParameter, "minimum distance must be positive");
  detail::require(sigma >= 0.0, Errc::InvalidParameter, "noise standard deviation must be non-negative");
  if (sigma == 0.0) return 0.0;
  return clip_probability(avg_neighbor_count(n_side) * q_function(min_distance / (2.0 * sigma)));
}

/// Minimum distance of the multi-user range designs: sqrt(2PM / ((N-1)^2 f)),
/// times sqrt(2/pi) for one-bit precoding.
inline double analytic_min_distance(double p, Eigen::Index m_antennas, Eigen::Index k_users, int n_side,
                                    SerScheme scheme, double kappa = kDefaultHeadroom) {
  const double d_zf = range_zf_multi(p, m_antennas, k_users, n_side, kappa) / (n_side - 1);
  return scheme == SerScheme::OneBit ? kOneBitRangeFactor * d_zf : d_zf;
}

inline SerPrediction predict_ser(double p, Eigen::Index m_antennas, Eigen::Index k_users, int n_side,
                                 SerScheme scheme, double sigma, double kappa = kDefaultHeadroom) {
  const double d = analytic_min_distance(p, m_antennas, k_users, n_side, scheme, kappa);
  return {scheme, d, analytic_ser(n_side, d, sigma)};
}

/// Extra transmit power (dB) one-bit precoding needs: 10 log10(pi/2).
inline double power_gap_db() { return 10.0 * std::log10(std::numbers::pi / 2.0); }

/// Antenna-count multiplier one-bit precoding needs: pi/2.
inline double antenna_factor() { return std::numbers::pi / 2.0; }

/// Largest QAM side for which a one-bit reconstruction MSE of 1e-5 P stays an
/// order of magnitude below the half minimum distance: 17.9 sqrt(M) + 1.
inline double max_side_for_mse(Eigen::Index m_antennas) {
  detail::require(m_antennas >= 1, Errc::InvalidParameter, "antenna count must be positive");
  return 17.9 * std::sqrt(static_cast<double>(m_antennas)) + 1.0;
}

/// SNR in dB for noise CN(0, 2 sigma^2): 10 log10(P / (2 sigma^2)).
inline double snr_db(double p, double sigma) { return 10.0 * std::log10(p / (2.0 * sigma * sigma)); }

/// Inverse of snr_db.
inline double sigma_from_snr_db(double p, double snr) { return std::sqrt(p / (2.0 * std::pow(10.0, snr / 10.0))); }

}  // namespace onebit
