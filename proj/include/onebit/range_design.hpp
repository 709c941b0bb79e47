#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <optional>

#include "onebit/channel.hpp"
#include "onebit/constellation.hpp"
#include "onebit/error.hpp"

// Constellation-range rules. Single-user rules take the channel vector h;
// the multi-user rules depend only on (P, M, K, N) through channel hardening.

namespace onebit {

/// sqrt(2/pi): shrink factor from infinite-resolution to one-bit ranges.
inline constexpr double kOneBitRangeFactor = 0.79788456080286535588;

/// Default headroom (in standard deviations of the per-vector symbol power)
/// used by the multi-user range rule.
inline constexpr double kDefaultHeadroom = 2.0;

enum class RangeScheme { InfTotalPower, InfPerAntenna, ZfMultiUser, OneBitSingle, OneBitMulti };

namespace detail {

inline void require_power(double p) {
  require(std::isfinite(p) && p > 0.0, Errc::InvalidParameter, "power must be positive");
}

inline ChannelNorms nonzero_norms(const CVector& h) {
  const auto norms = channel_norms(h);
  require(norms.l2 > 0.0, Errc::DegenerateChannel, "channel vector is zero");
  return norms;
}

inline void require_multi(Eigen::Index m, Eigen::Index k, int n) {
  require(m >= 1, Errc::InvalidParameter, "antenna count must be positive");
  require(k >= 1, Errc::InvalidParameter, "user count must be positive");
  require(n >= 2 && n % 2 == 0, Errc::InvalidParameter, "QAM side must be an even integer >= 2");
}

}  // namespace detail

/// c = sqrt(2P) ||h||_2, or sqrt(2PM) under channel hardening.
inline double range_inf_total(double p, const CVector& h, bool asymptotic) {
  detail::require_power(p);
  if (asymptotic) {
    detail::require(h.size() >= 1, Errc::InvalidParameter, "channel row must be non-empty");
    return std::sqrt(2.0 * p * static_cast<double>(h.size()));
  }
  return std::sqrt(2.0 * p) * detail::nonzero_norms(h).l2;
}

/// c = sqrt(2P/M) ||h||_1, or sqrt(pi/4) sqrt(2PM) under hardening.
inline double range_inf_per_antenna(double p, const CVector& h, bool asymptotic) {
  detail::require_power(p);
  detail::require(h.size() >= 1, Errc::InvalidParameter, "channel row must be non-empty");
  const double m = static_cast<double>(h.size());
  if (asymptotic) return std::sqrt(std::numbers::pi / 4.0) * std::sqrt(2.0 * p * m);
  return std::sqrt(2.0 * p / m) * detail::nonzero_norms(h).l1;
}

/// sqrt(2/pi) times the total-power range.
inline double range_one_bit_single(double p, const CVector& h, bool asymptotic) {
  return kOneBitRangeFactor * range_inf_total(p, h, asymptotic);
}

/// Load factor f(K, N) = 2 (K mu_s + kappa sqrt(K) sigma_s) / c^2, i.e. the
/// summed symbol power of K users kept `kappa` standard deviations inside the
/// budget PM. With kappa = 2 this is
/// K(N+1)/(3(N-1)) + 2 sqrt(K(N+1)(N^2-4) / (22.5 (N-1)^3)).
///
/// Derived from a large-K central-limit argument; for K < 4 it is a heuristic.
inline double load_factor_f(Eigen::Index k_users, int n_side, double kappa = kDefaultHeadroom) {
  detail::require_multi(1, k_users, n_side);
  detail::require(std::isfinite(kappa) && kappa >= 0.0, Errc::InvalidParameter, "headroom must be >= 0");
  const double k = static_cast<double>(k_users);
  const double n = n_side;
  const double mean_term = k * (n + 1) / (3 * (n - 1));
  const double spread = std::sqrt(k * (n + 1) * (n * n - 4) / (90 * (n - 1) * (n - 1) * (n - 1)));
  return mean_term + 2.0 * kappa * spread;
}

/// c*_ZF = sqrt(2PM / f(K, N)).
inline double range_zf_multi(double p, Eigen::Index m_antennas, Eigen::Index k_users, int n_side,
                             double kappa = kDefaultHeadroom) {
  detail::require_power(p);
  detail::require_multi(m_antennas, k_users, n_side);
  return std::sqrt(2.0 * p * static_cast<double>(m_antennas) / load_factor_f(k_users, n_side, kappa));
}

inline double range_one_bit_multi(double p, Eigen::Index m_antennas, Eigen::Index k_users, int n_side,
                                  double kappa = kDefaultHeadroom) {
  return kOneBitRangeFactor * range_zf_multi(p, m_antennas, k_users, n_side, kappa);
}

/// lambda = c / reference for any reference range.
inline double lambda_param(double range, double reference_range) {
  detail::require(std::isfinite(reference_range) && reference_range > 0.0, Errc::InvalidParameter,
                  "reference range must be positive");
  return range / reference_range;
}

/// Single-user lambda, relative to sqrt(2P) ||h||_2.
inline double lambda_single_user(double range, double p, const CVector& h) {
  return lambda_param(range, range_inf_total(p, h, false));
}

/// Multi-user lambda, relative to sqrt(2PM / f(K, N)).
inline double lambda_multi_user(double range, double p, Eigen::Index m_antennas, Eigen::Index k_users, int n_side,
                                double kappa = kDefaultHeadroom) {
  return lambda_param(range, range_zf_multi(p, m_antennas, k_users, n_side, kappa));
}

/// gamma = |s| / (sqrt(P) ||h||_2).
inline double gamma_param(cplx s, double p, const CVector& h) {
  detail::require_power(p);
  return std::abs(s) / (std::sqrt(p) * detail::nonzero_norms(h).l2);
}

/// A range rule selection. Single-user schemes work per channel realization
/// unless `asymptotic`; the multi-user schemes exist only in hardened form.
struct RangeRule {
  RangeScheme scheme = RangeScheme::InfTotalPower;
  bool asymptotic = false;
};

inline double design_range(RangeRule rule, double p, const ChannelMatrix& channel, int n_side,
                           double kappa = kDefaultHeadroom) {
  const bool multi = rule.scheme == RangeScheme::ZfMultiUser || rule.scheme == RangeScheme::OneBitMulti;
  if (multi) {
    detail::require(rule.asymptotic, Errc::InvalidParameter, "multi-user range rules are hardened-only");
    const double c = range_zf_multi(p, channel.m_antennas(), channel.k_users(), n_side, kappa);
    return rule.scheme == RangeScheme::OneBitMulti ? kOneBitRangeFactor * c : c;
  }
  detail::require(channel.k_users() == 1, Errc::InvalidParameter, "single-user range rule needs K = 1");
  const CVector h = channel.user_vector(0);
  switch (rule.scheme) {
    case RangeScheme::InfTotalPower: return range_inf_total(p, h, rule.asymptotic);
    case RangeScheme::InfPerAntenna: return range_inf_per_antenna(p, h, rule.asymptotic);
    default: return range_one_bit_single(p, h, rule.asymptotic);
  }
}

/// Phase-transition threshold of gamma for one-bit precoding.
inline constexpr double kGammaThreshold = kOneBitRangeFactor;

/// SDP randomized-rounding approximation ratio over the q-th roots of unity.
/// An empty `q` stands for q = infinity (the continuous unit circle).
inline double approximation_ratio(std::optional<int> q) {
  if (!q) return std::numbers::pi / 4.0;
  detail::require(*q >= 2, Errc::InvalidParameter, "approximation ratio needs q >= 2");
  if (*q == 2) return 2.0 / std::numbers::pi;
  const double qd = *q;
  return qd * qd * (1.0 - std::cos(2.0 * std::numbers::pi / qd)) / (8.0 * std::numbers::pi);
}

}  // namespace onebit
