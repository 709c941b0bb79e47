#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "onebit/constellation.hpp"
#include "onebit/error.hpp"
#include "onebit/rng.hpp"

namespace onebit {

using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// K x M downlink channel; row k holds h_k^H so the noiseless receive vector
/// is sqrt(P/M) * H * x.
class ChannelMatrix {
 public:
  explicit ChannelMatrix(CMatrix entries) : h_(std::move(entries)) {
    detail::require(h_.rows() >= 1 && h_.cols() >= 1, Errc::InvalidParameter,
                    "channel must have at least one user and one antenna");
    detail::require(h_.allFinite(), Errc::InvalidInput, "channel entries must be finite");
  }

  /// Single-user channel built from the vector h (stored as the row h^H).
  static ChannelMatrix from_user_vector(const CVector& h) { return ChannelMatrix(CMatrix(h.adjoint())); }

  Eigen::Index k_users() const noexcept { return h_.rows(); }
  Eigen::Index m_antennas() const noexcept { return h_.cols(); }
  const CMatrix& matrix() const noexcept { return h_; }

  /// The channel vector h_k of user k (conjugate of row k).
  CVector user_vector(Eigen::Index k) const { return h_.row(k).adjoint(); }

 private:
  CMatrix h_;
};

/// i.i.d. CN(0, 1) entries, deterministic per (master_seed, purpose, trial).
/// Each user row has its own stream (the seed's slot field is replaced by the
/// user index), so a smaller-M channel is a column prefix of a larger one.
inline ChannelMatrix generate_channel(Eigen::Index k_users, Eigen::Index m_antennas, const SeedSpec& seed) {
  detail::require(k_users >= 1 && m_antennas >= 1, Errc::InvalidParameter,
                  "channel dimensions must be positive");
  CMatrix h(k_users, m_antennas);
  for (Eigen::Index k = 0; k < k_users; ++k) {
    SeedSpec row_seed = seed;
    row_seed.slot = static_cast<std::uint64_t>(k);
    Rng rng(row_seed);
    for (Eigen::Index m = 0; m < m_antennas; ++m) h(k, m) = rng.complex_normal(0.5);
  }
  return ChannelMatrix(std::move(h));
}

/// i.i.d. CN(0, 2 sigma^2) samples.
inline std::vector<cplx> sample_noise(double sigma, std::size_t count, const SeedSpec& seed) {
  detail::require(std::isfinite(sigma) && sigma >= 0.0, Errc::InvalidParameter,
                  "noise standard deviation must be non-negative");
  std::vector<cplx> out(count, cplx(0.0, 0.0));
  if (sigma == 0.0) return out;
  Rng rng(seed);
  for (auto& z : out) z = rng.complex_normal(sigma * sigma);
  return out;
}

struct ChannelNorms {
  double l1;
  double l2;
};

inline ChannelNorms channel_norms(const CVector& h) {
  detail::require(h.size() >= 1, Errc::InvalidParameter, "channel row must be non-empty");
  double l1 = 0.0;
  double sq = 0.0;
  for (Eigen::Index m = 0; m < h.size(); ++m) {
    l1 += std::abs(h(m));
    sq += abs2(h(m));
  }
  return {l1, std::sqrt(sq)};
}

}  // namespace onebit
