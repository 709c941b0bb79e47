#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "onebit/channel.hpp"
#include "onebit/constellation.hpp"
#include "onebit/error.hpp"

namespace onebit {

/// Largest M2 the two-step precoders accept (4^16 completions).
inline constexpr int kMaxExhaustiveAntennas = 16;
/// Largest M the brute-force oracle accepts (4^12 words).
inline constexpr int kMaxOracleAntennas = 12;
/// Default size of the exhaustive tail of the two-step precoders.
inline constexpr int kDefaultExhaustiveAntennas = 8;
/// ZF is refused when cond(H H^H) exceeds this.
inline constexpr double kMaxZfCondition = 1e12;

/// A one-bit transmit word: one alphabet index per antenna.
struct OneBitSignal {
  std::vector<std::uint8_t> entries;

  std::size_t size() const noexcept { return entries.size(); }

  /// Normalized transmit vector x in X^M; ||x||^2 = M.
  CVector transmit() const {
    CVector x(static_cast<Eigen::Index>(entries.size()));
    for (std::size_t m = 0; m < entries.size(); ++m) x(static_cast<Eigen::Index>(m)) = kQpskAlphabet[entries[m]];
    return x;
  }
};

using TransmitSignal = std::variant<CVector, OneBitSignal>;

struct PrecodeOutcome {
  TransmitSignal signal;
  CVector noiseless_rx;  // sqrt(P/M) H x
  double residual_inf = 0.0;
  double residual_l2 = 0.0;

  CVector transmit() const {
    if (const auto* bits = std::get_if<OneBitSignal>(&signal)) return bits->transmit();
    return std::get<CVector>(signal);
  }
  bool is_one_bit() const noexcept { return std::holds_alternative<OneBitSignal>(signal); }
};

/// sqrt(P/M) H x.
inline CVector noiseless_receive(const ChannelMatrix& channel, const CVector& x, double p) {
  detail::require(x.size() == channel.m_antennas(), Errc::DimensionMismatch,
                  "transmit vector length must equal the antenna count");
  detail::require(p > 0.0, Errc::InvalidParameter, "power must be positive");
  return std::sqrt(p / static_cast<double>(channel.m_antennas())) * (channel.matrix() * x);
}

inline PrecodeOutcome make_outcome(const ChannelMatrix& channel, TransmitSignal signal, const CVector& s, double p) {
  detail::require(s.size() == channel.k_users(), Errc::DimensionMismatch, "one symbol per user is required");
  PrecodeOutcome out{std::move(signal), CVector(), 0.0, 0.0};
  out.noiseless_rx = noiseless_receive(channel, out.transmit(), p);
  double sum = 0.0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    const double e = abs2(out.noiseless_rx(k) - s(k));
    sum += e;
    out.residual_inf = std::max(out.residual_inf, e);
  }
  out.residual_inf = std::sqrt(out.residual_inf);
  out.residual_l2 = std::sqrt(sum);
  return out;
}

namespace detail {

inline CVector single(cplx s) {
  CVector v(1);
  v(0) = s;
  return v;
}

inline double phase(cplx z) { return z == cplx(0.0, 0.0) ? 0.0 : std::arg(z); }

}  // namespace detail

// ---------------------------------------------------------------------------
// Infinite-resolution single-user precoders
// ---------------------------------------------------------------------------

/// Matched filter under a per-symbol total power budget ||x||^2 <= M:
/// reproduces s exactly while |s| <= sqrt(P) ||h||_2 and clips the magnitude
/// beyond that.
inline PrecodeOutcome precode_inf_total(const CVector& h, cplx s, double p) {
  detail::require(p > 0.0, Errc::InvalidParameter, "power must be positive");
  const auto norms = channel_norms(h);
  detail::require(norms.l2 > 0.0, Errc::DegenerateChannel, "channel vector is zero");
  const double m = static_cast<double>(h.size());
  const double reach = std::sqrt(p) * norms.l2;
  const double scale = std::min(1.0, std::abs(s) / reach);
  const cplx rot = std::polar(1.0, detail::phase(s));
  CVector x = (std::sqrt(m) * scale / norms.l2 * rot) * h;
  return make_outcome(ChannelMatrix::from_user_vector(h), std::move(x), detail::single(s), p);
}

/// Phase-aligned precoder under |x_m| <= 1: equal amplitude on every antenna,
/// exact while |s| <= sqrt(P/M) ||h||_1.
inline PrecodeOutcome precode_inf_per_antenna(const CVector& h, cplx s, double p) {
  detail::require(p > 0.0, Errc::InvalidParameter, "power must be positive");
  const auto norms = channel_norms(h);
  detail::require(norms.l1 > 0.0, Errc::DegenerateChannel, "channel vector is zero");
  const double m = static_cast<double>(h.size());
  const double amplitude = std::min(std::sqrt(m / p) * std::abs(s) / norms.l1, 1.0);
  const double phase_s = detail::phase(s);
  CVector x(h.size());
  for (Eigen::Index i = 0; i < h.size(); ++i) x(i) = std::polar(amplitude, detail::phase(h(i)) + phase_s);
  return make_outcome(ChannelMatrix::from_user_vector(h), std::move(x), detail::single(s), p);
}

// ---------------------------------------------------------------------------
// Zero forcing
// ---------------------------------------------------------------------------

struct PowerReport {
  double norm_sq = 0.0;  // ||x*||^2 before any clipping
  double budget = 0.0;   // M
  bool violated = false;
};

enum class PowerPolicy {
  Exact,  // return x* even if it exceeds the budget
  Clip,   // scale x* down onto ||x||^2 = M when it exceeds the budget
};

struct ZfResult {
  PrecodeOutcome outcome;
  PowerReport power;
};

/// Zero-forcing precoder x* = sqrt(M/P) H^H (H H^H)^{-1} s. The pseudo-inverse
/// is factored once per channel and reused for every symbol vector.
class ZfPrecoder {
 public:
  ZfPrecoder(ChannelMatrix channel, double p) : channel_(std::move(channel)), p_(p) {
    detail::require(p > 0.0, Errc::InvalidParameter, "power must be positive");
    detail::require(channel_.k_users() <= channel_.m_antennas(), Errc::Infeasible,
                    "zero forcing needs at least as many antennas as users");
    const CMatrix& h = channel_.matrix();
    const CMatrix gram = h * h.adjoint();
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    detail::require(lo > 0.0 && hi / lo <= kMaxZfCondition, Errc::SingularChannel,
                    "H H^H is singular or ill-conditioned");
    const double m = static_cast<double>(channel_.m_antennas());
    pinv_ = std::sqrt(m / p_) * (h.adjoint() * gram.llt().solve(CMatrix::Identity(gram.rows(), gram.cols())));
  }

  const ChannelMatrix& channel() const noexcept { return channel_; }

  ZfResult precode(const CVector& s, PowerPolicy policy = PowerPolicy::Exact) const {
    detail::require(s.size() == channel_.k_users(), Errc::DimensionMismatch, "one symbol per user is required");
    CVector x = pinv_ * s;
    const double budget = static_cast<double>(channel_.m_antennas());
    PowerReport power{x.squaredNorm(), budget, false};
    power.violated = power.norm_sq > budget;
    if (power.violated && policy == PowerPolicy::Clip) x *= std::sqrt(budget / power.norm_sq);
    return {make_outcome(channel_, std::move(x), s, p_), power};
  }

  /// Linear-quantized ZF baseline: the sign pattern of x* on each I/Q rail.
  PrecodeOutcome precode_quantized(const CVector& s) const {
    detail::require(s.size() == channel_.k_users(), Errc::DimensionMismatch, "one symbol per user is required");
    const CVector x = pinv_ * s;
    OneBitSignal bits;
    bits.entries.reserve(static_cast<std::size_t>(x.size()));
    for (Eigen::Index m = 0; m < x.size(); ++m) {
      const bool re_pos = x(m).real() >= 0.0;
      const bool im_pos = x(m).imag() >= 0.0;
      bits.entries.push_back(static_cast<std::uint8_t>((re_pos ? 0 : 2) + (im_pos ? 0 : 1)));
    }
    return make_outcome(channel_, std::move(bits), s, p_);
  }

 private:
  ChannelMatrix channel_;
  double p_;
  CMatrix pinv_;
};

inline ZfResult precode_zf(const ChannelMatrix& channel, const CVector& s, double p) {
  return ZfPrecoder(channel, p).precode(s);
}

inline PrecodeOutcome precode_quantized_zf(const ChannelMatrix& channel, const CVector& s, double p) {
  return ZfPrecoder(channel, p).precode_quantized(s);
}

// ---------------------------------------------------------------------------
// One-bit precoders
// ---------------------------------------------------------------------------

enum class ResidualNorm { L2, Inf };

namespace detail {

// The alphabet is e^{i pi/4} times {1, -i, i, -1} (in alphabet index order),
// so every candidate contribution is an exact quarter-turn of one base vector
// b_j = sqrt(P/M) * H(:, j) * e^{i pi/4}.
inline cplx rotate(cplx b, std::uint8_t symbol) noexcept {
  switch (symbol) {
    case 0: return b;
    case 1: return {b.imag(), -b.real()};
    case 2: return {-b.imag(), b.real()};
    default: return -b;
  }
}

/// Scaled, pre-rotated channel columns, stored antenna-major.
class RotatedBases {
 public:
  RotatedBases(const ChannelMatrix& channel, double p)
      : k_(static_cast<std::size_t>(channel.k_users())), m_(static_cast<std::size_t>(channel.m_antennas())) {
    require(p > 0.0, Errc::InvalidParameter, "power must be positive");
    const cplx scale = std::sqrt(p / static_cast<double>(m_)) * kQpskAlphabet[0];
    data_.resize(k_ * m_);
    norm_sq_.resize(m_);
    for (std::size_t j = 0; j < m_; ++j) {
      double n = 0.0;
      for (std::size_t k = 0; k < k_; ++k) {
        const cplx b = scale * channel.matrix()(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
        data_[j * k_ + k] = b;
        n += abs2(b);
      }
      norm_sq_[j] = n;
    }
  }

  std::size_t users() const noexcept { return k_; }
  std::size_t antennas() const noexcept { return m_; }
  const cplx* column(std::size_t j) const noexcept { return data_.data() + j * k_; }
  double norm_sq(std::size_t j) const noexcept { return norm_sq_[j]; }

 private:
  std::size_t k_;
  std::size_t m_;
  std::vector<cplx> data_;
  std::vector<double> norm_sq_;
};

inline double residual_measure(const cplx* r, std::size_t k, ResidualNorm norm) noexcept {
  double v = 0.0;
  if (norm == ResidualNorm::L2) {
    for (std::size_t i = 0; i < k; ++i) v += abs2(r[i]);
  } else {
    for (std::size_t i = 0; i < k; ++i) v = std::max(v, abs2(r[i]));
  }
  return v;
}

/// Depth-first enumeration of all 4^n assignments of `antennas`, keeping the
/// first (lexicographically smallest) minimizer of the residual measure.
/// Partial residuals are reused down the tree.
class ExhaustiveSearch {
 public:
  ExhaustiveSearch(const RotatedBases& bases, std::span<const std::size_t> antennas, ResidualNorm norm)
      : bases_(bases), antennas_(antennas), norm_(norm), k_(bases.users()) {}

  /// Returns the minimal squared measure; `best` receives the symbols.
  double run(std::span<const cplx> target, std::vector<std::uint8_t>& best) {
    const std::size_t n = antennas_.size();
    partial_.assign((n + 1) * k_, cplx(0.0, 0.0));
    std::copy(target.begin(), target.end(), partial_.begin());
    current_.assign(n, 0);
    best_.assign(n, 0);
    best_value_ = std::numeric_limits<double>::infinity();
    if (n == 0) {
      best_value_ = residual_measure(partial_.data(), k_, norm_);
    } else if (k_ == 1) {
      descend_single(0, target[0]);
    } else {
      descend(0);
    }
    best = best_;
    return best_value_;
  }

 private:
  void descend(std::size_t depth) {
    const cplx* parent = partial_.data() + depth * k_;
    cplx* child = partial_.data() + (depth + 1) * k_;
    const cplx* b = bases_.column(antennas_[depth]);
    const bool leaf = depth + 1 == antennas_.size();
    for (std::uint8_t sym = 0; sym < kAlphabetSize; ++sym) {
      for (std::size_t k = 0; k < k_; ++k) child[k] = parent[k] - rotate(b[k], sym);
      current_[depth] = sym;
      if (leaf) {
        const double v = residual_measure(child, k_, norm_);
        if (v < best_value_) {
          best_value_ = v;
          best_ = current_;
        }
      } else {
        descend(depth + 1);
      }
    }
  }

  // K = 1: both norms reduce to the modulus; same arithmetic, no buffers.
  void descend_single(std::size_t depth, cplx parent) {
    const cplx b = *bases_.column(antennas_[depth]);
    const bool leaf = depth + 1 == antennas_.size();
    for (std::uint8_t sym = 0; sym < kAlphabetSize; ++sym) {
      const cplx child = parent - rotate(b, sym);
      current_[depth] = sym;
      if (leaf) {
        const double v = abs2(child);
        if (v < best_value_) {
          best_value_ = v;
          best_ = current_;
        }
      } else {
        descend_single(depth + 1, child);
      }
    }
  }

  const RotatedBases& bases_;
  std::span<const std::size_t> antennas_;
  ResidualNorm norm_;
  std::size_t k_;
  std::vector<cplx> partial_;
  std::vector<std::uint8_t> current_;
  std::vector<std::uint8_t> best_;
  double best_value_ = 0.0;
};

}  // namespace detail

/// One greedy assignment: the antenna and symbol chosen and the residual
/// vector they were chosen against.
struct GreedyStep {
  std::size_t antenna;
  std::uint8_t symbol;
  std::vector<cplx> residual_before;
};

/// Two-step one-bit symbol-level precoder for a fixed channel.
///
/// Step 1 assigns M - M2 antennas greedily: each iteration picks the
/// (antenna, symbol) pair that minimizes the 2-norm of the residual vector
/// s_r - sqrt(P/M) h~_j x over all unassigned antennas. The residual may grow
/// when every option overshoots; all M - M2 antennas are assigned regardless.
/// Step 2 searches all 4^M2 completions of the remaining antennas for the
/// smallest infinity-norm residual (identical to the modulus when K = 1).
/// M2 = 0 skips step 2.
///
/// Ties go to the smallest antenna index, then the smallest alphabet index.
class OneBitPrecoder {
 public:
  OneBitPrecoder(const ChannelMatrix& channel, double p, int m2 = kDefaultExhaustiveAntennas)
      : channel_(channel), p_(p), m2_(m2), bases_(channel, p) {
    detail::require(m2 >= 0, Errc::InvalidParameter, "M2 must be non-negative");
    detail::require(m2 <= kMaxExhaustiveAntennas, Errc::ComplexityCap, "M2 exceeds the exhaustive-search cap");
    detail::require(m2 <= channel.m_antennas(), Errc::InvalidParameter, "M2 exceeds the antenna count");
  }

  const ChannelMatrix& channel() const noexcept { return channel_; }
  int exhaustive_antennas() const noexcept { return m2_; }

  PrecodeOutcome precode(const CVector& s, std::vector<GreedyStep>* trace = nullptr) const {
    const std::size_t k_users = bases_.users();
    const std::size_t m = bases_.antennas();
    detail::require(s.size() == static_cast<Eigen::Index>(k_users), Errc::DimensionMismatch,
                    "one symbol per user is required");

    std::vector<cplx> r(s.data(), s.data() + s.size());
    // Unassigned antennas, kept unordered (removal swaps in the last entry);
    // ties are resolved on the antenna index explicitly.
    std::vector<std::size_t> remaining(m);
    for (std::size_t j = 0; j < m; ++j) remaining[j] = j;
    OneBitSignal bits;
    bits.entries.assign(m, 0);

    const std::size_t greedy_count = m - static_cast<std::size_t>(m2_);
    std::vector<double> b_re;
    std::vector<double> b_im;
    std::vector<double> b_norm;
    std::vector<double> score;
    if (k_users == 1 && greedy_count > 0) {
      b_re.resize(m);
      b_im.resize(m);
      b_norm.resize(m);
      score.resize(m);
      for (std::size_t j = 0; j < m; ++j) {
        b_re[j] = bases_.column(j)->real();
        b_im[j] = bases_.column(j)->imag();
        b_norm[j] = bases_.norm_sq(j);
      }
    }

    for (std::size_t it = 0; it < greedy_count; ++it) {
      // ||r - rot(b, x)||^2 = ||r||^2 + ||b||^2 - 2 Re <rot(b, x), r>; with
      // t = <b, r> the last inner product is Re t, -Im t, Im t, -Re t for
      // alphabet indices 0..3, so the best symbol scores
      // ||b||^2 - 2 max(|Re t|, |Im t|).
      const std::size_t n = remaining.size();
      if (k_users == 1) {
        const double r_re = r[0].real();
        const double r_im = r[0].imag();
        for (std::size_t pos = 0; pos < n; ++pos) {
          const double t_re = b_re[pos] * r_re + b_im[pos] * r_im;
          const double t_im = b_re[pos] * r_im - b_im[pos] * r_re;
          score[pos] = b_norm[pos] - 2.0 * std::max(std::abs(t_re), std::abs(t_im));
        }
      } else {
        score.resize(n);
        for (std::size_t pos = 0; pos < n; ++pos) {
          const cplx* b = bases_.column(remaining[pos]);
          double t_re = 0.0;
          double t_im = 0.0;
          for (std::size_t k = 0; k < k_users; ++k) {
            t_re += b[k].real() * r[k].real() + b[k].imag() * r[k].imag();
            t_im += b[k].real() * r[k].imag() - b[k].imag() * r[k].real();
          }
          score[pos] = bases_.norm_sq(remaining[pos]) - 2.0 * std::max(std::abs(t_re), std::abs(t_im));
        }
      }
      std::size_t best_pos = 0;
      for (std::size_t pos = 1; pos < n; ++pos) {
        if (score[pos] < score[best_pos] || (score[pos] == score[best_pos] && remaining[pos] < remaining[best_pos])) {
          best_pos = pos;
        }
      }

      const std::size_t j = remaining[best_pos];
      const cplx* b = bases_.column(j);
      double t_re = 0.0;
      double t_im = 0.0;
      for (std::size_t k = 0; k < k_users; ++k) {
        t_re += b[k].real() * r[k].real() + b[k].imag() * r[k].imag();
        t_im += b[k].real() * r[k].imag() - b[k].imag() * r[k].real();
      }
      const double gains[kAlphabetSize] = {t_re, -t_im, t_im, -t_re};
      std::uint8_t sym = 0;
      for (std::uint8_t x = 1; x < kAlphabetSize; ++x) {
        if (gains[x] > gains[sym]) sym = x;
      }
      if (trace) trace->push_back({j, sym, r});
      for (std::size_t k = 0; k < k_users; ++k) r[k] -= detail::rotate(b[k], sym);
      bits.entries[j] = sym;

      remaining[best_pos] = remaining[n - 1];
      remaining.pop_back();
      if (k_users == 1) {
        b_re[best_pos] = b_re[n - 1];
        b_im[best_pos] = b_im[n - 1];
        b_norm[best_pos] = b_norm[n - 1];
      }
    }

    if (!remaining.empty()) {
      std::sort(remaining.begin(), remaining.end());
      std::vector<std::uint8_t> tail;
      detail::ExhaustiveSearch(bases_, remaining, ResidualNorm::Inf).run(r, tail);
      for (std::size_t i = 0; i < remaining.size(); ++i) bits.entries[remaining[i]] = tail[i];
    }
    return make_outcome(channel_, std::move(bits), s, p_);
  }

 private:
  ChannelMatrix channel_;
  double p_;
  int m2_;
  detail::RotatedBases bases_;
};

/// Single-user two-step precoder (greedy modulus, then exhaustive modulus).
inline PrecodeOutcome precode_one_bit_single(const CVector& h, cplx s, double p, int m2 = kDefaultExhaustiveAntennas) {
  return OneBitPrecoder(ChannelMatrix::from_user_vector(h), p, m2).precode(detail::single(s));
}

/// Multi-user two-step precoder (greedy 2-norm, then exhaustive infinity-norm).
inline PrecodeOutcome precode_one_bit_multi(const ChannelMatrix& channel, const CVector& s, double p,
                                            int m2 = kDefaultExhaustiveAntennas) {
  return OneBitPrecoder(channel, p, m2).precode(s);
}

/// Global minimizer of the chosen residual norm over all 4^M one-bit words.
/// Ties go to the lexicographically smallest index sequence.
inline PrecodeOutcome oracle_exhaustive(const ChannelMatrix& channel, const CVector& s, double p,
                                        ResidualNorm norm = ResidualNorm::Inf) {
  detail::require(channel.m_antennas() <= kMaxOracleAntennas, Errc::ComplexityCap,
                  "exhaustive oracle is capped at 12 antennas");
  detail::require(s.size() == channel.k_users(), Errc::DimensionMismatch, "one symbol per user is required");
  const detail::RotatedBases bases(channel, p);
  std::vector<std::size_t> antennas(bases.antennas());
  for (std::size_t j = 0; j < antennas.size(); ++j) antennas[j] = j;
  std::vector<cplx> target(s.data(), s.data() + s.size());
  OneBitSignal bits;
  detail::ExhaustiveSearch(bases, antennas, norm).run(target, bits.entries);
  return make_outcome(channel, std::move(bits), s, p);
}

/// All 4^M single-user noiseless receive points sqrt(P/M) h^H x, in
/// lexicographic order of the word (antenna 0 most significant).
inline std::vector<cplx> enumerate_noiseless_points(const CVector& h, double p) {
  detail::require(h.size() >= 1 && h.size() <= kMaxOracleAntennas, Errc::ComplexityCap,
                  "enumeration is capped at 12 antennas");
  detail::require(p > 0.0, Errc::InvalidParameter, "power must be positive");
  const std::size_t m = static_cast<std::size_t>(h.size());
  const double scale = std::sqrt(p / static_cast<double>(m));
  std::vector<cplx> points(std::size_t{1} << (2 * m));
  for (std::size_t word = 0; word < points.size(); ++word) {
    cplx acc(0.0, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const auto sym = static_cast<std::size_t>((word >> (2 * (m - 1 - j))) & 3u);
      acc += std::conj(h(static_cast<Eigen::Index>(j))) * kQpskAlphabet[sym];
    }
    points[word] = scale * acc;
  }
  return points;
}

}  // namespace onebit
