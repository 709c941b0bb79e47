#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "onebit/channel.hpp"
#include "onebit/constellation.hpp"
#include "onebit/metrics.hpp"
#include "onebit/precoding.hpp"
#include "onebit/range_design.hpp"
#include "onebit/sim/config.hpp"
#include "onebit/sim/table.hpp"

// Monte Carlo harness. Every (trial, slot) draws its symbols and noise from
// its own stream, each trial's result lands in its own slot, and aggregation
// runs in trial order afterwards, so the output does not depend on the thread
// count.

namespace onebit::sim {

struct RunOptions {
  unsigned threads = 1;
};

/// Runs fn(i) for i in [0, count) on up to `threads` workers. The first
/// exception thrown by any task is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto worker = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

struct Summary {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Mean and std-error (sample std / sqrt(n)) of per-trial values.
inline Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  for (double v : values) s.mean += v;
  s.mean /= n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return s;
}

namespace detail {

/// Reference range the scheme range factors and lambda multiply.
inline double reference_range(const ExperimentConfig& cfg, const ChannelMatrix& channel) {
  if (channel.k_users() == 1) {
    return range_inf_total(cfg.power, channel.user_vector(0), cfg.hardened_range);
  }
  return range_zf_multi(cfg.power, channel.m_antennas(), channel.k_users(), cfg.n_side, cfg.kappa);
}

/// Per-trial state of one scheme: precoders are built once per channel.
class SchemeRunner {
 public:
  SchemeRunner(const Scheme& scheme, const ChannelMatrix& channel, double p)
      : scheme_(scheme), channel_(channel), p_(p) {
    switch (scheme.kind) {
      case SchemeKind::InfTotal:
      case SchemeKind::InfPerAntenna: h_ = channel.user_vector(0); break;
      case SchemeKind::ZfInfinite:
      case SchemeKind::QuantizedZf: zf_ = std::make_unique<ZfPrecoder>(channel, p); break;
      case SchemeKind::OneBit: one_bit_ = std::make_unique<OneBitPrecoder>(channel, p, scheme.m2); break;
      case SchemeKind::OracleExhaustive: break;
    }
  }

  struct Result {
    CVector noiseless_rx;
    double residual_sq;  // ||s_hat - s||_2^2
    bool power_violated;
  };

  Result run(const CVector& s) const {
    switch (scheme_.kind) {
      case SchemeKind::InfTotal: return from(precode_inf_total(h_, s(0), p_));
      case SchemeKind::InfPerAntenna: return from(precode_inf_per_antenna(h_, s(0), p_));
      case SchemeKind::ZfInfinite: {
        auto r = zf_->precode(s, PowerPolicy::Clip);
        return from(std::move(r.outcome), r.power.violated);
      }
      case SchemeKind::QuantizedZf: return from(zf_->precode_quantized(s));
      case SchemeKind::OneBit: return from(one_bit_->precode(s));
      case SchemeKind::OracleExhaustive: return from(oracle_exhaustive(channel_, s, p_, ResidualNorm::Inf));
    }
    return {};
  }

 private:
  static Result from(PrecodeOutcome out, bool violated = false) {
    return {std::move(out.noiseless_rx), out.residual_l2 * out.residual_l2, violated};
  }

  Scheme scheme_;
  const ChannelMatrix& channel_;
  double p_;
  CVector h_;
  std::unique_ptr<ZfPrecoder> zf_;
  std::unique_ptr<OneBitPrecoder> one_bit_;
};

inline std::vector<std::size_t> draw_symbols(const ExperimentConfig& cfg, std::uint64_t trial, std::uint64_t slot) {
  Rng rng({cfg.seed, StreamPurpose::Symbols, trial, slot});
  const auto n2 = static_cast<std::uint64_t>(cfg.n_side) * static_cast<std::uint64_t>(cfg.n_side);
  std::vector<std::size_t> idx(static_cast<std::size_t>(cfg.k_users));
  for (auto& i : idx) i = static_cast<std::size_t>(rng.uniform_index(n2));
  return idx;
}

/// Unit noise (variance 1 per real dimension); scaled by sigma per SNR point
/// so all SNR points of a slot share one noise realization.
inline std::vector<cplx> draw_unit_noise(const ExperimentConfig& cfg, std::uint64_t trial, std::uint64_t slot) {
  return sample_noise(1.0, static_cast<std::size_t>(cfg.k_users), {cfg.seed, StreamPurpose::Noise, trial, slot});
}

inline ChannelMatrix trial_channel(const ExperimentConfig& cfg, int m_antennas, std::uint64_t trial) {
  return generate_channel(cfg.k_users, m_antennas, {cfg.seed, StreamPurpose::Channel, trial, 0});
}

inline nlohmann::json config_json(const ExperimentConfig& cfg) {
  nlohmann::json schemes = nlohmann::json::array();
  for (const auto& s : cfg.schemes) schemes.push_back(s.label());
  return {{"experiment", std::string(to_string(cfg.kind))},
          {"k_users", cfg.k_users},
          {"m_antennas", cfg.m_antennas},
          {"n_side", cfg.n_side},
          {"power", cfg.power},
          {"snr_db", cfg.snr_db},
          {"lambda", cfg.lambdas},
          {"schemes", schemes},
          {"trials", cfg.trials},
          {"symbols_per_channel", cfg.symbols_per_channel},
          {"seed", cfg.seed},
          {"kappa", cfg.kappa},
          {"hardened_range", cfg.hardened_range}};
}

inline ResultTable new_table(const ExperimentConfig& cfg) {
  ResultTable t;
  t.metadata = {{"config", config_json(cfg)}, {"seed", cfg.seed}, {"version", std::string(kArtifactVersion)}};
  return t;
}

/// Per-trial SER counts for all schemes and SNR points at one antenna count.
struct SerTrial {
  std::vector<std::vector<double>> ser;       // [scheme][snr]
  std::vector<std::vector<double>> analytic;  // [scheme][snr]
  std::vector<double> violation_rate;         // [scheme]
};

inline SerTrial run_ser_trial(const ExperimentConfig& cfg, int m_antennas, std::uint64_t trial,
                              const std::vector<double>& sigmas) {
  const ChannelMatrix channel = trial_channel(cfg, m_antennas, trial);
  const double reference = reference_range(cfg, channel);
  const std::size_t n_schemes = cfg.schemes.size();
  const std::size_t n_snr = sigmas.size();

  std::vector<QamConstellation> constellations;
  std::vector<std::unique_ptr<SchemeRunner>> runners;
  for (const auto& scheme : cfg.schemes) {
    constellations.emplace_back(cfg.n_side, scheme.range_factor * reference);
    runners.push_back(std::make_unique<SchemeRunner>(scheme, channel, cfg.power));
  }

  std::vector<std::vector<std::uint64_t>> errors(n_schemes, std::vector<std::uint64_t>(n_snr, 0));
  std::vector<std::uint64_t> violations(n_schemes, 0);
  CVector s(cfg.k_users);
  for (std::uint64_t slot = 0; slot < cfg.symbols_per_channel; ++slot) {
    const auto idx = draw_symbols(cfg, trial, slot);
    const auto noise = draw_unit_noise(cfg, trial, slot);
    for (std::size_t si = 0; si < n_schemes; ++si) {
      const auto& qam = constellations[si];
      for (Eigen::Index k = 0; k < s.size(); ++k) s(k) = qam[idx[static_cast<std::size_t>(k)]];
      const auto res = runners[si]->run(s);
      if (res.power_violated) ++violations[si];
      for (std::size_t j = 0; j < n_snr; ++j) {
        for (Eigen::Index k = 0; k < s.size(); ++k) {
          const cplx y = res.noiseless_rx(k) + sigmas[j] * noise[static_cast<std::size_t>(k)];
          if (qam.quantize(y) != idx[static_cast<std::size_t>(k)]) ++errors[si][j];
        }
      }
    }
  }

  SerTrial out;
  const double symbols = static_cast<double>(cfg.symbols_per_channel) * cfg.k_users;
  for (std::size_t si = 0; si < n_schemes; ++si) {
    std::vector<double> ser(n_snr);
    std::vector<double> analytic(n_snr);
    for (std::size_t j = 0; j < n_snr; ++j) {
      ser[j] = static_cast<double>(errors[si][j]) / symbols;
      analytic[j] = analytic_ser(cfg.n_side, constellations[si].min_distance(), sigmas[j]);
    }
    out.ser.push_back(std::move(ser));
    out.analytic.push_back(std::move(analytic));
    out.violation_rate.push_back(static_cast<double>(violations[si]) / static_cast<double>(cfg.symbols_per_channel));
  }
  return out;
}

/// Appends SER rows (and ZF power-violation rows) for one antenna count.
/// `point_value(j)` names the sweep value of SNR index j.
template <class PointValue>
void append_ser_rows(ResultTable& table, const ExperimentConfig& cfg, const std::vector<SerTrial>& trials,
                     const std::string& variable, PointValue point_value, std::size_t n_points) {
  for (std::size_t si = 0; si < cfg.schemes.size(); ++si) {
    const std::string label = cfg.schemes[si].label();
    for (std::size_t j = 0; j < n_points; ++j) {
      std::vector<double> ser(trials.size());
      double analytic = 0.0;
      for (std::size_t t = 0; t < trials.size(); ++t) {
        ser[t] = trials[t].ser[si][j];
        analytic += trials[t].analytic[si][j];
      }
      const auto sum = summarize(ser);
      table.rows.push_back({variable, point_value(j), label, "ser", sum.mean, sum.std_error, trials.size(),
                            analytic / static_cast<double>(trials.size())});
    }
    if (cfg.schemes[si].kind == SchemeKind::ZfInfinite) {
      std::vector<double> rate(trials.size());
      for (std::size_t t = 0; t < trials.size(); ++t) rate[t] = trials[t].violation_rate[si];
      const auto sum = summarize(rate);
      for (std::size_t j = 0; j < n_points; ++j) {
        table.rows.push_back({variable, point_value(j), label, "power_violation", sum.mean, sum.std_error,
                              trials.size(), q_function(cfg.kappa)});
      }
    }
  }
}

inline std::vector<double> sigmas_for(const ExperimentConfig& cfg) {
  std::vector<double> sigmas;
  for (double snr : cfg.snr_db) sigmas.push_back(sigma_from_snr_db(cfg.power, snr));
  return sigmas;
}

}  // namespace detail

/// Reconstruction MSE versus the normalized range lambda. For each lambda the
/// constellation range is lambda times the reference range; every scheme's
/// own range factor is ignored. Reported per user: ||s_hat - s||^2 / K.
inline ResultTable run_mse_sweep(ExperimentConfig cfg, const RunOptions& opts = {}) {
  cfg.kind = ExperimentKind::MseSweep;
  cfg.validate();
  const std::size_t n_lambda = cfg.lambdas.size();
  const std::size_t n_schemes = cfg.schemes.size();
  // [trial][scheme][lambda]
  std::vector<std::vector<std::vector<double>>> per_trial(cfg.trials);

  parallel_for(cfg.trials, opts.threads, [&](std::size_t t) {
    const auto trial = static_cast<std::uint64_t>(t);
    const ChannelMatrix channel = detail::trial_channel(cfg, cfg.antennas(), trial);
    const double reference = detail::reference_range(cfg, channel);
    std::vector<std::vector<double>> acc(n_schemes, std::vector<double>(n_lambda, 0.0));
    std::vector<std::unique_ptr<detail::SchemeRunner>> runners;
    for (const auto& scheme : cfg.schemes) {
      runners.push_back(std::make_unique<detail::SchemeRunner>(scheme, channel, cfg.power));
    }
    CVector s(cfg.k_users);
    for (std::size_t li = 0; li < n_lambda; ++li) {
      const QamConstellation qam(cfg.n_side, cfg.lambdas[li] * reference);
      for (std::uint64_t slot = 0; slot < cfg.symbols_per_channel; ++slot) {
        const auto idx = detail::draw_symbols(cfg, trial, slot);
        for (Eigen::Index k = 0; k < s.size(); ++k) s(k) = qam[idx[static_cast<std::size_t>(k)]];
        for (std::size_t si = 0; si < n_schemes; ++si) acc[si][li] += runners[si]->run(s).residual_sq;
      }
    }
    const double norm = static_cast<double>(cfg.symbols_per_channel) * cfg.k_users;
    for (auto& row : acc) {
      for (auto& v : row) v /= norm;
    }
    per_trial[t] = std::move(acc);
  });

  ResultTable table = detail::new_table(cfg);
  for (std::size_t si = 0; si < n_schemes; ++si) {
    for (std::size_t li = 0; li < n_lambda; ++li) {
      std::vector<double> v(cfg.trials);
      for (std::size_t t = 0; t < cfg.trials; ++t) v[t] = per_trial[t][si][li];
      const auto sum = summarize(v);
      table.rows.push_back({"lambda", cfg.lambdas[li], cfg.schemes[si].label(), "mse", sum.mean, sum.std_error,
                            cfg.trials, std::numeric_limits<double>::quiet_NaN()});
    }
  }
  return table;
}

/// Empirical SER versus SNR = 10 log10(P / (2 sigma^2)) at a fixed antenna
/// count. The analytic column is avg_neighbors(N) Q(d / (2 sigma)) at each
/// scheme's minimum distance, averaged over the channel draws.
inline ResultTable run_ser_vs_snr(ExperimentConfig cfg, const RunOptions& opts = {}) {
  cfg.kind = ExperimentKind::SerVsSnr;
  cfg.validate();
  const auto sigmas = detail::sigmas_for(cfg);
  std::vector<detail::SerTrial> trials(cfg.trials);
  parallel_for(cfg.trials, opts.threads, [&](std::size_t t) {
    trials[t] = detail::run_ser_trial(cfg, cfg.antennas(), static_cast<std::uint64_t>(t), sigmas);
  });
  ResultTable table = detail::new_table(cfg);
  detail::append_ser_rows(
      table, cfg, trials, "snr_db", [&](std::size_t j) { return cfg.snr_db[j]; }, sigmas.size());
  return table;
}

/// Empirical SER versus antenna count at the first SNR of the config.
inline ResultTable run_ser_vs_antennas(ExperimentConfig cfg, const RunOptions& opts = {}) {
  cfg.kind = ExperimentKind::SerVsAntennas;
  cfg.validate();
  const std::vector<double> sigmas{sigma_from_snr_db(cfg.power, cfg.snr_db.front())};
  ResultTable table = detail::new_table(cfg);
  // Rows are grouped per scheme across the M grid.
  std::vector<std::vector<detail::SerTrial>> per_m;
  for (int m : cfg.m_antennas) {
    std::vector<detail::SerTrial> trials(cfg.trials);
    parallel_for(cfg.trials, opts.threads, [&](std::size_t t) {
      trials[t] = detail::run_ser_trial(cfg, m, static_cast<std::uint64_t>(t), sigmas);
    });
    per_m.push_back(std::move(trials));
  }
  ResultTable scratch;
  for (std::size_t mi = 0; mi < per_m.size(); ++mi) {
    const double value = cfg.m_antennas[mi];
    detail::append_ser_rows(
        scratch, cfg, per_m[mi], "m_antennas", [&](std::size_t) { return value; }, 1);
  }
  for (std::size_t si = 0; si < cfg.schemes.size(); ++si) {
    const auto label = cfg.schemes[si].label();
    for (const auto& metric : {"ser", "power_violation"}) {
      for (const auto& row : scratch.rows) {
        if (row.scheme == label && row.metric == metric) table.rows.push_back(row);
      }
    }
  }
  return table;
}

/// Single-instance report: the precoded word, noiseless receive points and
/// residuals of every scheme; optionally all 4^M noiseless points (K = 1).
inline nlohmann::json precode_once(ExperimentConfig cfg) {
  cfg.kind = ExperimentKind::PrecodeOnce;
  cfg.validate();
  const ChannelMatrix channel =
      cfg.channel ? ChannelMatrix(*cfg.channel) : detail::trial_channel(cfg, cfg.antennas(), cfg.trial);
  const double reference = detail::reference_range(cfg, channel);
  const auto cplx_json = [](cplx z) { return nlohmann::json::array({z.real(), z.imag()}); };
  const auto vec_json = [&](const CVector& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(cplx_json(v(i)));
    return a;
  };

  nlohmann::json report;
  report["config"] = detail::config_json(cfg);
  report["version"] = std::string(kArtifactVersion);
  nlohmann::json users = nlohmann::json::array();
  for (Eigen::Index k = 0; k < channel.k_users(); ++k) {
    const auto norms = channel_norms(channel.user_vector(k));
    users.push_back({{"l1", norms.l1}, {"l2", norms.l2}});
  }
  report["channel_norms"] = users;
  report["channel"] = nlohmann::json::array();
  for (Eigen::Index k = 0; k < channel.k_users(); ++k) report["channel"].push_back(vec_json(channel.matrix().row(k).transpose()));
  report["reference_range"] = reference;

  nlohmann::json schemes = nlohmann::json::array();
  for (const auto& scheme : cfg.schemes) {
    const QamConstellation qam(cfg.n_side, scheme.range_factor * reference);
    CVector s(cfg.k_users);
    for (Eigen::Index k = 0; k < s.size(); ++k) s(k) = qam[cfg.symbols[static_cast<std::size_t>(k)]];
    nlohmann::json entry{{"scheme", scheme.label()}, {"range", qam.range()}, {"symbols", vec_json(s)}};
    PrecodeOutcome out;
    switch (scheme.kind) {
      case SchemeKind::InfTotal: out = precode_inf_total(channel.user_vector(0), s(0), cfg.power); break;
      case SchemeKind::InfPerAntenna: out = precode_inf_per_antenna(channel.user_vector(0), s(0), cfg.power); break;
      case SchemeKind::ZfInfinite: {
        auto r = precode_zf(channel, s, cfg.power);
        entry["power"] = {{"norm_sq", r.power.norm_sq}, {"budget", r.power.budget}, {"violated", r.power.violated}};
        out = std::move(r.outcome);
        break;
      }
      case SchemeKind::QuantizedZf: out = precode_quantized_zf(channel, s, cfg.power); break;
      case SchemeKind::OneBit: out = precode_one_bit_multi(channel, s, cfg.power, scheme.m2); break;
      case SchemeKind::OracleExhaustive: out = oracle_exhaustive(channel, s, cfg.power, ResidualNorm::Inf); break;
    }
    if (const auto* bits = std::get_if<OneBitSignal>(&out.signal)) {
      entry["one_bit_word"] = bits->entries;
    }
    entry["transmit"] = vec_json(out.transmit());
    entry["noiseless_rx"] = vec_json(out.noiseless_rx);
    entry["residual_inf"] = out.residual_inf;
    entry["residual_l2"] = out.residual_l2;
    schemes.push_back(std::move(entry));
  }
  report["schemes"] = schemes;

  if (cfg.scatter) {
    // Points are h^H x (no sqrt(P/M) factor), the quantity the two reference
    // radii sqrt(2P)||h||_2 and sqrt(2/pi) sqrt(2P)||h||_2 bound.
    const CVector h = channel.user_vector(0);
    const double c_inf = range_inf_total(cfg.power, h, false);
    const double scale = std::sqrt(cfg.power / static_cast<double>(h.size()));
    nlohmann::json points = nlohmann::json::array();
    for (const auto& z : enumerate_noiseless_points(h, cfg.power)) points.push_back(cplx_json(z / scale));
    report["scatter"] = {{"points", points},
                         {"receive_scale", scale},
                         {"radius_inf_total", c_inf},
                         {"radius_one_bit", kOneBitRangeFactor * c_inf}};
  }
  return report;
}

}  // namespace onebit::sim
