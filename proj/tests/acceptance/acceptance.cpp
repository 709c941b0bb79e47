// Acceptance suite. Usage: acceptance [criterion...]; with no arguments every
// criterion runs. Prints one PASS/FAIL line per criterion and exits nonzero if
// any failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "onebit/onebit.hpp"

namespace {

using namespace onebit;
using namespace onebit::sim;

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

unsigned worker_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

CVector qam_symbols(const QamConstellation& q, int k, Rng& rng) {
  CVector s(k);
  for (int i = 0; i < k; ++i) s(i) = q[rng.uniform_index(q.size())];
  return s;
}

std::vector<double> grid(double from, double to, double step) {
  std::vector<double> out;
  for (double v = from; v <= to + 1e-9; v += step) out.push_back(v);
  return out;
}

// Population moments of |s|^2 by enumeration versus the closed forms.
Verdict moment_oracle() {
  Rng rng({101, StreamPurpose::Test, 0, 0});
  double worst = 0.0;
  for (int n : {2, 4, 8, 16}) {
    for (int rep = 0; rep < 25; ++rep) {
      const double c = 0.01 + 100.0 * rng.uniform();
      const QamConstellation q(n, c);
      double mean = 0.0;
      for (const auto& s : q.points()) mean += std::norm(s);
      mean /= static_cast<double>(q.size());
      double var = 0.0;
      for (const auto& s : q.points()) var += (std::norm(s) - mean) * (std::norm(s) - mean);
      var /= static_cast<double>(q.size());
      const auto closed = symbol_power_moments(n, c);
      worst = std::max(worst, std::abs(closed.mean - mean) / mean);
      // N = 2 has zero variance; measure it against the mean squared.
      worst = std::max(worst, std::abs(closed.variance - var) / (n == 2 ? mean * mean : var));
    }
  }
  return {worst <= 1e-12, fmt("max relative error %.3e over N in {2,4,8,16}, 25 ranges each", worst)};
}

Verdict zf_exactness() {
  const int k = 4;
  const int m = 64;
  const QamConstellation q(4, range_zf_multi(1.0, m, k, 4));
  Rng rng({202, StreamPurpose::Test, 0, 0});
  double worst = 0.0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto ch = generate_channel(k, m, {202, StreamPurpose::Channel, t, 0});
    const CVector s = qam_symbols(q, k, rng);
    const auto r = precode_zf(ch, s, 1.0);
    const CVector rx = noiseless_receive(ch, r.outcome.transmit(), 1.0);
    worst = std::max(worst, (rx - s).cwiseAbs().maxCoeff() / s.cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-10, fmt("max ||sqrt(P/M) H x - s||_inf / ||s||_inf = %.3e over 100 instances", worst)};
}

Verdict oracle_dominance() {
  std::size_t violations = 0;
  std::size_t mismatches = 0;
  std::size_t checks = 0;
  Rng rng({303, StreamPurpose::Test, 0, 0});
  const double p = 4.0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto ch = generate_channel(1, 8, {303, StreamPurpose::Channel, t, 0});
    const CVector h = ch.user_vector(0);
    const QamConstellation q(4, range_one_bit_single(p, h, false));
    const CVector s = qam_symbols(q, 1, rng);
    const auto oracle = oracle_exhaustive(ch, s, p, ResidualNorm::Inf);
    for (int m2 = 0; m2 < 8; ++m2) {
      violations += precode_one_bit_single(h, s(0), p, m2).residual_inf < oracle.residual_inf ? 1 : 0;
      ++checks;
    }
    mismatches += precode_one_bit_single(h, s(0), p, 8).residual_inf != oracle.residual_inf ? 1 : 0;
  }
  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto ch = generate_channel(2, 6, {304, StreamPurpose::Channel, t, 0});
    const QamConstellation q(4, range_one_bit_multi(p, 6, 2, 4));
    const CVector s = qam_symbols(q, 2, rng);
    const auto oracle = oracle_exhaustive(ch, s, p, ResidualNorm::Inf);
    for (int m2 = 0; m2 < 6; ++m2) {
      violations += precode_one_bit_multi(ch, s, p, m2).residual_inf < oracle.residual_inf ? 1 : 0;
      ++checks;
    }
    mismatches += precode_one_bit_multi(ch, s, p, 6).residual_inf != oracle.residual_inf ? 1 : 0;
  }
  return {violations == 0 && mismatches == 0,
          fmt("%zu of %zu greedy runs beat the oracle, %zu of 200 full-search runs differ from it", violations,
              checks, mismatches)};
}

Verdict phase_transition() {
  ExperimentConfig cfg;
  cfg.m_antennas = {128};
  cfg.power = 1.0;
  cfg.n_side = 4;
  cfg.lambdas = {0.5, 0.6, 0.7, 0.75, 0.8, 0.85, 0.9, 1.0};
  cfg.schemes = {parse_scheme("onebit:8")};
  cfg.trials = 200;
  cfg.symbols_per_channel = 50;
  cfg.seed = 404;
  const auto s = extract_series(run_mse_sweep(cfg, {worker_threads()}), cfg.schemes[0].label(), "mse");
  const auto at = [&](double lambda) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (std::abs(s.x[i] - lambda) < 1e-9) return s.mean[i];
    }
    return std::nan("");
  };
  double plateau = 0.0;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (s.x[i] <= 0.7 + 1e-9) plateau = std::max(plateau, s.mean[i]);
  }
  const double ratio = at(0.75) / at(0.9);
  return {ratio <= 1e-2 && plateau <= 1e-3 * cfg.power,
          fmt("MSE(0.75)/MSE(0.9) = %.3e, max MSE(lambda<=0.7) = %.3e, MSE(0.8) = %.3e, MSE(1.0) = %.3e", ratio,
              plateau, at(0.8), at(1.0))};
}

ExperimentConfig single_user_snr_config() {
  ExperimentConfig cfg;
  cfg.m_antennas = {128};
  cfg.n_side = 4;
  cfg.snr_db = grid(-10.0, 4.0, 1.0);
  cfg.trials = 1000;
  cfg.symbols_per_channel = 200;
  return cfg;
}

Verdict power_gap() {
  auto cfg = single_user_snr_config();
  cfg.schemes = {parse_scheme("inf-total"), parse_scheme("onebit:8")};
  cfg.seed = 505;
  const auto table = run_ser_vs_snr(cfg, {worker_threads()});
  const auto inf = extract_series(table, cfg.schemes[0].label(), "ser");
  const auto one = extract_series(table, cfg.schemes[1].label(), "ser");
  const auto x_inf = crossing(inf.x, inf.mean, 1e-2);
  const auto x_one = crossing(one.x, one.mean, 1e-2);
  if (!x_inf || !x_one) return {false, "a curve never reaches SER 1e-2 on the grid"};
  const double gap = *x_one - *x_inf;
  double worst = 0.0;
  std::size_t points = 0;
  for (const auto* s : {&inf, &one}) {
    for (std::size_t i = 0; i < s->x.size(); ++i) {
      if (s->mean[i] < 1e-3) continue;
      worst = std::max(worst, std::abs(s->mean[i] - s->analytic[i]) / s->analytic[i]);
      ++points;
    }
  }
  return {std::abs(gap - 2.0) <= 0.5 && worst <= 0.3,
          fmt("gap at SER 1e-2 = %.3f dB (inf %.3f dB, one-bit %.3f dB); analytic agreement max |rel| %.3f over "
              "%zu points; %zu symbols per point",
              gap, *x_inf, *x_one, worst, points, cfg.trials * cfg.symbols_per_channel)};
}

Verdict error_floor() {
  auto cfg = single_user_snr_config();
  cfg.schemes = {parse_scheme("inf-total"), parse_scheme("onebit:8"), parse_scheme("onebit:8@1")};
  cfg.seed = 606;
  const auto table = run_ser_vs_snr(cfg, {worker_threads()});
  const auto inf = extract_series(table, cfg.schemes[0].label(), "ser");
  const auto good = extract_series(table, cfg.schemes[1].label(), "ser");
  const auto big = extract_series(table, cfg.schemes[2].label(), "ser");
  const std::size_t last = inf.x.size() - 1;
  const double analytic_zf = inf.analytic[last];
  const bool floor = big.mean[last] > 0.0 && big.mean[last] >= 10.0 * good.mean[last];
  return {analytic_zf <= 1e-5 && floor,
          fmt("at %.1f dB: SER(range 1.0) = %.3e, SER(range 0.798) = %.3e, analytic ZF SER = %.3e", inf.x[last],
              big.mean[last], good.mean[last], analytic_zf)};
}

Verdict antenna_factor_check() {
  ExperimentConfig cfg;
  cfg.m_antennas.clear();
  for (int m = 32; m <= 512; m += 32) cfg.m_antennas.push_back(m);
  cfg.n_side = 4;
  cfg.snr_db = {-4.0};
  cfg.schemes = {parse_scheme("inf-total"), parse_scheme("onebit:8")};
  cfg.trials = 500;
  cfg.symbols_per_channel = 200;
  cfg.seed = 707;
  const auto table = run_ser_vs_antennas(cfg, {worker_threads()});
  const auto inf = extract_series(table, cfg.schemes[0].label(), "ser");
  const auto one = extract_series(table, cfg.schemes[1].label(), "ser");
  const auto m_inf = crossing(inf.x, inf.mean, 1e-3);
  const auto m_one = crossing(one.x, one.mean, 1e-3);
  if (!m_inf || !m_one) return {false, "a curve never reaches SER 1e-3 on the M grid"};
  const double ratio = *m_one / *m_inf;
  return {std::abs(ratio - antenna_factor()) <= 0.15,
          fmt("M at SER 1e-3: inf %.1f, one-bit %.1f, ratio %.3f (target 1.571 +/- 0.15); %zu symbols per point",
              *m_inf, *m_one, ratio, cfg.trials * cfg.symbols_per_channel)};
}

Verdict multi_user_gap() {
  ExperimentConfig cfg;
  cfg.k_users = 4;
  cfg.m_antennas = {128};
  cfg.n_side = 4;
  cfg.snr_db = grid(-2.0, 8.0, 1.0);
  cfg.schemes = {parse_scheme("zf"), parse_scheme("onebit:8")};
  cfg.trials = 500;
  cfg.symbols_per_channel = 200;
  cfg.seed = 808;
  const auto table = run_ser_vs_snr(cfg, {worker_threads()});
  const auto zf = extract_series(table, cfg.schemes[0].label(), "ser");
  const auto one = extract_series(table, cfg.schemes[1].label(), "ser");
  const auto violation = extract_series(table, cfg.schemes[0].label(), "power_violation");
  const auto x_zf = crossing(zf.x, zf.mean, 1e-2);
  const auto x_one = crossing(one.x, one.mean, 1e-2);
  if (!x_zf || !x_one) return {false, "a curve never reaches SER 1e-2 on the grid"};
  const double gap = *x_one - *x_zf;
  const double rate = violation.mean.front();
  return {std::abs(gap - 2.0) <= 0.5 && rate <= 0.10,
          fmt("gap at SER 1e-2 = %.3f dB (zf %.3f dB, one-bit %.3f dB); ZF power-violation rate %.4f "
              "(two-sigma CLT design %.4f)",
              gap, *x_zf, *x_one, rate, violation.analytic.front())};
}

Verdict hardening() {
  const int m = 1024;
  double l2 = 0.0;
  double l1 = 0.0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto norms = channel_norms(generate_channel(1, m, {909, StreamPurpose::Channel, t, 0}).user_vector(0));
    l2 += norms.l2 * norms.l2 / m / 100.0;
    l1 += norms.l1 / m / 100.0;
  }
  const double target = std::sqrt(std::numbers::pi / 4.0);
  return {std::abs(l2 - 1.0) <= 0.01 && std::abs(l1 - target) <= 0.01,
          fmt("mean ||h||_2^2/M = %.5f, mean ||h||_1/M = %.5f (sqrt(pi/4) = %.5f)", l2, l1, target)};
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Verdict determinism() {
  ExperimentConfig ser;
  ser.k_users = 3;
  ser.m_antennas = {32};
  ser.snr_db = {-2.0, 2.0, 6.0};
  ser.schemes = {parse_scheme("zf"), parse_scheme("onebit:6"), parse_scheme("quantized-zf")};
  ser.trials = 40;
  ser.symbols_per_channel = 50;
  ser.seed = 1010;
  ExperimentConfig mse;
  mse.m_antennas = {64};
  mse.lambdas = {0.6, 0.8, 1.0};
  mse.schemes = {parse_scheme("onebit:4"), parse_scheme("inf-per-antenna")};
  mse.trials = 30;
  mse.symbols_per_channel = 20;
  mse.seed = 1011;
  ExperimentConfig ant = ser;
  ant.m_antennas = {8, 16, 24};
  ant.snr_db = {0.0};

  bool same = true;
  std::string digests;
  const std::vector<std::pair<std::string, std::function<ResultTable(unsigned)>>> runs = {
      {"ser-vs-snr", [&](unsigned n) { return run_ser_vs_snr(ser, {n}); }},
      {"mse-sweep", [&](unsigned n) { return run_mse_sweep(mse, {n}); }},
      {"ser-vs-antennas", [&](unsigned n) { return run_ser_vs_antennas(ant, {n}); }},
  };
  for (const auto& [name, run] : runs) {
    const std::string one = to_csv(run(1));
    const std::string eight = to_csv(run(8));
    same = same && one == eight;
    digests += fmt("%s %016llx/%016llx ", name.c_str(), static_cast<unsigned long long>(fnv1a(one)),
                   static_cast<unsigned long long>(fnv1a(eight)));
  }
  return {same, "1 vs 8 threads: " + digests};
}

struct Criterion {
  const char* name;
  double budget_seconds;
  Verdict (*run)();
};

const Criterion kCriteria[] = {
    {"moment oracle", 1.0, moment_oracle},
    {"ZF exactness", 5.0, zf_exactness},
    {"oracle dominance", 120.0, oracle_dominance},
    {"MSE phase transition", 600.0, phase_transition},
    {"2 dB power gap", 1200.0, power_gap},
    {"error floor", 1200.0, error_floor},
    {"antenna factor", 1800.0, antenna_factor_check},
    {"multi-user gap", 1200.0, multi_user_gap},
    {"channel hardening", 60.0, hardening},
    {"thread-count determinism", 300.0, determinism},
};

bool run_criterion(int index) {
  const auto& c = kCriteria[index - 1];
  const auto start = std::chrono::steady_clock::now();
  Verdict v{false, ""};
  try {
    v = c.run();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool in_time = seconds <= c.budget_seconds;
  const bool pass = v.pass && in_time;
  std::printf("criterion %d [%s]: %s  %s; %.2f s (budget %.0f s)\n", index, c.name, pass ? "PASS" : "FAIL",
              v.detail.c_str(), seconds, c.budget_seconds);
  std::fflush(stdout);
  return pass;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    const int n = std::atoi(argv[i]);
    if (n < 1 || n > 10) {
      std::fprintf(stderr, "error: invalid-parameter: criterion must be 1..10, got '%s'\n", argv[i]);
      return 2;
    }
    selected.push_back(n);
  }
  if (selected.empty()) {
    for (int i = 1; i <= 10; ++i) selected.push_back(i);
  }
  bool all = true;
  for (int n : selected) all = run_criterion(n) && all;
  return all ? 0 : 1;
}
