#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "onebit/channel.hpp"
#include "onebit/error.hpp"
#include "onebit/precoding.hpp"
#include "onebit/range_design.hpp"

namespace onebit::sim {

enum class ExperimentKind { MseSweep, SerVsSnr, SerVsAntennas, PrecodeOnce };

enum class SchemeKind { InfTotal, InfPerAntenna, ZfInfinite, OneBit, QuantizedZf, OracleExhaustive };

/// A transmit scheme and the constellation range it runs at, as a multiple of
/// the reference range (sqrt(2P)||h||_2 single-user, sqrt(2PM/f) multi-user).
struct Scheme {
  SchemeKind kind = SchemeKind::OneBit;
  int m2 = kDefaultExhaustiveAntennas;
  double range_factor = 1.0;

  /// Canonical text form, e.g. "onebit:8@0.797885"; parse_scheme accepts it.
  std::string label() const;
  bool is_single_user_only() const noexcept {
    return kind == SchemeKind::InfTotal || kind == SchemeKind::InfPerAntenna;
  }
};

inline constexpr std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::MseSweep: return "mse-sweep";
    case ExperimentKind::SerVsSnr: return "ser-vs-snr";
    case ExperimentKind::SerVsAntennas: return "ser-vs-antennas";
    case ExperimentKind::PrecodeOnce: return "precode-once";
  }
  return "unknown";
}

inline constexpr std::string_view scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::InfTotal: return "inf-total";
    case SchemeKind::InfPerAntenna: return "inf-per-antenna";
    case SchemeKind::ZfInfinite: return "zf";
    case SchemeKind::OneBit: return "onebit";
    case SchemeKind::QuantizedZf: return "quantized-zf";
    case SchemeKind::OracleExhaustive: return "oracle";
  }
  return "unknown";
}

/// Range factor a scheme runs at when none is given.
inline double default_range_factor(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::OneBit:
    case SchemeKind::QuantizedZf:
    case SchemeKind::OracleExhaustive: return kOneBitRangeFactor;
    default: return 1.0;
  }
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] inline void bad_value(std::string_view key, std::string_view value) {
  throw Error(Errc::InvalidParameter, "bad value for '" + std::string(key) + "': '" + std::string(value) + "'");
}

inline double parse_double(std::string_view key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) bad_value(key, text);
  return v;
}

template <class Int>
Int parse_int(std::string_view key, std::string_view text) {
  text = trim(text);
  Int v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) bad_value(key, text);
  return v;
}

inline bool parse_bool(std::string_view key, std::string_view text) {
  text = trim(text);
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  bad_value(key, text);
}

template <class T, class F>
std::vector<T> parse_list(std::string_view key, std::string_view text, F&& one) {
  std::vector<T> out;
  for (auto item : split(text, ',')) {
    if (item.empty()) bad_value(key, text);
    out.push_back(one(key, item));
  }
  return out;
}

}  // namespace detail

inline std::string Scheme::label() const {
  std::string out(scheme_name(kind));
  if (kind == SchemeKind::OneBit) out += ":" + std::to_string(m2);
  std::ostringstream factor;
  factor.precision(6);
  factor << range_factor;
  return out + "@" + factor.str();
}

/// Parses "name[:m2][@factor]", e.g. "onebit:8@0.8", "zf", "inf-total@1".
inline Scheme parse_scheme(std::string_view text) {
  text = detail::trim(text);
  std::string_view factor_text;
  if (const auto at = text.find('@'); at != std::string_view::npos) {
    factor_text = text.substr(at + 1);
    text = text.substr(0, at);
  }
  std::string_view m2_text;
  if (const auto colon = text.find(':'); colon != std::string_view::npos) {
    m2_text = text.substr(colon + 1);
    text = text.substr(0, colon);
  }
  Scheme scheme;
  static constexpr SchemeKind kinds[] = {SchemeKind::InfTotal,   SchemeKind::InfPerAntenna, SchemeKind::ZfInfinite,
                                         SchemeKind::OneBit,     SchemeKind::QuantizedZf,   SchemeKind::OracleExhaustive};
  bool found = false;
  for (auto kind : kinds) {
    if (scheme_name(kind) == text) {
      scheme.kind = kind;
      found = true;
    }
  }
  if (!found) detail::bad_value("schemes", text);
  if (!m2_text.empty()) {
    if (scheme.kind != SchemeKind::OneBit) detail::bad_value("schemes", m2_text);
    scheme.m2 = detail::parse_int<int>("schemes", m2_text);
  }
  scheme.range_factor = factor_text.empty() ? default_range_factor(scheme.kind)
                                            : detail::parse_double("schemes", factor_text);
  if (!(scheme.range_factor > 0.0)) detail::bad_value("schemes", factor_text);
  return scheme;
}

/// Declarative description of one experiment run.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::SerVsSnr;
  int k_users = 1;
  std::vector<int> m_antennas{128};
  int n_side = 4;
  double power = 1.0;
  std::vector<double> snr_db{0.0};
  std::vector<double> lambdas{0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1};
  std::vector<Scheme> schemes{Scheme{SchemeKind::OneBit, kDefaultExhaustiveAntennas, kOneBitRangeFactor}};
  std::size_t trials = 1000;
  std::size_t symbols_per_channel = 200;
  std::uint64_t seed = 1;
  double kappa = kDefaultHeadroom;
  /// Single-user reference range sqrt(2PM) instead of sqrt(2P)||h||_2.
  bool hardened_range = false;

  // precode-once only
  std::vector<std::size_t> symbols{0};
  std::optional<CMatrix> channel;
  std::uint64_t trial = 0;
  bool scatter = false;

  int antennas() const { return m_antennas.front(); }

  void validate() const {
    using onebit::detail::require;
    require(k_users >= 1, Errc::InvalidParameter, "k_users must be >= 1");
    require(!m_antennas.empty(), Errc::InvalidParameter, "m_antennas must be non-empty");
    require(std::is_sorted(m_antennas.begin(), m_antennas.end()), Errc::InvalidParameter,
            "m_antennas must be sorted ascending");
    for (int m : m_antennas) require(m >= 1, Errc::InvalidParameter, "m_antennas entries must be >= 1");
    require(n_side >= 2 && n_side % 2 == 0, Errc::InvalidParameter, "n_side must be an even integer >= 2");
    require(power > 0.0, Errc::InvalidParameter, "power must be positive");
    require(!snr_db.empty() && std::is_sorted(snr_db.begin(), snr_db.end()), Errc::InvalidParameter,
            "snr_db must be a non-empty ascending list");
    require(!lambdas.empty() && std::is_sorted(lambdas.begin(), lambdas.end()), Errc::InvalidParameter,
            "lambda must be a non-empty ascending list");
    for (double l : lambdas) require(l > 0.0, Errc::InvalidParameter, "lambda entries must be positive");
    require(!schemes.empty(), Errc::InvalidParameter, "schemes must be non-empty");
    require(trials >= 1, Errc::InvalidParameter, "trials must be >= 1");
    require(symbols_per_channel >= 1, Errc::InvalidParameter, "symbols_per_channel must be >= 1");
    require(kappa >= 0.0, Errc::InvalidParameter, "kappa must be >= 0");
    const int max_m = m_antennas.back();
    for (const auto& s : schemes) {
      require(!(s.is_single_user_only() && k_users != 1), Errc::InvalidParameter,
              "inf-total and inf-per-antenna are single-user schemes");
      require(!(s.kind == SchemeKind::OracleExhaustive && max_m > kMaxOracleAntennas), Errc::ComplexityCap,
              "oracle scheme needs m_antennas <= 12");
      if (s.kind == SchemeKind::OneBit) {
        require(s.m2 >= 0, Errc::InvalidParameter, "M2 must be non-negative");
        require(s.m2 <= kMaxExhaustiveAntennas, Errc::ComplexityCap, "M2 exceeds the exhaustive-search cap");
        require(s.m2 <= m_antennas.front(), Errc::InvalidParameter, "M2 exceeds the antenna count");
      }
    }
    if (kind == ExperimentKind::PrecodeOnce) {
      require(symbols.size() == static_cast<std::size_t>(k_users), Errc::InvalidParameter,
              "precode-once needs one symbol index per user");
      const auto n2 = static_cast<std::size_t>(n_side) * static_cast<std::size_t>(n_side);
      for (auto i : symbols) require(i < n2, Errc::InvalidParameter, "symbol index out of range");
      if (channel) {
        require(channel->rows() == k_users && channel->cols() == antennas(), Errc::DimensionMismatch,
                "explicit channel must be k_users x m_antennas");
      }
      require(!(scatter && (k_users != 1 || antennas() > kMaxOracleAntennas)), Errc::ComplexityCap,
              "scatter mode needs a single user and m_antennas <= 12");
    }
  }
};

/// Keys accepted in a config file, in documentation order.
inline const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys = {
      "experiment", "k_users", "m_antennas", "n_side", "power",   "snr_db",  "lambda",  "schemes", "trials",
      "symbols_per_channel", "seed", "kappa", "hardened_range", "symbols", "channel", "trial", "scatter"};
  return keys;
}

/// Applies one `key = value` setting; unknown keys are rejected.
inline void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  using namespace detail;
  key = trim(key);
  value = trim(value);
  if (key == "experiment") {
    static constexpr ExperimentKind kinds[] = {ExperimentKind::MseSweep, ExperimentKind::SerVsSnr,
                                               ExperimentKind::SerVsAntennas, ExperimentKind::PrecodeOnce};
    for (auto k : kinds) {
      if (to_string(k) == value) {
        cfg.kind = k;
        return;
      }
    }
    bad_value(key, value);
  } else if (key == "k_users") {
    cfg.k_users = parse_int<int>(key, value);
  } else if (key == "m_antennas") {
    cfg.m_antennas = parse_list<int>(key, value, parse_int<int>);
  } else if (key == "n_side") {
    cfg.n_side = parse_int<int>(key, value);
  } else if (key == "power") {
    cfg.power = parse_double(key, value);
  } else if (key == "snr_db") {
    cfg.snr_db = parse_list<double>(key, value, parse_double);
  } else if (key == "lambda") {
    cfg.lambdas = parse_list<double>(key, value, parse_double);
  } else if (key == "schemes") {
    cfg.schemes = parse_list<Scheme>(key, value, [](std::string_view, std::string_view item) {
      return parse_scheme(item);
    });
  } else if (key == "trials") {
    cfg.trials = parse_int<std::size_t>(key, value);
  } else if (key == "symbols_per_channel") {
    cfg.symbols_per_channel = parse_int<std::size_t>(key, value);
  } else if (key == "seed") {
    cfg.seed = parse_int<std::uint64_t>(key, value);
  } else if (key == "kappa") {
    cfg.kappa = parse_double(key, value);
  } else if (key == "hardened_range") {
    cfg.hardened_range = parse_bool(key, value);
  } else if (key == "symbols") {
    cfg.symbols = parse_list<std::size_t>(key, value, parse_int<std::size_t>);
  } else if (key == "trial") {
    cfg.trial = parse_int<std::uint64_t>(key, value);
  } else if (key == "scatter") {
    cfg.scatter = parse_bool(key, value);
  } else if (key == "channel") {
    // Row-major K x M entries, each "re:im", separated by commas; rows are
    // separated by ';'.
    std::vector<std::vector<cplx>> rows;
    for (auto row : split(value, ';')) {
      rows.emplace_back();
      for (auto entry : split(row, ',')) {
        const auto parts = split(entry, ':');
        if (parts.size() != 2) bad_value(key, entry);
        rows.back().emplace_back(parse_double(key, parts[0]), parse_double(key, parts[1]));
      }
    }
    const auto k = static_cast<Eigen::Index>(rows.size());
    const auto m = static_cast<Eigen::Index>(rows.front().size());
    CMatrix h(k, m);
    for (Eigen::Index r = 0; r < k; ++r) {
      if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != m) bad_value(key, value);
      for (Eigen::Index c = 0; c < m; ++c) h(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
    }
    cfg.channel = std::move(h);
  } else {
    throw Error(Errc::InvalidParameter, "unknown config key '" + std::string(key) + "'");
  }
}

/// Parses flat `key = value` text. Blank lines and `#` comments are ignored.
inline ExperimentConfig parse_config(std::string_view text, ExperimentConfig cfg = {}) {
  std::size_t line_no = 0;
  for (auto line : detail::split(text, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(Errc::InvalidParameter, "line " + std::to_string(line_no) + ": expected key = value");
    }
    apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig cfg = {}) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), std::move(cfg));
}

}  // namespace onebit::sim
