#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "onebit/error.hpp"

namespace onebit::sim {

inline constexpr std::string_view kArtifactVersion = "1.0.0";

/// One aggregated measurement: `metric` of `scheme` at sweep point
/// `variable = value`, averaged over `trials` independent channel draws.
struct ResultRow {
  std::string variable;
  double value = 0.0;
  std::string scheme;
  std::string metric;
  double mean = 0.0;
  double std_error = 0.0;  // sample std of per-trial values / sqrt(trials)
  std::uint64_t trials = 0;
  double analytic = std::numeric_limits<double>::quiet_NaN();  // closed-form overlay, NaN if none

  bool operator==(const ResultRow&) const = default;
};

struct ResultTable {
  static constexpr std::array<std::string_view, 8> kColumns = {"variable", "value",     "scheme", "metric",
                                                               "mean",     "std_error", "trials", "analytic"};
  std::vector<ResultRow> rows;
  nlohmann::json metadata = nlohmann::json::object();
};

enum class TableFormat { Csv, Json };

namespace detail {

/// 17 significant digits in scientific notation; parses back bit-exactly.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::scientific, 16);
  return std::string(buf.data(), res.ptr);
}

inline double parse_number(std::string_view text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(Errc::InvalidInput, "bad number in table: '" + std::string(text) + "'");
  }
  return v;
}

inline bool needs_quotes(std::string_view s) { return s.find_first_of(",\"\n") != std::string_view::npos; }

inline std::string csv_field(std::string_view s) {
  if (!needs_quotes(s)) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else {
      out.back() += c;
    }
  }
  return out;
}

}  // namespace detail

inline std::string to_csv(const ResultTable& table) {
  std::string out;
  for (std::size_t i = 0; i < ResultTable::kColumns.size(); ++i) {
    if (i) out += ',';
    out += ResultTable::kColumns[i];
  }
  out += '\n';
  for (const auto& r : table.rows) {
    out += detail::csv_field(r.variable) + ',' + detail::format_double(r.value) + ',' + detail::csv_field(r.scheme) +
           ',' + detail::csv_field(r.metric) + ',' + detail::format_double(r.mean) + ',' +
           detail::format_double(r.std_error) + ',' + std::to_string(r.trials) + ',' +
           detail::format_double(r.analytic) + '\n';
  }
  return out;
}

/// Inverse of to_csv (rows only; CSV carries no metadata).
inline ResultTable parse_csv(std::string_view text) {
  ResultTable table;
  std::size_t start = 0;
  bool header = true;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != ResultTable::kColumns.size()) {
      throw Error(Errc::InvalidInput, "table row has the wrong number of columns");
    }
    if (header) {
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] != ResultTable::kColumns[i]) throw Error(Errc::InvalidInput, "unexpected table header");
      }
      header = false;
      continue;
    }
    ResultRow r;
    r.variable = fields[0];
    r.value = detail::parse_number(fields[1]);
    r.scheme = fields[2];
    r.metric = fields[3];
    r.mean = detail::parse_number(fields[4]);
    r.std_error = detail::parse_number(fields[5]);
    r.trials = static_cast<std::uint64_t>(std::stoull(fields[6]));
    r.analytic = detail::parse_number(fields[7]);
    table.rows.push_back(std::move(r));
  }
  return table;
}

inline nlohmann::json to_json(const ResultTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  const auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  for (const auto& r : table.rows) {
    rows.push_back({{"variable", r.variable},
                    {"value", r.value},
                    {"scheme", r.scheme},
                    {"metric", r.metric},
                    {"mean", num(r.mean)},
                    {"std_error", num(r.std_error)},
                    {"trials", r.trials},
                    {"analytic", num(r.analytic)}});
  }
  nlohmann::json columns = nlohmann::json::array();
  for (auto c : ResultTable::kColumns) columns.push_back(std::string(c));
  return {{"columns", columns}, {"rows", rows}, {"metadata", table.metadata}};
}

inline std::string render(const ResultTable& table, TableFormat format) {
  if (format == TableFormat::Csv) return to_csv(table);
  return to_json(table).dump(2) + "\n";
}

/// Writes `text` to `path`; "-" writes to stdout.
inline void write_text(std::string_view text, const std::filesystem::path& path) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

/// Writes the table to `path`; "-" writes to stdout.
inline void emit_table(const ResultTable& table, TableFormat format, const std::filesystem::path& path) {
  write_text(render(table, format), path);
}

}  // namespace onebit::sim
