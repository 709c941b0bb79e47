// Command-line front end for the simulation harness.
//
//   onebit <subcommand> [--config file] [--set key=value]... [--seed n]
//          [--out path] [--format csv|json] [--threads n]
//
// Errors print one line "error: <code>: <message>" to stderr; exit status is 2
// for command-line usage errors and 1 otherwise.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "onebit/onebit.hpp"

namespace {

using onebit::sim::ExperimentConfig;
using onebit::sim::ExperimentKind;

struct Options {
  std::string config_path;
  std::vector<std::string> settings;
  std::optional<std::uint64_t> seed;
  std::string out = "-";
  std::string format = "csv";
  unsigned threads = 1;
};

ExperimentConfig build_config(const Options& opts, ExperimentKind kind) {
  ExperimentConfig cfg;
  cfg.kind = kind;
  if (!opts.config_path.empty()) cfg = onebit::sim::load_config(opts.config_path, cfg);
  for (const auto& s : opts.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw onebit::Error(onebit::Errc::InvalidParameter, "--set expects key=value, got '" + s + "'");
    }
    onebit::sim::apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
  if (opts.seed) cfg.seed = *opts.seed;
  // The subcommand decides the experiment regardless of the file.
  cfg.kind = kind;
  return cfg;
}

onebit::sim::TableFormat table_format(const std::string& name) {
  return name == "json" ? onebit::sim::TableFormat::Json : onebit::sim::TableFormat::Csv;
}

std::string precode_once_csv(const nlohmann::json& report) {
  std::string out = "kind,scheme,index,re,im\n";
  const auto add = [&](const std::string& kind, const std::string& scheme, const nlohmann::json& points) {
    std::size_t i = 0;
    for (const auto& z : points) {
      out += kind + ',' + scheme + ',' + std::to_string(i++) + ',' +
             onebit::sim::detail::format_double(z[0].get<double>()) + ',' +
             onebit::sim::detail::format_double(z[1].get<double>()) + '\n';
    }
  };
  for (const auto& s : report["schemes"]) {
    const auto label = s["scheme"].get<std::string>();
    add("symbol", label, s["symbols"]);
    add("transmit", label, s["transmit"]);
    add("noiseless_rx", label, s["noiseless_rx"]);
  }
  if (report.contains("scatter")) add("scatter", "all", report["scatter"]["points"]);
  return out;
}

int run(const Options& opts, ExperimentKind kind) {
  const ExperimentConfig cfg = build_config(opts, kind);
  const onebit::sim::RunOptions run_opts{opts.threads};
  const auto format = table_format(opts.format);
  switch (kind) {
    case ExperimentKind::MseSweep:
      onebit::sim::emit_table(onebit::sim::run_mse_sweep(cfg, run_opts), format, opts.out);
      break;
    case ExperimentKind::SerVsSnr:
      onebit::sim::emit_table(onebit::sim::run_ser_vs_snr(cfg, run_opts), format, opts.out);
      break;
    case ExperimentKind::SerVsAntennas:
      onebit::sim::emit_table(onebit::sim::run_ser_vs_antennas(cfg, run_opts), format, opts.out);
      break;
    case ExperimentKind::PrecodeOnce: {
      const auto report = onebit::sim::precode_once(cfg);
      onebit::sim::write_text(format == onebit::sim::TableFormat::Json ? report.dump(2) + "\n"
                                                                       : precode_once_csv(report),
                              opts.out);
      break;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-bit symbol-level precoding and QAM range design experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  Options opts;
  app.add_option("--config", opts.config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--set", opts.settings, "override one config key (key=value); repeatable");
  app.add_option("--seed", opts.seed, "master seed (overrides the config)");
  app.add_option("--out", opts.out, "output path, '-' for stdout");
  app.add_option("--format", opts.format, "output format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", opts.threads, "worker threads")->check(CLI::Range(1u, 1024u));

  const std::pair<const char*, ExperimentKind> commands[] = {
      {"mse-sweep", ExperimentKind::MseSweep},
      {"ser-vs-snr", ExperimentKind::SerVsSnr},
      {"ser-vs-antennas", ExperimentKind::SerVsAntennas},
      {"precode-once", ExperimentKind::PrecodeOnce},
  };
  std::optional<ExperimentKind> chosen;
  for (const auto& [name, kind] : commands) {
    auto* sub = app.add_subcommand(name, std::string(onebit::sim::to_string(kind)) + " experiment");
    sub->callback([&chosen, k = kind] { chosen = k; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << "\n";
    return 2;
  }

  try {
    return run(opts, *chosen);
  } catch (const onebit::Error& e) {
    std::cerr << "error: " << onebit::to_string(e.code()) << ": " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
  }
  return 1;
}
