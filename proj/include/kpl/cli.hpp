#pragma once

// Command-line front end: laws, verify, simulate, report.
// Exit codes: 0 success, 1 verification failure, 2 usage or config error,
// 3 the q ≠ 0 guard tripped during a simulation.

#include "kpl/report.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace kpl::cli {

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kUsage = 2, kQNearZero = 3 };

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Simulation settings. JSON fields: name, modes (count or [[xi2, weight], ...]),
/// a, b, seed, k_max, invariants, dt, horizon, decay_order, dt_halvings,
/// precision ("double" or "quad"), out_dir.
struct SimConfig {
  std::string name = "run";
  std::vector<sim::Mode> modes;
  double a = 1.0;
  double b = 1.0;
  std::uint64_t seed = 1;
  int k_max = 5;
  std::vector<int> invariants;  // empty: 2..k_max
  double dt = 1e-3;
  double horizon = 1.0;
  int decay_order = 6;
  int dt_halvings = 0;
  Precision precision = Precision::Double;
  std::string out_dir;

  std::string run_key() const { return name + "_seed" + std::to_string(seed); }

  std::vector<int> invariant_orders() const {
    if (!invariants.empty()) return invariants;
    std::vector<int> out;
    for (int k = 2; k <= k_max; ++k) out.push_back(k);
    return out;
  }

  void validate() const {
    if (modes.empty()) throw ConfigError("modes: at least one mode is required");
    if (k_max < 2) throw ConfigError("k_max must be ≥ 2");
    for (int k : invariants)
      if (k < 2) throw ConfigError("invariants: orders must be ≥ 2");
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(horizon > 0.0)) throw ConfigError("horizon must be positive");
    if (dt_halvings < 0) throw ConfigError("dt_halvings must be ≥ 0");
    if (decay_order < 0) throw ConfigError("decay_order must be ≥ 0");
    try {
      sim::ModeSystem(modes, a, b);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
};

inline SimConfig parse_config(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {"name",  "modes", "a",           "b",           "seed",      "k_max",  "invariants",
                                              "dt",    "horizon", "decay_order", "dt_halvings", "precision", "out_dir"};
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw ConfigError("unknown config field '" + key + "'");
  SimConfig c;
  try {
    if (j.contains("name")) c.name = j.at("name").get<std::string>();
    const json& modes = j.contains("modes") ? j.at("modes") : json(8);
    if (modes.is_number_integer()) {
      const auto n = modes.get<long>();
      if (n < 1) throw ConfigError("modes: count must be ≥ 1");
      for (long i = 1; i <= n; ++i) c.modes.push_back({static_cast<double>(i * i), 1.0});
    } else if (modes.is_array()) {
      for (const auto& m : modes) {
        if (!m.is_array() || m.size() != 2) throw ConfigError("modes: each entry must be [xi2, weight]");
        c.modes.push_back({m[0].get<double>(), m[1].get<double>()});
      }
    } else {
      throw ConfigError("modes must be a count or a list of [xi2, weight]");
    }
    if (j.contains("a")) c.a = j.at("a").get<double>();
    if (j.contains("b")) c.b = j.at("b").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("k_max")) c.k_max = j.at("k_max").get<int>();
    if (j.contains("invariants")) c.invariants = j.at("invariants").get<std::vector<int>>();
    if (j.contains("dt")) c.dt = j.at("dt").get<double>();
    if (j.contains("horizon")) c.horizon = j.at("horizon").get<double>();
    if (j.contains("decay_order")) c.decay_order = j.at("decay_order").get<int>();
    if (j.contains("dt_halvings")) c.dt_halvings = j.at("dt_halvings").get<int>();
    if (j.contains("precision")) c.precision = parse_precision(j.at("precision").get<std::string>());
    if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return c;
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

/// Output directory: explicit flag, then $KPL_OUT_DIR, then the config value, then ".".
inline std::filesystem::path output_dir(const std::string& flag, const std::string& configured) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("KPL_OUT_DIR"); env != nullptr && *env != '\0') return env;
  if (!configured.empty()) return configured;
  return ".";
}

inline int cmd_laws(int k, const std::string& out_path, std::ostream& out) {
  LawCache cache;
  const InvariantDescriptor inv = gen_invariant(k, cache);
  json doc = {{"invariant", descriptor_to_json(inv)}};
  if (k >= 3) doc["law_set"] = law_set_to_json(gen_law_set(k, cache));
  out << "I_" << k << " = " << render_law(inv) << '\n';
  out << doc.dump(2) << '\n';
  if (!out_path.empty()) write_atomic(out_path, doc.dump(2) + "\n");
  return kOk;
}

inline int cmd_verify(int k_max, const std::vector<std::string>& descriptors, const std::string& out_path,
                      std::ostream& out) {
  bool all = true;
  json certs = json::array();
  auto line = [&](bool ok, const std::string& what) {
    out << (ok ? "PASS " : "FAIL ") << what << '\n';
    all = all && ok;
  };
  LawCache cache;
  Lowerer lowerer;
  for (int k = 2; k <= k_max; ++k) {
    if (k >= 3)
      for (const auto& c : check_law_set(gen_law_set(k, cache))) line(c.passed, "k=" + std::to_string(k) + " " + c.name);
    const auto cert = certify_invariant(gen_invariant(k, cache), lowerer);
    line(cert.verified, "k=" + std::to_string(k) + " conservation of I_" + std::to_string(k) + " (" +
                            std::to_string(cert.term_count_before_cancellation) + " terms before cancellation)");
    certs.push_back(certificate_to_json(cert));
  }
  for (const auto& path : descriptors) {
    const InvariantDescriptor inv = descriptor_from_json(read_json_file(path));
    const auto cert = certify_invariant(inv, lowerer);
    line(cert.verified, "descriptor " + path + " conservation");
    json c = certificate_to_json(cert);
    c["descriptor"] = path;
    certs.push_back(std::move(c));
  }
  if (!out_path.empty()) write_atomic(out_path, certs.dump(2) + "\n");
  out << (all ? "all checks passed" : "verification failed") << '\n';
  return all ? kOk : kVerifyFailed;
}

inline int cmd_simulate(const SimConfig& cfg, const std::filesystem::path& dir, std::ostream& out) {
  cfg.validate();
  const sim::ModeSystem sys(cfg.modes, cfg.a, cfg.b);
  const sim::ModeState init = sim::random_initial_state(sys, cfg.seed, cfg.decay_order);
  std::vector<sim::NamedInvariant> invs;
  LawCache cache;
  for (int k : cfg.invariant_orders()) invs.push_back({"I_" + std::to_string(k), gen_invariant(k, cache)});

  const std::string key = cfg.run_key();
  const auto study = sim::convergence_study(sys, init, cfg.horizon, cfg.dt, cfg.dt_halvings, invs, cfg.precision);
  for (std::size_t h = 0; h < study.runs.size(); ++h) {
    const std::string stem = h == 0 ? key : key + "_h" + std::to_string(h);
    write_atomic(dir / (stem + ".csv"), csv_text(study.runs[h]));
  }
  const RunSummary summary = cfg.dt_halvings > 0 ? summarize(key, study) : summarize(key, study.runs.front());
  const json doc = summary_to_json(summary);
  write_atomic(dir / (key + ".summary.json"), doc.dump(2) + "\n");
  out << doc.dump(2) << '\n';
  return summary.valid ? kOk : kQNearZero;
}

inline int cmd_report(const std::vector<std::string>& paths, std::ostream& out) {
  if (paths.empty()) throw ConfigError("report: no input files");
  std::vector<CsvSeries> series;
  for (const auto& p : paths) series.push_back(read_csv(p));
  out << format_aggregate(aggregate(series));
  return kOk;
}

/// Parses arguments and dispatches. Never throws; failures map to exit codes.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conserved functionals of the Kirchhoff–Pokhozhaev equation: generation, verification, simulation"};
  app.require_subcommand(1);

  int law_k = 0;
  std::string law_out;
  auto* laws = app.add_subcommand("laws", "Print the order-k invariant and its coefficient set");
  laws->add_option("--k", law_k, "Order k ≥ 2")->required();
  laws->add_option("--out", law_out, "Also write the JSON to this file");

  int k_max = 0;
  std::vector<std::string> descriptors;
  std::string verify_out;
  auto* verify = app.add_subcommand("verify", "Check exact conservation for k = 2..k_max");
  verify->add_option("--k-max", k_max, "Largest order k ≥ 2")->required();
  verify->add_option("--descriptor", descriptors, "Extra descriptor JSON files to certify");
  verify->add_option("--out", verify_out, "Write certificates as JSON");

  std::string config_path, out_dir, precision;
  std::optional<std::uint64_t> seed;
  std::optional<double> dt, horizon;
  std::optional<int> halvings;
  auto* simulate = app.add_subcommand("simulate", "Integrate the mode system and record invariant drift");
  simulate->add_option("--config", config_path, "JSON config file")->required();
  simulate->add_option("--seed", seed, "Override the seed");
  simulate->add_option("--dt", dt, "Override the step");
  simulate->add_option("--horizon", horizon, "Override the horizon");
  simulate->add_option("--dt-halvings", halvings, "Override the number of dt halvings");
  simulate->add_option("--precision", precision, "double or quad");
  simulate->add_option("--out-dir", out_dir, "Output directory (default: $KPL_OUT_DIR, config, .)");

  std::vector<std::string> csvs;
  auto* report = app.add_subcommand("report", "Aggregate drifts and convergence orders from CSV runs");
  report->add_option("paths", csvs, "CSV files written by simulate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (laws->parsed()) {
      if (law_k < 2) throw ConfigError("laws: --k must be ≥ 2");
      return cmd_laws(law_k, law_out, out);
    }
    if (verify->parsed()) {
      if (k_max < 2) throw ConfigError("verify: --k-max must be ≥ 2");
      return cmd_verify(k_max, descriptors, verify_out, out);
    }
    if (simulate->parsed()) {
      SimConfig cfg = parse_config(read_json_file(config_path));
      if (seed) cfg.seed = *seed;
      if (dt) cfg.dt = *dt;
      if (horizon) cfg.horizon = *horizon;
      if (halvings) cfg.dt_halvings = *halvings;
      if (!precision.empty()) cfg.precision = parse_precision(precision);
      return cmd_simulate(cfg, output_dir(out_dir, cfg.out_dir), out);
    }
    return cmd_report(csvs, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const FormatError& e) {
    err << "parse error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace kpl::cli
