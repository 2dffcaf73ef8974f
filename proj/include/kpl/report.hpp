#pragma once

// Run artifacts: CSV time series (t, q, I_2, ..., I_k), JSON summaries, and
// aggregation of drifts and convergence orders across CSV files.

#include "kpl/serialize.hpp"
#include "kpl/sim.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace kpl {

/// Writes `content` to a sibling temporary file and renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace detail {

inline std::string format_sample(quad x, Precision p) {
  return p == Precision::Quad ? format_scalar(x) : format_scalar(static_cast<double>(x));
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

inline std::string csv_text(const sim::DriftReport& r) {
  std::string s = "t,q";
  for (const auto& n : r.names) s += "," + n;
  s += '\n';
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    s += detail::format_sample(r.times[i], r.precision);
    s += ',' + detail::format_sample(r.q[i], r.precision);
    for (const auto& series : r.values) s += ',' + detail::format_sample(series[i], r.precision);
    s += '\n';
  }
  return s;
}

/// A parsed CSV time series.
struct CsvSeries {
  std::string key;
  std::vector<std::string> names;  // invariant columns
  std::vector<quad> times;
  std::vector<quad> q;
  std::vector<std::vector<quad>> values;
  Precision precision = Precision::Double;

  /// Uniform step recovered from the time column; 0 for a single sample.
  double dt() const {
    if (times.size() < 2) return 0.0;
    return static_cast<double>((times.back() - times.front()) / quad(times.size() - 1));
  }
};

/// Parses CSV text produced by csv_text. A file whose fields all have at most
/// 17 significant digits is read as double output, otherwise as quad output.
inline CsvSeries parse_csv(const std::string& text, std::string key = {}) {
  std::istringstream in(text);
  std::string line;
  CsvSeries out;
  out.key = std::move(key);
  if (!std::getline(in, line)) throw FormatError("empty CSV");
  const auto header = detail::split_csv_line(line);
  if (header.size() < 2 || header[0] != "t" || header[1] != "q")
    throw FormatError("CSV header must start with t,q");
  out.names.assign(header.begin() + 2, header.end());
  out.values.resize(out.names.size());

  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw FormatError("CSV row " + std::to_string(rows.size() + 2) + " has " + std::to_string(fields.size()) +
                        " fields, expected " + std::to_string(header.size()));
    for (const auto& f : fields)
      if (significant_digits(f) > 17) out.precision = Precision::Quad;
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw FormatError("CSV has no data rows");
  try {
    for (const auto& fields : rows) {
      out.times.push_back(parse_scalar(fields[0], out.precision));
      out.q.push_back(parse_scalar(fields[1], out.precision));
      for (std::size_t i = 2; i < fields.size(); ++i) out.values[i - 2].push_back(parse_scalar(fields[i], out.precision));
    }
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  return out;
}

inline CsvSeries read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path.stem().string());
}

inline std::vector<double> series_drifts(const CsvSeries& s) {
  std::vector<double> out;
  for (const auto& v : s.values) out.push_back(sim::relative_drift(std::span<const quad>(v)));
  return out;
}

/// log(coarse/fine drift) / log(coarse/fine dt); log2 of the drift ratio for a halving.
inline double observed_order(double coarse_dt, double coarse_drift, double fine_dt, double fine_drift) {
  return std::log(coarse_drift / fine_drift) / std::log(coarse_dt / fine_dt);
}

struct RunSummary {
  std::string run_key;
  bool valid = true;
  double dt = 0.0;
  std::size_t steps = 0;
  std::string method = "rk4";
  Precision precision = Precision::Double;
  std::vector<std::string> names;
  std::vector<double> drifts;
  std::vector<double> sweep_dts;
  std::vector<std::vector<double>> sweep_drifts;  // [run][invariant]
  std::vector<std::optional<double>> observed_convergence_order;
  std::string error;
};

inline RunSummary summarize(const std::string& key, const sim::DriftReport& r) {
  RunSummary s;
  s.run_key = key;
  s.valid = r.valid;
  s.dt = r.dt;
  s.steps = r.steps;
  s.method = r.method;
  s.precision = r.precision;
  s.names = r.names;
  s.drifts = r.drift;
  s.observed_convergence_order.assign(r.names.size(), std::nullopt);
  s.error = r.error;
  return s;
}

inline RunSummary summarize(const std::string& key, const sim::ConvergenceStudy& study) {
  RunSummary s = summarize(key, study.runs.front());
  for (const auto& r : study.runs) {
    s.valid = s.valid && r.valid;
    if (s.error.empty()) s.error = r.error;
    s.sweep_dts.push_back(r.dt);
    s.sweep_drifts.push_back(r.drift);
  }
  for (std::size_t i = 0; i < study.fitted_order.size(); ++i) s.observed_convergence_order[i] = study.fitted_order[i];
  return s;
}

inline json summary_to_json(const RunSummary& s) {
  json drifts = json::object();
  json orders = json::object();
  for (std::size_t i = 0; i < s.names.size(); ++i) {
    drifts[s.names[i]] = s.drifts[i];
    orders[s.names[i]] = s.observed_convergence_order[i] ? json(*s.observed_convergence_order[i]) : json(nullptr);
  }
  json j = {{"run_key", s.run_key},
            {"valid", s.valid},
            {"dt", s.dt},
            {"steps", s.steps},
            {"method", s.method},
            {"precision", precision_name(s.precision)},
            {"drifts", drifts},
            {"observed_convergence_order", orders}};
  if (!s.sweep_dts.empty()) {
    json sweep = json::array();
    for (std::size_t r = 0; r < s.sweep_dts.size(); ++r) {
      json d = json::object();
      for (std::size_t i = 0; i < s.names.size(); ++i) d[s.names[i]] = s.sweep_drifts[r][i];
      sweep.push_back({{"dt", s.sweep_dts[r]}, {"drifts", d}});
    }
    j["dt_sweep"] = sweep;
  }
  j["error"] = s.error.empty() ? json(nullptr) : json(s.error);
  return j;
}

/// Aggregate of several CSV runs: per-run drifts and, for runs with a common
/// column set, orders between consecutive runs sorted by decreasing dt.
struct Aggregate {
  struct Run {
    std::string key;
    double dt = 0.0;
    std::size_t samples = 0;
    std::vector<double> drifts;
  };
  std::vector<std::string> names;
  std::vector<Run> runs;
  std::vector<std::pair<std::string, std::string>> pairs;  // (coarse key, fine key)
  std::vector<std::vector<double>> pairwise_order;        // [pair][invariant]
};

inline Aggregate aggregate(const std::vector<CsvSeries>& series) {
  if (series.empty()) throw std::invalid_argument("report: no input files");
  Aggregate agg;
  agg.names = series.front().names;
  for (const auto& s : series) {
    if (s.names != agg.names) throw FormatError("report: run '" + s.key + "' has different invariant columns");
    agg.runs.push_back({s.key, s.dt(), s.times.size(), series_drifts(s)});
  }
  std::stable_sort(agg.runs.begin(), agg.runs.end(), [](const Aggregate::Run& l, const Aggregate::Run& r) {
    return l.dt != r.dt ? l.dt > r.dt : l.key < r.key;
  });
  for (std::size_t r = 1; r < agg.runs.size(); ++r) {
    const auto& c = agg.runs[r - 1];
    const auto& f = agg.runs[r];
    if (!(c.dt > f.dt) || f.dt <= 0.0) continue;
    std::vector<double> orders;
    for (std::size_t i = 0; i < agg.names.size(); ++i)
      orders.push_back(observed_order(c.dt, c.drifts[i], f.dt, f.drifts[i]));
    agg.pairs.emplace_back(c.key, f.key);
    agg.pairwise_order.push_back(std::move(orders));
  }
  return agg;
}

inline std::string format_aggregate(const Aggregate& agg) {
  std::ostringstream out;
  for (const auto& r : agg.runs) {
    out << r.key << " dt=" << format_scalar(r.dt) << " samples=" << r.samples;
    for (std::size_t i = 0; i < agg.names.size(); ++i) out << ' ' << agg.names[i] << '=' << format_scalar(r.drifts[i]);
    out << '\n';
  }
  for (std::size_t p = 0; p < agg.pairs.size(); ++p) {
    const auto& orders = agg.pairwise_order[p];
    out << "order " << agg.pairs[p].first << " -> " << agg.pairs[p].second;
    for (std::size_t i = 0; i < agg.names.size(); ++i) out << ' ' << agg.names[i] << '=' << format_scalar(orders[i]);
    out << '\n';
  }
  return out.str();
}

}  // namespace kpl
