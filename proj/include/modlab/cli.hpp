#pragma once

// Command implementations behind the modlab executable. Each returns the process exit code:
// 0 definitive, 1 error, 2 inconclusive, 3 suite failures.

#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "modlab/average_engines.hpp"
#include "modlab/io.hpp"
#include "modlab/theorem_suite.hpp"

namespace modlab {

enum ExitCode : int { exit_ok = 0, exit_error = 1, exit_inconclusive = 2, exit_suite_failed = 3 };

struct Overrides {
  std::optional<std::uint64_t> horizon;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<double> checkpoint_ratio;
  std::optional<double> tol;
  std::optional<std::string> cache_dir;
};

inline int cmd_sieve(std::uint64_t horizon, std::ostream& out, std::ostream& err,
                     std::optional<std::string> cache_dir = default_cache_dir()) {
  try {
    const TablePtr t = obtain_table(horizon, cache_dir);
    const double h = static_cast<double>(horizon);
    out << "horizon      " << horizon << '\n'
        << "pi(H)        " << t->prime_count(horizon) << '\n'
        << "theta(H)/H   " << format_double(t->theta(horizon) / h) << '\n'
        << "psi(H)/H     " << format_double(t->psi(horizon) / h) << '\n'
        << "Li(H)        " << (horizon >= 2 ? format_double(log_integral(h)) : std::string("-")) << '\n';
    return exit_ok;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_error;
  }
}

struct RunResult {
  int exit_code = exit_error;
  std::string trace_path;
  std::string report_path;
  json report;
};

/// Runs one experiment spec; writes the trace CSV and the report JSON.
inline RunResult run_experiment(const json& spec_json, const Overrides& ov, std::ostream& out) {
  ExperimentSpec spec = parse_experiment(spec_json);
  if (ov.horizon) spec.horizon = *ov.horizon;
  if (ov.seed) spec.seed = *ov.seed;
  if (ov.checkpoint_ratio) spec.checkpoint_ratio = *ov.checkpoint_ratio;
  if (ov.tol) {
    spec.convergence.tol = *ov.tol;
    if (!spec_json.contains("convergence") || !spec_json["convergence"].contains("separation")) {
      spec.convergence.separation = 10 * *ov.tol;
    }
  }
  if (!(spec.checkpoint_ratio > 1.0)) throw Error(ErrorCode::invalid_argument, "checkpoint ratio must exceed 1");

  const Node root(spec.source, "");
  TablePtr table;
  std::uint64_t table_horizon = 0;
  if (scheme_needs_table(spec.scheme)) {
    table_horizon = root.uint_or("table_horizon", spec.horizon);
    table = obtain_table(table_horizon, ov.cache_dir ? ov.cache_dir : default_cache_dir());
  }
  auto op = std::make_shared<const Operator>(parse_operator(root.at("operator"), spec.seed));
  const Vector x = parse_vector(root.at("vector"), *op);
  const AverageScheme scheme = parse_scheme(root.at("scheme"), table, spec.horizon);

  AverageEngine eng(scheme, op, x, table);
  const auto grid = geometric_grid(spec.checkpoint_start, spec.checkpoint_ratio, spec.horizon);
  const Trace trace = eng.run(grid);
  const ConvergenceReport conv = detect_convergence(trace, spec.convergence);
  const auto pred = predict_limit(*op, scheme, x, spec.max_order);

  RunResult res;
  std::string dir = ov.out.value_or("");
  const auto place = [&](const std::string& given, const std::string& suffix) {
    const std::string file = given.empty() ? spec.name + suffix : given;
    if (dir.empty()) return file;
    return (std::filesystem::path(dir) / std::filesystem::path(file).filename()).string();
  };
  res.trace_path = place(spec.trace_path, ".trace.csv");
  res.report_path = place(spec.report_path, ".report.json");

  json rep;
  rep["tool"] = "modlab";
  rep["version"] = tool_version;
  rep["spec_hash"] = hex64(fnv1a(spec.source.dump()));
  rep["spec"] = spec.source;
  rep["name"] = spec.name;
  rep["seed"] = spec.seed;
  rep["horizon"] = spec.horizon;
  rep["table_horizon"] = table_horizon;
  rep["operator"] = op->to_json();
  rep["scheme"] = scheme.to_json();
  rep["checkpoints"] = trace.points.size();
  const TracePoint& last = trace.points.back();
  rep["final"] = {{"N", last.n}, {"average", vector_json(last.average)}, {"norm", last.norm}};
  rep["convergence"] = conv.to_json();
  if (pred) {
    rep["prediction"] = vector_json(*pred);
    rep["prediction_error"] = trace.distance(last.average, *pred);
  } else {
    rep["prediction"] = nullptr;
  }
  write_file_atomic(res.trace_path, trace_csv(trace));
  write_file_atomic(res.report_path, rep.dump(2) + "\n");
  res.report = rep;

  out << spec.name << ": " << conv.status_name() << " at N=" << last.n << ", |average| = " << format_double(last.norm);
  if (pred) out << ", distance to prediction " << format_double(rep["prediction_error"].get<double>());
  out << "\n  trace  " << res.trace_path << "\n  report " << res.report_path << '\n';
  res.exit_code = conv.status == ConvergenceReport::Status::inconclusive ? exit_inconclusive : exit_ok;
  return res;
}

inline int cmd_run(const std::string& spec_path, const Overrides& ov, std::ostream& out, std::ostream& err) {
  try {
    return run_experiment(read_json_file(spec_path), ov, out).exit_code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_error;
  }
}

inline SuiteConfig parse_suite_config(const json& j) {
  const Node root(j, "");
  if (!j.is_object()) root.fail("suite config must be a JSON object");
  static const std::vector<std::string> known = {"horizon", "seed", "checkpoint_ratio", "checks", "exclude", "parallel"};
  for (const auto& [k, v] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) root.at(k).fail("unknown field");
  }
  SuiteConfig c;
  c.horizon = root.uint_or("horizon", c.horizon);
  c.seed = root.uint_or("seed", c.seed);
  c.checkpoint_ratio = root.num_or("checkpoint_ratio", c.checkpoint_ratio);
  c.parallel = root.bool_or("parallel", c.parallel);
  const auto list = [&](const char* key, std::vector<std::string>& dst) {
    if (!root.has(key)) return;
    const Node l = root.at(key);
    for (std::size_t i = 0; i < l.size(); ++i) dst.push_back(l.at(i).str());
  };
  list("checks", c.only);
  list("exclude", c.exclude);
  return c;
}

/// Runs the theorem suite and prints the pass/fail matrix. Writes the JSON array of reports to
/// `ov.out` when given.
inline int cmd_verify(const std::optional<std::string>& config_path, const Overrides& ov, std::ostream& out,
                      std::ostream& err) {
  SuiteConfig cfg;
  try {
    if (config_path) cfg = parse_suite_config(read_json_file(*config_path));
    if (ov.horizon) cfg.horizon = *ov.horizon;
    if (ov.seed) cfg.seed = *ov.seed;
    if (ov.checkpoint_ratio) cfg.checkpoint_ratio = *ov.checkpoint_ratio;
    if (cfg.horizon < 2) throw Error(ErrorCode::invalid_horizon, "suite horizon must be >= 2");
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_error;
  }
  std::vector<CheckReport> reports;
  try {
    const TablePtr table = obtain_table(cfg.horizon, ov.cache_dir ? ov.cache_dir : default_cache_dir());
    reports = run_all(cfg, table);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_error;
  }
  std::vector<std::string> failing;
  out << std::left << std::setw(44) << "check" << std::setw(14) << "verdict" << std::setw(14) << "expected"
      << "ok\n";
  for (const auto& r : reports) {
    out << std::setw(44) << r.id << std::setw(14) << to_string(r.verdict) << std::setw(14) << to_string(r.expected)
        << (r.as_expected() ? "yes" : "NO") << '\n';
    if (!r.as_expected()) failing.push_back(r.id);
  }
  out << reports.size() - failing.size() << "/" << reports.size() << " checks as expected at horizon " << cfg.horizon
      << '\n';
  if (ov.out) {
    json arr = json::array();
    for (const auto& r : reports) arr.push_back(r.to_json());
    json doc{{"tool", "modlab"}, {"version", tool_version}, {"horizon", cfg.horizon}, {"seed", cfg.seed},
             {"reports", arr}};
    try {
      write_file_atomic(*ov.out, doc.dump(2) + "\n");
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return exit_error;
    }
  }
  if (!failing.empty()) {
    err << "failing checks:";
    for (const auto& id : failing) err << ' ' << id;
    err << '\n';
    return exit_suite_failed;
  }
  return exit_ok;
}

/// Prints (or writes to ov.out) the CSV of running statistics for a sequence spec given as a
/// JSON file path or inline JSON text.
inline int cmd_seq_stats(const std::string& seq, std::uint64_t horizon, const Overrides& ov, std::ostream& out,
                         std::ostream& err) {
  try {
    json j;
    if (!seq.empty() && (seq.front() == '{')) {
      try {
        j = json::parse(seq);
      } catch (const json::parse_error& e) {
        throw Error(ErrorCode::parse, std::string("inline sequence: ") + e.what());
      }
    } else {
      j = read_json_file(seq);
    }
    if (horizon < 1) throw Error(ErrorCode::invalid_horizon, "horizon must be >= 1");
    TablePtr table;
    const std::string g = j.is_object() ? j.value("generator", "") : "";
    if (g == "von_mangoldt" || g == "clipped_von_mangoldt") {
      table = obtain_table(std::max<std::uint64_t>(horizon, 2), ov.cache_dir ? ov.cache_dir : default_cache_dir());
    }
    const ModSeq s = parse_sequence(Node(j, ""), table, horizon);
    const auto grid = geometric_grid(10, ov.checkpoint_ratio.value_or(1.3), horizon);
    const SeqStats st = stats_scan(s, horizon, grid);
    const std::string csv = stats_csv(st);
    if (ov.out) {
      write_file_atomic(*ov.out, csv);
    } else {
      out << csv;
    }
    return exit_ok;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_error;
  }
}

}  // namespace modlab
