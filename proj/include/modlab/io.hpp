#pragma once

// JSON specs (sequences, operators, vectors, schemes, experiments), CSV traces and measures,
// the on-disk prime table cache, and small output helpers.

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "modlab/angle.hpp"
#include "modlab/average_engines.hpp"
#include "modlab/error.hpp"
#include "modlab/mod_sequences.hpp"
#include "modlab/operator_zoo.hpp"
#include "modlab/prime_kernel.hpp"

namespace modlab {

inline constexpr const char* tool_version = "0.1.0";

// ---------------------------------------------------------------------------
// Field-path aware JSON access
// ---------------------------------------------------------------------------

/// A JSON node together with its path from the document root, for schema diagnostics.
class Node {
 public:
  Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

  const json& raw() const { return *j_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::parse, (path_.empty() ? std::string("$") : path_) + ": " + what);
  }

  bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

  Node at(const std::string& key) const {
    if (!j_->is_object()) fail("expected an object");
    if (!j_->contains(key)) fail("missing field '" + key + "'");
    return Node((*j_)[key], path_ + "." + key);
  }

  Node at(std::size_t i) const {
    if (!j_->is_array() || i >= j_->size()) fail("index " + std::to_string(i) + " out of range");
    return Node((*j_)[i], path_ + "[" + std::to_string(i) + "]");
  }

  std::size_t size() const {
    if (!j_->is_array()) fail("expected an array");
    return j_->size();
  }

  std::string str() const {
    if (!j_->is_string()) fail("expected a string");
    return j_->get<std::string>();
  }

  double num() const {
    if (!j_->is_number()) fail("expected a number");
    return j_->get<double>();
  }

  std::uint64_t uint() const {
    if (j_->is_number_unsigned()) return j_->get<std::uint64_t>();
    if (j_->is_number_integer() && j_->get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j_->get<std::int64_t>());
    if (j_->is_number_float()) {
      const double d = j_->get<double>();
      if (d >= 0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
    }
    fail("expected a non-negative integer");
  }

  std::int64_t int64() const {
    if (j_->is_number_integer()) return j_->get<std::int64_t>();
    fail("expected an integer");
  }

  bool boolean() const {
    if (!j_->is_boolean()) fail("expected true or false");
    return j_->get<bool>();
  }

  double num_or(const std::string& key, double d) const { return has(key) ? at(key).num() : d; }
  std::uint64_t uint_or(const std::string& key, std::uint64_t d) const { return has(key) ? at(key).uint() : d; }
  bool bool_or(const std::string& key, bool d) const { return has(key) ? at(key).boolean() : d; }
  std::string str_or(const std::string& key, std::string d) const { return has(key) ? at(key).str() : d; }

  /// Complex scalar: number, [re, im] or {"re":, "im":}.
  cplx complex() const {
    if (j_->is_number()) return {num(), 0.0};
    if (j_->is_array() && j_->size() == 2) return {at(0).num(), at(1).num()};
    if (j_->is_object()) return {num_or("re", 0.0), num_or("im", 0.0)};
    fail("expected a complex number (number, [re, im] or {re, im})");
  }

 private:
  const json* j_;
  std::string path_;
};

/// Angle: "b/q" (exact rational), a number of turns in [0,1), or "generic" (the double
/// nearest sqrt(2) - 1).
inline Angle parse_angle(const Node& n) {
  if (n.raw().is_number()) {
    const double t = n.num();
    if (!(t >= 0.0 && t < 1.0)) n.fail("angle in turns must lie in [0,1)");
    return Angle::from_turns(t);
  }
  const std::string s = n.str();
  if (s == "generic") return Angle::from_turns(std::numbers::sqrt2 - 1.0);
  const auto slash = s.find('/');
  if (slash == std::string::npos) n.fail("angle string must look like 'b/q' or be 'generic'");
  try {
    std::size_t used = 0;
    const std::int64_t b = std::stoll(s.substr(0, slash), &used);
    if (used != slash) throw std::invalid_argument("numerator");
    const std::string qs = s.substr(slash + 1);
    const std::uint64_t q = std::stoull(qs, &used);
    if (used != qs.size() || q == 0) throw std::invalid_argument("denominator");
    return Angle::rational(b, q);
  } catch (const std::logic_error&) {
    n.fail("malformed rational angle '" + s + "'");
  }
}

inline PhiFn parse_phi(const Node& n) {
  const std::string kind = n.at("kind").str();
  try {
    if (kind == "identity") return PhiFn::identity();
    if (kind == "power") return PhiFn::power(n.at("p").num());
    if (kind == "log1p") return PhiFn::log1p();
    if (kind == "table") {
      const Node k = n.at("knots");
      std::vector<std::pair<double, double>> knots;
      for (std::size_t i = 0; i < k.size(); ++i) knots.emplace_back(k.at(i).at(0).num(), k.at(i).at(1).num());
      return PhiFn::table(std::move(knots));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::parse) throw;
    n.fail(e.what());
  }
  n.at("kind").fail("unknown phi kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Sequences
// ---------------------------------------------------------------------------

inline RigidityScheme parse_rigidity_scheme(const Node& p) {
  RigidityScheme s;
  const std::string k = p.str_or("k", "powers_of_two");
  if (p.has("k") && p.at("k").raw().is_array()) {
    s.kind = RigidityScheme::Kind::explicit_list;
    const Node list = p.at("k");
    for (std::size_t i = 0; i < list.size(); ++i) s.explicit_terms.push_back(list.at(i).uint());
  } else if (k == "powers_of_two") {
    s.kind = RigidityScheme::Kind::powers_of_two;
  } else if (k == "polynomial") {
    s.kind = RigidityScheme::Kind::polynomial;
    s.degree = static_cast<unsigned>(p.uint_or("degree", 2));
  } else {
    p.at("k").fail("expected 'powers_of_two', 'polynomial' or an explicit list");
  }
  s.delta = p.num_or("delta", 0.1);
  s.signs_enabled = p.bool_or("signs_enabled", true);
  return s;
}

/// {generator, params} -> ModSeq. Prime-based generators need `table`.
inline ModSeq parse_sequence(const Node& n, const TablePtr& table, std::uint64_t default_horizon = 0) {
  const std::string g = n.at("generator").str();
  static const json empty = json::object();
  const Node p = n.has("params") ? n.at("params") : Node(empty, n.path() + ".params");
  const auto need_table = [&] {
    if (!table) n.fail("generator '" + g + "' needs a prime table");
    return table;
  };
  try {
    if (g == "constant") return make_constant(p.has("value") ? p.at("value").complex() : cplx(p.num_or("re", 0.0), p.num_or("im", 0.0)));
    if (g == "exponential") return make_exponential(parse_angle(p.at("angle")));
    if (g == "von_mangoldt") {
      const std::string kind = p.str_or("kind", "prime_only");
      if (kind != "full" && kind != "prime_only") p.at("kind").fail("expected 'full' or 'prime_only'");
      return make_von_mangoldt(need_table(), kind == "full" ? MangoldtKind::full : MangoldtKind::prime_only);
    }
    if (g == "clipped_von_mangoldt") return make_clipped_von_mangoldt(need_table(), p.at("cap").num());
    if (g == "power") return make_power(p.at("beta").num());
    if (g == "dyadic_spike") return make_dyadic_spike();
    if (g == "bounded_random") {
      return make_bounded_random(p.uint_or("seed", 1), p.num_or("bound", 1.0), p.bool_or("complex", true));
    }
    if (g == "values") {
      const Node v = p.at("values");
      std::vector<cplx> vals;
      for (std::size_t i = 0; i < v.size(); ++i) vals.push_back(v.at(i).complex());
      return make_from_values(std::move(vals));
    }
    if (g == "rigidity") {
      const std::uint64_t h = p.uint_or("horizon", default_horizon);
      if (h == 0) p.fail("rigidity sequence needs a horizon");
      const Measure mu = Measure::dyadic_uniform(static_cast<unsigned>(p.uint_or("dyadic_m", 1)));
      return make_rigidity_counterexample(parse_rigidity_scheme(p), h, [&mu](std::uint64_t k) {
        return std::clamp(measure_fourier_coefficient(mu, static_cast<std::int64_t>(k)).real(), 0.0, 1.0);
      });
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::parse) throw;
    p.fail(e.what());
  }
  n.at("generator").fail("unknown generator '" + g + "'");
}

// ---------------------------------------------------------------------------
// Operators, vectors, schemes
// ---------------------------------------------------------------------------

inline Measure parse_measure(const Node& n) {
  if (n.has("dyadic_m")) return Measure::dyadic_uniform(static_cast<unsigned>(n.at("dyadic_m").uint()));
  const Node atoms = n.at("atoms");
  Measure mu;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const Node a = atoms.at(i);
    mu.angles.push_back(parse_angle(a.at(0)));
    const double w = a.at(1).num();
    if (!(w >= 0.0)) a.at(1).fail("weight must be >= 0");
    mu.weights.push_back(w);
  }
  return mu;
}

/// {kind, params, seed}.
inline Operator parse_operator(const Node& n, std::uint64_t default_seed = 1) {
  const std::string kind = n.at("kind").str();
  static const json empty = json::object();
  const Node p = n.has("params") ? n.at("params") : Node(empty, n.path() + ".params");
  try {
    if (kind == "diagonal_unitary") {
      const Node a = p.at("angles");
      std::vector<Angle> angles;
      for (std::size_t i = 0; i < a.size(); ++i) angles.push_back(parse_angle(a.at(i)));
      return make_diagonal_unitary(std::move(angles));
    }
    if (kind == "dense_contraction") {
      std::optional<double> cap;
      if (p.has("cap")) cap = p.at("cap").num();
      return make_random_contraction(p.at("dim").uint(), n.uint_or("seed", default_seed), cap);
    }
    if (kind == "truncated_shift") return make_truncated_shift(p.at("window").uint());
    if (kind == "multiplication") return make_multiplication_operator(parse_measure(p));
    if (kind == "gillespie") {
      return make_gillespie_multiplier(parse_angle(p.at("alpha")), static_cast<int>(p.at("window").uint()),
                                       p.at("p").num(), static_cast<int>(p.uint_or("grid", 8 * p.at("window").uint())));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::parse) throw;
    p.fail(e.what());
  }
  n.at("kind").fail("unknown operator kind '" + kind + "'");
}

/// Explicit coordinates, or a preset: "ones", "unit" (ones normalized), {"basis": m}
/// (shift index m, or coordinate m otherwise), {"random": seed}.
inline Vector parse_vector(const Node& n, const Operator& op) {
  const auto dim = static_cast<Eigen::Index>(op.dim());
  if (n.raw().is_array()) {
    if (n.size() != static_cast<std::size_t>(dim)) {
      n.fail("vector has " + std::to_string(n.size()) + " coordinates, operator dimension is " + std::to_string(dim));
    }
    Vector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = n.at(static_cast<std::size_t>(i)).complex();
    return v;
  }
  if (n.raw().is_string()) {
    const std::string s = n.str();
    if (s == "ones") return Vector::Ones(dim);
    if (s == "unit") return Vector::Ones(dim) / std::sqrt(static_cast<double>(dim));
    n.fail("unknown vector preset '" + s + "'");
  }
  if (n.has("basis")) {
    const std::int64_t m = n.at("basis").int64();
    if (op.as<TruncatedShift>()) {
      try {
        return shift_basis_vector(op, m);
      } catch (const Error& e) {
        n.at("basis").fail(e.what());
      }
    }
    if (m < 0 || m >= dim) n.at("basis").fail("coordinate out of range");
    Vector v = Vector::Zero(dim);
    v(m) = 1.0;
    return v;
  }
  if (n.has("random")) {
    Rng rng(n.at("random").uint());
    Vector v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = rng.complex_normal();
    return v / v.norm();
  }
  n.fail("expected coordinates, a preset name, {basis} or {random}");
}

inline AverageScheme parse_scheme(const Node& n, const TablePtr& table, std::uint64_t horizon) {
  const std::string kind = n.raw().is_string() ? n.str() : n.at("kind").str();
  if (kind == "cesaro") return AverageScheme::cesaro();
  if (kind == "prime") return AverageScheme::prime();
  if (kind == "prime_log") return AverageScheme::prime_log();
  if (kind == "modulated") return AverageScheme::modulated(parse_sequence(n.at("sequence"), table, horizon));
  if (kind == "prime_poly") {
    const Node c = n.at("poly");
    std::vector<std::uint64_t> coeffs;
    for (std::size_t i = 0; i < c.size(); ++i) coeffs.push_back(c.at(i).uint());
    try {
      return AverageScheme::prime_poly(PolyNN(std::move(coeffs)));
    } catch (const Error& e) {
      c.fail(e.what());
    }
  }
  (n.raw().is_string() ? n : n.at("kind")).fail("unknown scheme '" + kind + "'");
}

/// Does the scheme (including a modulating sequence) need the prime table?
inline bool scheme_needs_table(const json& scheme) {
  if (scheme.is_string()) return scheme != "cesaro";
  const std::string kind = scheme.value("kind", "");
  if (kind == "modulated" && scheme.contains("sequence")) {
    const std::string g = scheme["sequence"].value("generator", "");
    return g == "von_mangoldt" || g == "clipped_von_mangoldt";
  }
  return kind == "prime" || kind == "prime_log" || kind == "prime_poly";
}

// ---------------------------------------------------------------------------
// Experiment specs
// ---------------------------------------------------------------------------

struct ExperimentSpec {
  json source;
  std::string name = "experiment";
  json op;
  json vector;
  json scheme;
  std::uint64_t horizon = 0;
  std::uint64_t checkpoint_start = 10;
  double checkpoint_ratio = 1.3;
  std::uint64_t seed = 1;
  ConvergenceParams convergence;
  std::uint64_t max_order = 1000;
  std::string trace_path;
  std::string report_path;
};

inline ExperimentSpec parse_experiment(const json& j) {
  const Node root(j, "");
  if (!j.is_object()) root.fail("experiment spec must be a JSON object");
  static const std::vector<std::string> known = {"name", "operator", "vector", "scheme", "horizon", "checkpoints",
                                                 "seed", "convergence", "max_order", "output", "table_horizon"};
  for (const auto& [k, v] : j.items()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) root.at(k).fail("unknown field");
  }
  ExperimentSpec s;
  s.source = j;
  s.name = root.str_or("name", "experiment");
  s.op = root.at("operator").raw();
  if (!s.op.is_object()) root.at("operator").fail("expected an object");
  s.vector = root.at("vector").raw();
  s.scheme = root.at("scheme").raw();
  s.horizon = root.at("horizon").uint();
  if (s.horizon < 1) root.at("horizon").fail("horizon must be >= 1");
  if (root.has("checkpoints")) {
    const Node c = root.at("checkpoints");
    s.checkpoint_start = c.uint_or("start", 10);
    s.checkpoint_ratio = c.num_or("ratio", 1.3);
    if (!(s.checkpoint_ratio > 1.0)) c.at("ratio").fail("ratio must exceed 1");
    if (s.checkpoint_start < 1) c.at("start").fail("start must be >= 1");
  }
  s.seed = root.uint_or("seed", 1);
  if (root.has("convergence")) {
    const Node c = root.at("convergence");
    s.convergence.tol = c.num_or("tol", 1e-3);
    s.convergence.window = c.uint_or("window", 6);
    s.convergence.separation = c.num_or("separation", 10 * s.convergence.tol);
    s.convergence.revisits = c.uint_or("revisits", 3);
  }
  s.max_order = root.uint_or("max_order", 1000);
  if (root.has("output")) {
    const Node o = root.at("output");
    s.trace_path = o.str_or("trace", "");
    s.report_path = o.str_or("report", "");
  }
  return s;
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse, path + ": " + e.what());
  }
}

/// Writes via a temporary sibling and rename, so readers never see a partial file.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::resource, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorCode::resource, "write failed for " + tmp.string());
  }
  fs::rename(tmp, target);
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// N, re/im per coordinate, norm; 17 significant digits.
inline std::string trace_csv(const Trace& t) {
  std::string out = "N";
  const Eigen::Index dim = t.points.empty() ? 0 : t.points.front().average.size();
  for (Eigen::Index i = 0; i < dim; ++i) out += ",re" + std::to_string(i) + ",im" + std::to_string(i);
  out += ",norm\n";
  for (const auto& p : t.points) {
    out += std::to_string(p.n);
    for (Eigen::Index i = 0; i < dim; ++i) {
      out += ',' + format_double(p.average(i).real());
      out += ',' + format_double(p.average(i).imag());
    }
    out += ',' + format_double(p.norm) + '\n';
  }
  return out;
}

inline std::string stats_csv(const SeqStats& st) {
  std::string out = "n,abs_mean,sq_mean,max_over_n\n";
  for (const auto& r : st.rows) {
    out += std::to_string(r.n) + ',' + format_double(r.abs_mean) + ',' + format_double(r.sq_mean) + ',' +
           format_double(r.max_over_n) + '\n';
  }
  return out;
}

/// Measure atoms as "angle,weight" rows; angles are "b/q" or decimal turns.
inline std::string measure_csv(const Measure& mu) {
  std::string out = "angle,weight\n";
  for (std::size_t i = 0; i < mu.size(); ++i) out += mu.angles[i].to_string() + ',' + format_double(mu.weights[i]) + '\n';
  return out;
}

inline Measure parse_measure_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  Measure mu;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (lineno == 1 && line.rfind("angle", 0) == 0)) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::parse, "measure line " + std::to_string(lineno) + ": expected 'angle,weight'");
    const std::string a = line.substr(0, comma);
    const json aj = a.find('/') != std::string::npos ? json(a) : json(std::strtod(a.c_str(), nullptr));
    mu.angles.push_back(parse_angle(Node(aj, "line " + std::to_string(lineno))));
    mu.weights.push_back(std::strtod(line.c_str() + comma + 1, nullptr));
  }
  return mu;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

// ---------------------------------------------------------------------------
// Prime table cache: "MODLABPT", u32 version, u64 horizon, u64 word count, words (little endian)
// ---------------------------------------------------------------------------

inline constexpr std::uint32_t table_cache_version = 1;

inline std::optional<std::string> default_cache_dir() {
  if (const char* d = std::getenv("MODLAB_CACHE_DIR"); d && *d) return std::string(d);
  return std::nullopt;
}

inline std::string table_cache_path(const std::string& dir, std::uint64_t horizon) {
  return (std::filesystem::path(dir) / ("primes_" + std::to_string(horizon) + ".bin")).string();
}

inline void save_table(const PrimeTable& t, const std::string& path) {
  std::string buf = "MODLABPT";
  const auto put = [&buf](const void* p, std::size_t n) { buf.append(static_cast<const char*>(p), n); };
  const std::uint32_t ver = table_cache_version;
  const std::uint64_t h = t.horizon();
  const auto bits = t.odd_bits();
  const std::uint64_t words = bits.size();
  put(&ver, sizeof ver);
  put(&h, sizeof h);
  put(&words, sizeof words);
  put(bits.data(), words * sizeof(std::uint64_t));
  write_file_atomic(path, buf);
}

inline PrimeTable load_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::parse, "cannot open table cache " + path);
  char magic[8];
  std::uint32_t ver = 0;
  std::uint64_t h = 0;
  std::uint64_t words = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&ver), sizeof ver);
  in.read(reinterpret_cast<char*>(&h), sizeof h);
  in.read(reinterpret_cast<char*>(&words), sizeof words);
  if (!in || std::memcmp(magic, "MODLABPT", 8) != 0) throw Error(ErrorCode::parse, path + ": not a table cache");
  if (ver != table_cache_version) throw Error(ErrorCode::parse, path + ": unsupported cache version " + std::to_string(ver));
  if (words > (PrimeTable::max_horizon >> 7) + 2) throw Error(ErrorCode::parse, path + ": corrupt word count");
  std::vector<std::uint64_t> bits(words);
  in.read(reinterpret_cast<char*>(bits.data()), static_cast<std::streamsize>(words * sizeof(std::uint64_t)));
  if (!in) throw Error(ErrorCode::parse, path + ": truncated bitset");
  return PrimeTable::from_odd_bits(h, std::move(bits));
}

/// Loads the table from the cache directory when present, otherwise sieves (and stores it).
inline TablePtr obtain_table(std::uint64_t horizon, std::optional<std::string> cache_dir = default_cache_dir()) {
  if (cache_dir) {
    const std::string path = table_cache_path(*cache_dir, horizon);
    if (std::filesystem::exists(path)) {
      try {
        return std::make_shared<const PrimeTable>(load_table(path));
      } catch (const Error&) {
        // unreadable cache: rebuild below
      }
    }
    auto t = std::make_shared<const PrimeTable>(horizon);
    try {
      save_table(*t, path);
    } catch (const std::exception&) {
      // the cache is an optimization only
    }
    return t;
  }
  return std::make_shared<const PrimeTable>(horizon);
}

}  // namespace modlab
