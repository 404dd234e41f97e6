#pragma once

// Modulating sequences (a_k)_{k>=1}: generators for the weights and
// counterexamples, and streaming analyzers for the summability conditions
// (W_phi growth, W_1 seminorm, o(n), mean square).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "modlab/angle.hpp"
#include "modlab/error.hpp"
#include "modlab/numeric.hpp"
#include "modlab/prime_kernel.hpp"

namespace modlab {

using json = nlohmann::json;

/// Strictly increasing phi: R+ -> R+ with phi -> infinity, from a small catalog or a table.
class PhiFn {
 public:
  enum class Kind { identity, power, log1p, table };

  static PhiFn identity() { return PhiFn(Kind::identity); }

  /// phi(x) = x^{p-1}, p > 1.
  static PhiFn power(double p) {
    if (!(p > 1.0)) throw Error(ErrorCode::invalid_phi, "power phi needs p > 1");
    PhiFn f(Kind::power);
    f.exponent_ = p;
    return f;
  }

  static PhiFn log1p() { return PhiFn(Kind::log1p); }

  /// Piecewise linear through the knots, linear from the origin before the first knot
  /// and extrapolated with the last slope after the last one.
  static PhiFn table(std::vector<std::pair<double, double>> knots) {
    if (knots.size() < 2) throw Error(ErrorCode::invalid_phi, "phi table needs at least two knots");
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (knots[i].first < 0 || knots[i].second < 0) throw Error(ErrorCode::invalid_phi, "phi knots must be >= 0");
      if (i > 0 && !(knots[i].first > knots[i - 1].first && knots[i].second > knots[i - 1].second)) {
        throw Error(ErrorCode::invalid_phi, "phi table must be strictly increasing at knot " + std::to_string(i));
      }
    }
    if (knots.front().first > 0 && knots.front().second == 0) {
      throw Error(ErrorCode::invalid_phi, "phi table is flat before its first knot");
    }
    PhiFn f(Kind::table);
    f.knots_ = std::move(knots);
    return f;
  }

  double operator()(double x) const {
    switch (kind_) {
      case Kind::identity: return x;
      case Kind::power: return std::pow(x, exponent_ - 1.0);
      case Kind::log1p: return std::log1p(x);
      case Kind::table: {
        const auto& k = knots_;
        if (x <= k.front().first) return k.front().first == 0 ? k.front().second : k.front().second * x / k.front().first;
        for (std::size_t i = 1; i < k.size(); ++i) {
          if (x <= k[i].first) {
            const double s = (x - k[i - 1].first) / (k[i].first - k[i - 1].first);
            return k[i - 1].second + s * (k[i].second - k[i - 1].second);
          }
        }
        const auto& a = k[k.size() - 2];
        const auto& b = k.back();
        return b.second + (x - b.first) * (b.second - a.second) / (b.first - a.first);
      }
    }
    return x;
  }

  Kind kind() const { return kind_; }
  double exponent() const { return exponent_; }

  json to_json() const {
    switch (kind_) {
      case Kind::identity: return {{"kind", "identity"}};
      case Kind::power: return {{"kind", "power"}, {"p", exponent_}};
      case Kind::log1p: return {{"kind", "log1p"}};
      case Kind::table: {
        json t = json::array();
        for (const auto& [x, y] : knots_) t.push_back({x, y});
        return {{"kind", "table"}, {"knots", t}};
      }
    }
    return {};
  }

 private:
  explicit PhiFn(Kind kind) : kind_(kind) {}

  Kind kind_;
  double exponent_ = 2.0;
  std::vector<std::pair<double, double>> knots_;
};

/// Claimed properties of a sequence. Claims are inputs to checks, never trusted by them.
struct SeqFlags {
  bool hartman = false;
  bool bounded_w1 = false;
  bool o_of_n = false;
  std::optional<PhiFn> w_phi;
};

class ModSeq {
 public:
  using Fn = std::function<cplx(std::uint64_t)>;
  static constexpr std::uint64_t unbounded = std::numeric_limits<std::uint64_t>::max();

  ModSeq(std::string generator, json params, Fn fn, std::uint64_t horizon, SeqFlags flags, json metadata = json::object())
      : generator_(std::move(generator)),
        params_(std::move(params)),
        fn_(std::move(fn)),
        horizon_(horizon),
        flags_(std::move(flags)),
        metadata_(std::move(metadata)) {}

  /// a_k for 1 <= k <= horizon().
  cplx value(std::uint64_t k) const {
    if (k == 0) throw Error(ErrorCode::domain, "sequences are indexed from 1");
    if (k > horizon_) {
      throw Error(ErrorCode::horizon_exceeded, generator_ + " is defined up to " + std::to_string(horizon_) +
                                                   ", asked for " + std::to_string(k));
    }
    return fn_(k);
  }

  cplx operator()(std::uint64_t k) const { return value(k); }

  const std::string& generator() const { return generator_; }
  const json& params() const { return params_; }
  std::uint64_t horizon() const { return horizon_; }
  const SeqFlags& flags() const { return flags_; }
  const json& metadata() const { return metadata_; }

  json to_json() const { return {{"generator", generator_}, {"params", params_}}; }

  void require_horizon(std::uint64_t h) const {
    if (h > horizon_) {
      throw Error(ErrorCode::horizon_exceeded,
                  generator_ + " is defined up to " + std::to_string(horizon_) + ", need " + std::to_string(h));
    }
  }

 private:
  std::string generator_;
  json params_;
  Fn fn_;
  std::uint64_t horizon_;
  SeqFlags flags_;
  json metadata_;
};

using TablePtr = std::shared_ptr<const PrimeTable>;

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

inline ModSeq make_constant(cplx c) {
  SeqFlags f{true, true, true, PhiFn::identity()};
  return ModSeq("constant", {{"re", c.real()}, {"im", c.imag()}}, [c](std::uint64_t) { return c; }, ModSeq::unbounded,
                f);
}

/// a_k = lambda^k with lambda = e(t), computed by exact argument reduction.
inline ModSeq make_exponential(const Angle& lambda) {
  SeqFlags f{true, true, true, PhiFn::identity()};
  return ModSeq("exponential", {{"angle", lambda.to_string()}},
                [lambda](std::uint64_t k) { return lambda.times_u(k).unit(); }, ModSeq::unbounded, f);
}

/// Overload taking lambda as a complex number; it must be unimodular within 1e-12.
inline ModSeq make_exponential(cplx lambda) {
  if (std::abs(std::abs(lambda) - 1.0) > 1e-12) {
    throw Error(ErrorCode::domain, "exponential sequence needs |lambda| = 1");
  }
  double t = std::arg(lambda) / (2.0 * std::numbers::pi);
  if (t < 0) t += 1.0;
  return make_exponential(Angle::from_turns(t));
}

enum class MangoldtKind { full, prime_only };

inline ModSeq make_von_mangoldt(TablePtr table, MangoldtKind kind) {
  if (!table) throw Error(ErrorCode::missing_table, "von Mangoldt sequence needs a prime table");
  SeqFlags f{true, true, true, std::nullopt};
  const std::uint64_t h = table->horizon();
  if (kind == MangoldtKind::full) {
    return ModSeq("von_mangoldt", {{"kind", "full"}},
                  [t = std::move(table)](std::uint64_t k) { return cplx(t->von_mangoldt(k), 0.0); }, h, f);
  }
  return ModSeq("von_mangoldt", {{"kind", "prime_only"}},
                [t = std::move(table)](std::uint64_t k) { return cplx(t->von_mangoldt_prime(k), 0.0); }, h, f);
}

/// min(Lambda'(k), cap): bounded, so it satisfies the W_phi condition with phi = identity.
inline ModSeq make_clipped_von_mangoldt(TablePtr table, double cap) {
  if (!table) throw Error(ErrorCode::missing_table, "clipped von Mangoldt sequence needs a prime table");
  SeqFlags f{false, true, true, PhiFn::identity()};
  const std::uint64_t h = table->horizon();
  return ModSeq("clipped_von_mangoldt", {{"cap", cap}},
                [t = std::move(table), cap](std::uint64_t k) { return cplx(std::min(t->von_mangoldt_prime(k), cap), 0.0); },
                h, f);
}

/// a_k = k^beta. No W_phi claim unless beta <= 0.
inline ModSeq make_power(double beta) {
  SeqFlags f;
  f.o_of_n = beta < 1.0;
  f.bounded_w1 = beta <= 0.0;
  if (beta <= 0.0) f.w_phi = PhiFn::identity();
  return ModSeq("power", {{"beta", beta}},
                [beta](std::uint64_t k) { return cplx(std::pow(static_cast<double>(k), beta), 0.0); },
                ModSeq::unbounded, f);
}

/// a_{2^j} = 2^{j-1} (j >= 1), zero elsewhere. Bounded Cesaro means, but a_n/n does not vanish.
inline ModSeq make_dyadic_spike() {
  SeqFlags f;
  f.bounded_w1 = true;
  return ModSeq("dyadic_spike", json::object(),
                [](std::uint64_t k) {
                  if (k >= 2 && std::has_single_bit(k)) return cplx(static_cast<double>(k / 2), 0.0);
                  return cplx(0.0, 0.0);
                },
                ModSeq::unbounded, f);
}

/// Explicit finite sequence a_1..a_n.
inline ModSeq make_from_values(std::vector<cplx> values, std::string name = "values") {
  const std::uint64_t h = values.size();
  auto data = std::make_shared<const std::vector<cplx>>(std::move(values));
  return ModSeq(std::move(name), {{"length", h}}, [data](std::uint64_t k) { return (*data)[k - 1]; }, h, SeqFlags{});
}

/// Bounded pseudo-random sequence with |a_k| <= bound, a pure function of (seed, k).
inline ModSeq make_bounded_random(std::uint64_t seed, double bound, bool complex_valued = true) {
  SeqFlags f{false, true, true, PhiFn::identity()};
  return ModSeq("bounded_random", {{"seed", seed}, {"bound", bound}, {"complex", complex_valued}},
                [seed, bound, complex_valued](std::uint64_t k) {
                  // splitmix64 of (seed, k)
                  auto mix = [](std::uint64_t z) {
                    z += 0x9e3779b97f4a7c15ULL;
                    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
                    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
                    return z ^ (z >> 31);
                  };
                  const std::uint64_t h1 = mix(seed * 0x632be59bd9b4e019ULL ^ mix(k));
                  const double r = static_cast<double>(h1 >> 11) * 0x1.0p-53;
                  if (!complex_valued) return cplx(bound * (2.0 * r - 1.0), 0.0);
                  const std::uint64_t h2 = mix(h1);
                  const double t = static_cast<double>(h2 >> 11) * 0x1.0p-53;
                  return bound * r * unit_turns(t);
                },
                ModSeq::unbounded, f);
}

// ---------------------------------------------------------------------------
// Rigidity counterexample
// ---------------------------------------------------------------------------

/// Increasing sequence (k_n) with k_0 = 0, plus the greedy sign policy parameters.
struct RigidityScheme {
  enum class Kind { powers_of_two, polynomial, explicit_list };

  Kind kind = Kind::powers_of_two;
  unsigned degree = 2;                       // polynomial: k_n = n^degree
  std::vector<std::uint64_t> explicit_terms;  // explicit_list
  double delta = 0.1;                        // target band half-width
  bool signs_enabled = true;                 // false: all signs +1

  /// k_1 < k_2 < ... <= horizon.
  std::vector<std::uint64_t> terms(std::uint64_t horizon) const {
    std::vector<std::uint64_t> k;
    switch (kind) {
      case Kind::powers_of_two:
        for (std::uint64_t v = 2; v <= horizon; v *= 2) {
          k.push_back(v);
          if (v > horizon / 2) break;
        }
        break;
      case Kind::polynomial:
        if (degree < 1) throw Error(ErrorCode::invalid_scheme, "polynomial k-sequence needs degree >= 1");
        for (std::uint64_t n = 1;; ++n) {
          u128 v = 1;
          for (unsigned i = 0; i < degree; ++i) v *= n;
          if (v > horizon) break;
          k.push_back(static_cast<std::uint64_t>(v));
        }
        break;
      case Kind::explicit_list:
        for (std::size_t i = 0; i < explicit_terms.size(); ++i) {
          if (explicit_terms[i] == 0 || (i > 0 && explicit_terms[i] <= explicit_terms[i - 1])) {
            throw Error(ErrorCode::invalid_scheme, "k-sequence must be strictly increasing positive integers");
          }
          if (explicit_terms[i] <= horizon) k.push_back(explicit_terms[i]);
        }
        break;
    }
    if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::invalid_scheme, "band delta must lie in (0,1)");
    return k;
  }
};

/// |a_{k_l}| = k_l - k_{l-1}, zero elsewhere, signs chosen greedily: hold the sign of the
/// current target (+1 first) until the Cesaro average at k_l enters [target-delta, target+delta],
/// then switch target. `mu_hat(k)` must be >= 1 - eta at every k_l with l > ramp.
inline ModSeq make_rigidity_counterexample(const RigidityScheme& scheme, std::uint64_t horizon,
                                           const std::function<double(std::uint64_t)>& mu_hat, double eta = 0.05,
                                           std::size_t ramp = 0) {
  const std::vector<std::uint64_t> k = scheme.terms(horizon);
  std::vector<int> signs(k.size(), 1);
  std::vector<std::size_t> flips;
  std::vector<double> averages(k.size());
  int target = 1;
  double cum = 0.0;
  std::uint64_t prev = 0;
  for (std::size_t l = 0; l < k.size(); ++l) {
    const double mh = mu_hat(k[l]);
    if (mh < 0.0 || mh > 1.0 + 1e-12) throw Error(ErrorCode::invalid_argument, "mu_hat values must lie in [0,1]");
    if (l + 1 > ramp && mh < 1.0 - eta) {
      throw Error(ErrorCode::invalid_argument,
                  "mu_hat(" + std::to_string(k[l]) + ") = " + std::to_string(mh) + " is below 1 - eta past the ramp");
    }
    signs[l] = scheme.signs_enabled ? target : 1;
    cum += static_cast<double>(k[l] - prev) * signs[l];
    averages[l] = cum / static_cast<double>(k[l]);
    if (scheme.signs_enabled && std::abs(averages[l] - target) <= scheme.delta) {
      target = -target;
      flips.push_back(l + 1);  // 1-based index of the last term before the switch
    }
    prev = k[l];
  }

  SeqFlags f;
  f.bounded_w1 = true;
  json meta = {{"k", k}, {"signs", signs}, {"flips", flips}, {"averages", averages}};
  json params = {{"delta", scheme.delta}, {"signs_enabled", scheme.signs_enabled}, {"horizon", horizon}};
  switch (scheme.kind) {
    case RigidityScheme::Kind::powers_of_two: params["k"] = "powers_of_two"; break;
    case RigidityScheme::Kind::polynomial: params["k"] = "polynomial", params["degree"] = scheme.degree; break;
    case RigidityScheme::Kind::explicit_list: params["k"] = scheme.explicit_terms; break;
  }
  auto terms = std::make_shared<const std::vector<std::uint64_t>>(k);
  auto sgn = std::make_shared<const std::vector<int>>(std::move(signs));
  return ModSeq("rigidity", std::move(params),
                [terms, sgn](std::uint64_t n) {
                  const auto it = std::lower_bound(terms->begin(), terms->end(), n);
                  if (it == terms->end() || *it != n) return cplx(0.0, 0.0);
                  const auto l = static_cast<std::size_t>(it - terms->begin());
                  const std::uint64_t before = l == 0 ? 0 : (*terms)[l - 1];
                  return cplx(static_cast<double>(n - before) * (*sgn)[l], 0.0);
                },
                horizon, f, std::move(meta));
}

// ---------------------------------------------------------------------------
// Analyzers
// ---------------------------------------------------------------------------

struct SeqCheckpoint {
  std::uint64_t n;
  double abs_mean;     // (1/n) sum |a_k|
  double sq_mean;      // (1/n^2) sum |a_k|^2
  double max_over_n;   // max_{k<=n} |a_k| / n
};

struct SeqStats {
  std::uint64_t horizon = 0;
  std::vector<SeqCheckpoint> rows;

  std::vector<double> abs_mean() const { return column(&SeqCheckpoint::abs_mean); }
  std::vector<double> sq_mean() const { return column(&SeqCheckpoint::sq_mean); }
  std::vector<double> max_over_n() const { return column(&SeqCheckpoint::max_over_n); }

 private:
  std::vector<double> column(double SeqCheckpoint::*field) const {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(r.*field);
    return v;
  }
};

namespace detail {
inline std::vector<std::uint64_t> normalize_grid(std::span<const std::uint64_t> grid, std::uint64_t horizon) {
  std::vector<std::uint64_t> g(grid.begin(), grid.end());
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  if (g.empty()) throw Error(ErrorCode::invalid_argument, "checkpoint grid is empty");
  if (g.front() < 1 || g.back() > horizon) throw Error(ErrorCode::invalid_argument, "checkpoint grid outside [1, H]");
  return g;
}
}  // namespace detail

/// One pass over a_1..a_H, recording the running statistics at each grid point.
inline SeqStats stats_scan(const ModSeq& seq, std::uint64_t horizon, std::span<const std::uint64_t> grid) {
  if (horizon < 1) throw Error(ErrorCode::invalid_horizon, "scan horizon must be >= 1");
  seq.require_horizon(horizon);
  const auto g = detail::normalize_grid(grid, horizon);
  SeqStats stats;
  stats.horizon = horizon;
  stats.rows.reserve(g.size());
  CompensatedSum<double> s1, s2;
  double running_max = 0.0;
  std::size_t next = 0;
  for (std::uint64_t k = 1; k <= g.back(); ++k) {
    const double m = std::abs(seq.value(k));
    s1.add(m);
    s2.add(m * m);
    running_max = std::max(running_max, m);
    if (k == g[next]) {
      const double n = static_cast<double>(k);
      stats.rows.push_back({k, s1.value() / n, s2.value() / (n * n), running_max / n});
      ++next;
    }
  }
  return stats;
}

/// (1/n) sum_{k<=n} |a_k| phi(|a_k|) at each grid point.
inline std::vector<double> wphi_profile(const ModSeq& seq, const PhiFn& phi, std::span<const std::uint64_t> grid) {
  const auto g = detail::normalize_grid(grid, seq.horizon());
  std::vector<double> out;
  out.reserve(g.size());
  CompensatedSum<double> s;
  std::size_t next = 0;
  for (std::uint64_t k = 1; k <= g.back(); ++k) {
    const double m = std::abs(seq.value(k));
    s.add(m * phi(m));
    if (k == g[next]) {
      out.push_back(s.value() / static_cast<double>(k));
      ++next;
    }
  }
  return out;
}

/// sup_{n<=H} (1/n) sum_{k<=n} |a_k| phi(|a_k|).
inline double wphi_supremum(const ModSeq& seq, const PhiFn& phi, std::uint64_t horizon) {
  if (horizon < 1) throw Error(ErrorCode::invalid_horizon, "horizon must be >= 1");
  seq.require_horizon(horizon);
  CompensatedSum<double> s;
  double best = 0.0;
  for (std::uint64_t k = 1; k <= horizon; ++k) {
    const double m = std::abs(seq.value(k));
    s.add(m * phi(m));
    best = std::max(best, s.value() / static_cast<double>(k));
  }
  return best;
}

/// (1/N) sum_{k<=N} a_k conj(lambda)^k.
inline cplx fourier_bohr_estimate(const ModSeq& seq, const Angle& lambda, std::uint64_t n) {
  if (n < 1) throw Error(ErrorCode::invalid_horizon, "N must be >= 1");
  seq.require_horizon(n);
  const Angle conj = lambda.negated();
  CompensatedSum<cplx> s;
  for (std::uint64_t k = 1; k <= n; ++k) {
    const cplx a = seq.value(k);
    if (a != cplx(0.0, 0.0)) s.add(a * conj.times_u(k).unit());
  }
  return s.value() / static_cast<double>(n);
}

struct W1Distance {
  double value = 0.0;  // max over the tail (last third) of the grid
  double last = 0.0;   // value at the final checkpoint
  std::vector<std::uint64_t> grid;
  std::vector<double> profile;
};

/// Finite-horizon proxy for ||a - b||_{W_1} = limsup (1/n) sum |a_k - b_k|.
inline W1Distance w1_distance(const ModSeq& a, const ModSeq& b, std::uint64_t horizon,
                              std::span<const std::uint64_t> grid) {
  a.require_horizon(horizon);
  b.require_horizon(horizon);
  W1Distance d;
  d.grid = detail::normalize_grid(grid, horizon);
  CompensatedSum<double> s;
  std::size_t next = 0;
  for (std::uint64_t k = 1; k <= d.grid.back(); ++k) {
    s.add(std::abs(a.value(k) - b.value(k)));
    if (k == d.grid[next]) {
      d.profile.push_back(s.value() / static_cast<double>(k));
      ++next;
    }
  }
  d.value = tail_max(d.profile);
  d.last = d.profile.back();
  return d;
}

/// b_n with |b_n| = 1/sqrt(j) on [n_j, n_{j+1}) (j = 1 before n_1) and arg b_n = -arg a_n,
/// so that a_n b_n = |a_n b_n|.
inline ModSeq adversarial_slow_decay(const ModSeq& a, std::vector<std::uint64_t> blocks) {
  if (blocks.empty()) throw Error(ErrorCode::invalid_argument, "block list is empty");
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    if (blocks[i] <= blocks[i - 1]) throw Error(ErrorCode::invalid_argument, "blocks must be strictly increasing");
  }
  auto bl = std::make_shared<const std::vector<std::uint64_t>>(std::move(blocks));
  json params = {{"source", a.to_json()}, {"blocks", *bl}};
  return ModSeq("adversarial_slow_decay", std::move(params),
                [a, bl](std::uint64_t n) {
                  const auto j = static_cast<std::size_t>(std::upper_bound(bl->begin(), bl->end(), n) - bl->begin());
                  const double mag = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(j, 1)));
                  const cplx an = a.value(n);
                  const double r = std::abs(an);
                  if (r == 0.0) return cplx(mag, 0.0);
                  return mag * std::conj(an) / r;
                },
                a.horizon(), SeqFlags{});
}

}  // namespace modlab
