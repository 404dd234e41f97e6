#pragma once

// Streaming ergodic averages of T^k x:
//   cesaro      (1/N) sum_{k<=N} T^k x
//   modulated   (1/N) sum_{k<=N} a_k T^k x
//   prime       (1/pi(N)) sum_{p<=N} T^p x
//   prime_log   (1/N) sum_{p<=N} log(p) T^p x
//   prime_poly  (1/pi(N)) sum_{p<=N} T^{Q(p)} x
// plus the spectral prediction of their limits and a convergence detector.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "modlab/angle.hpp"
#include "modlab/error.hpp"
#include "modlab/mod_sequences.hpp"
#include "modlab/numeric.hpp"
#include "modlab/operator_zoo.hpp"
#include "modlab/prime_kernel.hpp"

namespace modlab {

struct AverageScheme {
  enum class Kind { cesaro, modulated, prime, prime_log, prime_poly };

  Kind kind = Kind::cesaro;
  std::optional<ModSeq> seq;
  std::optional<PolyNN> poly;

  static AverageScheme cesaro() { return {Kind::cesaro, std::nullopt, std::nullopt}; }
  static AverageScheme modulated(ModSeq a) { return {Kind::modulated, std::move(a), std::nullopt}; }
  static AverageScheme prime() { return {Kind::prime, std::nullopt, std::nullopt}; }
  static AverageScheme prime_log() { return {Kind::prime_log, std::nullopt, std::nullopt}; }
  static AverageScheme prime_poly(PolyNN q) { return {Kind::prime_poly, std::nullopt, std::move(q)}; }

  bool needs_table() const { return kind == Kind::prime || kind == Kind::prime_log || kind == Kind::prime_poly; }

  /// prime and prime_poly divide by the number of primes seen, the rest by N.
  bool divides_by_prime_count() const { return kind == Kind::prime || kind == Kind::prime_poly; }

  std::string name() const {
    switch (kind) {
      case Kind::cesaro: return "cesaro";
      case Kind::modulated: return "modulated";
      case Kind::prime: return "prime";
      case Kind::prime_log: return "prime_log";
      case Kind::prime_poly: return "prime_poly";
    }
    return "?";
  }

  json to_json() const {
    json j{{"kind", name()}};
    if (seq) j["sequence"] = seq->to_json();
    if (poly) j["poly"] = poly->coefficients();
    return j;
  }
};

/// Neumaier-compensated running sum of vectors (each real lane compensated separately).
class VectorSum {
 public:
  explicit VectorSum(Eigen::Index n) : sum_(2 * n, 0.0), comp_(2 * n, 0.0) {}

  void add(const Vector& v, cplx w = cplx(1.0, 0.0)) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const cplx term = w * v(i);
      lane(2 * static_cast<std::size_t>(i), term.real());
      lane(2 * static_cast<std::size_t>(i) + 1, term.imag());
    }
  }

  void add_at(Eigen::Index i, cplx term) {
    lane(2 * static_cast<std::size_t>(i), term.real());
    lane(2 * static_cast<std::size_t>(i) + 1, term.imag());
  }

  Vector value() const {
    Vector out(static_cast<Eigen::Index>(sum_.size() / 2));
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      const auto j = 2 * static_cast<std::size_t>(i);
      out(i) = cplx(sum_[j] + comp_[j], sum_[j + 1] + comp_[j + 1]);
    }
    return out;
  }

 private:
  void lane(std::size_t j, double x) {
    const double s = sum_[j];
    const double t = s + x;
    comp_[j] += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    sum_[j] = t;
  }

  std::vector<double> sum_;
  std::vector<double> comp_;
};

/// lambda * Q(p) as an exact angle (Q(p) reduced modulo q or 2^128).
inline Angle poly_multiple(const Angle& lambda, const PolyNN& q, std::uint64_t p) {
  if (lambda.is_rational()) {
    const std::uint64_t den = lambda.denominator();
    const u128 r = static_cast<u128>(lambda.numerator() % den) * q.eval_mod(p, den) % den;
    return Angle::rational(static_cast<std::int64_t>(r), den);
  }
  u128 acc = 0;
  const auto& c = q.coefficients();
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * p + c[i];
  return Angle::from_fixed(lambda.fixed() * acc);
}

struct TracePoint {
  std::uint64_t n = 0;
  Vector average;
  double norm = 0.0;
};

struct Trace {
  std::vector<TracePoint> points;
  std::vector<double> weights;  // inner-product weights; empty for the Euclidean norm

  double distance(const Vector& a, const Vector& b) const {
    if (weights.empty()) return (a - b).norm();
    double s = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) s += weights[static_cast<std::size_t>(i)] * std::norm(a(i) - b(i));
    return std::sqrt(s);
  }

  std::vector<double> norms() const {
    std::vector<double> out;
    for (const auto& p : points) out.push_back(p.norm);
    return out;
  }
};

class AverageEngine {
 public:
  using OperatorPtr = std::shared_ptr<const Operator>;

  AverageEngine(AverageScheme scheme, OperatorPtr op, Vector x, TablePtr table = nullptr)
      : scheme_(std::move(scheme)), op_(std::move(op)), x_(std::move(x)), table_(std::move(table)),
        sum_(static_cast<Eigen::Index>(x_.size())) {
    if (!op_) throw Error(ErrorCode::invalid_argument, "engine needs an operator");
    if (static_cast<std::size_t>(x_.size()) != op_->dim()) {
      throw Error(ErrorCode::dim_mismatch, "vector has dimension " + std::to_string(x_.size()) + ", operator " +
                                               std::to_string(op_->dim()));
    }
    if (scheme_.needs_table() && !table_) {
      throw Error(ErrorCode::missing_table, scheme_.name() + " averages need a prime table");
    }
    orbit_ = x_;
    if (const auto ph = op_->phases()) {
      step_.resize(x_.size());
      for (Eigen::Index i = 0; i < x_.size(); ++i) step_(i) = (*ph)[static_cast<std::size_t>(i)].unit();
    }
    if (op_->as<TruncatedShift>()) {
      validity_ = validity_horizon(*op_, x_);
      for (Eigen::Index i = 0; i < x_.size(); ++i) {
        if (x_(i) != cplx(0.0, 0.0)) support_.push_back(i);
      }
    }
  }

  const AverageScheme& scheme() const { return scheme_; }
  const Operator& op() const { return *op_; }
  const Vector& x() const { return x_; }

  /// Current N (largest exponent index processed).
  std::uint64_t position() const { return n_; }

  /// Number of terms in the denominator so far.
  std::uint64_t denominator() const { return scheme_.divides_by_prime_count() ? primes_seen_ : n_; }

  /// Accumulated float bound on the orbit error: (applies performed) * machine epsilon.
  double orbit_error_bound() const { return static_cast<double>(applies_) * 2.220446049250313e-16; }

  Vector sum() const { return sum_.value(); }

  Vector average() const {
    const std::uint64_t d = denominator();
    if (d == 0) return Vector::Zero(x_.size());
    return sum_.value() / static_cast<double>(d);
  }

  double average_norm() const { return norm(*op_, average()); }

  void advance(std::uint64_t steps) {
    if (steps < 1) throw Error(ErrorCode::invalid_argument, "advance needs steps >= 1");
    const std::uint64_t target = n_ + steps;
    if (scheme_.needs_table() && target > table_->horizon()) {
      throw Error(ErrorCode::horizon_exceeded, "N = " + std::to_string(target) + " exceeds the prime table horizon " +
                                                   std::to_string(table_->horizon()));
    }
    if (scheme_.kind == AverageScheme::Kind::modulated) scheme_.seq->require_horizon(target);
    switch (scheme_.kind) {
      case AverageScheme::Kind::cesaro:
      case AverageScheme::Kind::modulated: advance_every(target); break;
      case AverageScheme::Kind::prime:
      case AverageScheme::Kind::prime_log: advance_primes(target); break;
      case AverageScheme::Kind::prime_poly: advance_poly(target); break;
    }
    n_ = target;
  }

  void advance_to(std::uint64_t n) {
    if (n > n_) advance(n - n_);
  }

  /// Advances through `grid` (increasing), recording a checkpoint at each entry.
  Trace run(std::span<const std::uint64_t> grid) {
    Trace t;
    if (const auto w = op_->weights()) t.weights.assign(w->begin(), w->end());
    for (std::uint64_t n : grid) {
      if (n <= n_ && !t.points.empty()) continue;
      advance_to(n);
      t.points.push_back({n_, average(), average_norm()});
    }
    return t;
  }

 private:
  void check_window(std::uint64_t k) const {
    if (k > validity_) {
      throw Error(ErrorCode::window_exceeded, "truncated shift is exact only up to exponent " +
                                                  std::to_string(validity_) + ", reached " + std::to_string(k) +
                                                  "; shrink the horizon or enlarge the window");
    }
  }

  // Orbit T^k x for exponent k, jumping directly when possible.
  Vector jump(std::uint64_t k) {
    if (const auto ph = op_->phases()) {
      Vector y(x_.size());
      for (Eigen::Index i = 0; i < x_.size(); ++i) y(i) = (*ph)[static_cast<std::size_t>(i)].times_u(k).unit() * x_(i);
      return y;
    }
    if (op_->as<TruncatedShift>()) {
      check_window(k);
      return detail::shift_by(x_, k);
    }
    // dense: continue from the cached orbit
    if (k < orbit_k_) {
      orbit_ = x_;
      orbit_k_ = 0;
    }
    const std::uint64_t gap = k - orbit_k_;
    orbit_ = apply_power(*op_, orbit_, gap);
    applies_ += gap <= 64 ? gap : 2 * static_cast<std::uint64_t>(std::bit_width(gap));
    orbit_k_ = k;
    return orbit_;
  }

  // One step of the orbit: v <- T v.
  void step_orbit() {
    if (step_.size()) {
      orbit_ = orbit_.cwiseProduct(step_);
    } else if (op_->as<TruncatedShift>()) {
      check_window(orbit_k_ + 1);
      orbit_ = detail::shift_by(orbit_, 1);
    } else {
      orbit_ = op_->as<DenseContraction>()->matrix * orbit_;
    }
    ++orbit_k_;
    ++applies_;
  }

  void advance_every(std::uint64_t target) {
    if (op_->as<TruncatedShift>()) {
      // only the support of x moves; the orbit is never materialized
      for (std::uint64_t k = n_ + 1; k <= target; ++k) {
        check_window(k);
        const cplx a = scheme_.kind == AverageScheme::Kind::cesaro ? cplx(1.0, 0.0) : scheme_.seq->value(k);
        if (a == cplx(0.0, 0.0)) continue;
        for (Eigen::Index i : support_) sum_.add_at(i + static_cast<Eigen::Index>(k), a * x_(i));
      }
      return;
    }
    for (std::uint64_t k = n_ + 1; k <= target; ++k) {
      step_orbit();
      if (scheme_.kind == AverageScheme::Kind::cesaro) {
        sum_.add(orbit_);
      } else {
        const cplx a = scheme_.seq->value(k);
        if (a != cplx(0.0, 0.0)) sum_.add(orbit_, a);
      }
    }
  }

  void advance_primes(std::uint64_t target) {
    const auto primes = table_->primes();
    while (primes_seen_ < primes.size() && primes[primes_seen_] <= target) {
      const std::uint64_t p = primes[primes_seen_];
      Vector v;
      if (step_.size()) {
        v = jump(p);
      } else {
        while (orbit_k_ < p) step_orbit();
        v = orbit_;
      }
      if (scheme_.kind == AverageScheme::Kind::prime) {
        sum_.add(v);
      } else {
        sum_.add(v, cplx(std::log(static_cast<double>(p)), 0.0));
      }
      ++primes_seen_;
    }
  }

  void advance_poly(std::uint64_t target) {
    const auto primes = table_->primes();
    const PolyNN& q = *scheme_.poly;
    while (primes_seen_ < primes.size() && primes[primes_seen_] <= target) {
      const std::uint64_t p = primes[primes_seen_];
      Vector v;
      if (const auto ph = op_->phases()) {
        v.resize(x_.size());
        for (Eigen::Index i = 0; i < x_.size(); ++i) {
          v(i) = poly_multiple((*ph)[static_cast<std::size_t>(i)], q, p).unit() * x_(i);
        }
      } else {
        v = jump(q(p));
      }
      sum_.add(v);
      ++primes_seen_;
    }
  }

  AverageScheme scheme_;
  OperatorPtr op_;
  Vector x_;
  TablePtr table_;
  VectorSum sum_;
  Vector orbit_;
  Vector step_;
  std::vector<Eigen::Index> support_;
  std::uint64_t orbit_k_ = 0;
  std::uint64_t n_ = 0;
  std::uint64_t primes_seen_ = 0;
  std::uint64_t applies_ = 0;
  std::uint64_t validity_ = std::numeric_limits<std::uint64_t>::max();
};

inline AverageEngine engine_new(AverageScheme scheme, std::shared_ptr<const Operator> op, Vector x,
                                TablePtr table = nullptr) {
  return AverageEngine(std::move(scheme), std::move(op), std::move(x), std::move(table));
}

// ---------------------------------------------------------------------------
// Spectral limit prediction
// ---------------------------------------------------------------------------

/// Limit weight c(lambda) attached to a scheme, or nullopt when the scheme has no prediction.
inline std::optional<cplx> limit_weight(const AverageScheme& scheme, const Angle& lambda, std::uint64_t max_order) {
  const auto root = lambda.as_root_of_unity(max_order);
  switch (scheme.kind) {
    case AverageScheme::Kind::cesaro:
      return root && root->second == 1 ? cplx(1.0, 0.0) : cplx(0.0, 0.0);
    case AverageScheme::Kind::modulated:
      if (scheme.seq->generator() != "von_mangoldt") return std::nullopt;
      [[fallthrough]];
    case AverageScheme::Kind::prime:
    case AverageScheme::Kind::prime_log:
      if (!root) return cplx(0.0, 0.0);
      return fourier_bohr_exact(root->second, static_cast<std::int64_t>(root->first), PolyNN::identity());
    case AverageScheme::Kind::prime_poly:
      if (!root) return cplx(0.0, 0.0);
      return fourier_bohr_exact(root->second, static_cast<std::int64_t>(root->first), *scheme.poly);
  }
  return std::nullopt;
}

/// sum_i c(lambda_i) P_i x; eigenvalues that are not roots of unity of order <= max_order,
/// and the residual subspace, contribute 0.
inline std::optional<Vector> predict_limit(const SpectralDecomp& decomp, const AverageScheme& scheme, const Vector& x,
                                           std::uint64_t max_order = 1000) {
  if (static_cast<std::size_t>(x.size()) != decomp.dim) throw Error(ErrorCode::dim_mismatch, "vector/decomposition");
  Vector out = Vector::Zero(x.size());
  for (std::size_t i = 0; i < decomp.components.size(); ++i) {
    const auto c = limit_weight(scheme, decomp.components[i].lambda, max_order);
    if (!c) return std::nullopt;
    if (*c != cplx(0.0, 0.0)) out += *c * decomp.project(i, x);
  }
  return out;
}

/// Convenience overload; nullopt when the operator has no supported decomposition.
inline std::optional<Vector> predict_limit(const Operator& op, const AverageScheme& scheme, const Vector& x,
                                           std::uint64_t max_order = 1000, double tol = 1e-8) {
  try {
    return predict_limit(spectral_decompose(op, tol), scheme, x, max_order);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::unsupported_decomposition) return std::nullopt;
    throw;
  }
}

// ---------------------------------------------------------------------------
// Convergence detection
// ---------------------------------------------------------------------------

struct ConvergenceParams {
  double tol = 1e-3;
  std::size_t window = 6;
  double separation = 1e-2;
  std::size_t revisits = 3;
};

struct ConvergenceReport {
  enum class Status { converged, oscillating, inconclusive };
  Status status = Status::inconclusive;
  Vector limit;                 // converged: last checkpoint average
  double radius = 0.0;          // converged: max pairwise distance over the last w checkpoints
  std::uint64_t witness_a = 0;  // oscillating: checkpoint indices N of the two cluster seeds
  std::uint64_t witness_b = 0;
  std::size_t visits_a = 0;
  std::size_t visits_b = 0;
  double separation = 0.0;
  std::string reason;
  ConvergenceParams params;

  std::string status_name() const {
    switch (status) {
      case Status::converged: return "converged";
      case Status::oscillating: return "oscillating";
      case Status::inconclusive: return "inconclusive";
    }
    return "?";
  }

  json to_json() const {
    json j{{"status", status_name()},
           {"params", {{"tol", params.tol}, {"window", params.window}, {"separation", params.separation},
                       {"revisits", params.revisits}}}};
    if (status == Status::converged) {
      j["radius"] = radius;
      j["limit"] = json::array();
      for (Eigen::Index i = 0; i < limit.size(); ++i) j["limit"].push_back({limit(i).real(), limit(i).imag()});
    } else if (status == Status::oscillating) {
      j["separation"] = separation;
      j["witness"] = {{"n_a", witness_a}, {"n_b", witness_b}, {"visits_a", visits_a}, {"visits_b", visits_b}};
    } else {
      j["reason"] = reason;
    }
    return j;
  }
};

/// Converged when the last w checkpoints are pairwise within tol. Otherwise the farthest pair
/// over the tail half seeds two clusters (radius a quarter of their distance); oscillating
/// when the seeds are >= separation apart and each cluster has >= revisits members.
inline ConvergenceReport detect_convergence(const Trace& trace, ConvergenceParams params = {}) {
  ConvergenceReport r;
  r.params = params;
  const auto& pts = trace.points;
  if (params.window < 1 || pts.size() < params.window) {
    r.reason = "trace has " + std::to_string(pts.size()) + " checkpoints, need " + std::to_string(params.window);
    return r;
  }
  double radius = 0.0;
  for (std::size_t i = pts.size() - params.window; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      radius = std::max(radius, trace.distance(pts[i].average, pts[j].average));
    }
  }
  if (radius <= params.tol) {
    r.status = ConvergenceReport::Status::converged;
    r.limit = pts.back().average;
    r.radius = radius;
    return r;
  }
  const std::size_t start = pts.size() / 2;
  double best = -1.0;
  std::size_t bi = start;
  std::size_t bj = start;
  for (std::size_t i = start; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double d = trace.distance(pts[i].average, pts[j].average);
      if (d > best) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  }
  if (best >= params.separation) {
    std::size_t va = 0;
    std::size_t vb = 0;
    std::size_t switches = 0;
    int side = 0;
    for (std::size_t k = start; k < pts.size(); ++k) {
      const bool near_a = trace.distance(pts[k].average, pts[bi].average) <= best / 4;
      const bool near_b = trace.distance(pts[k].average, pts[bj].average) <= best / 4;
      va += near_a;
      vb += near_b;
      const int now = near_a ? 1 : (near_b ? 2 : 0);
      if (now != 0 && side != 0 && now != side) ++switches;
      if (now != 0) side = now;
    }
    // a drift passes from one cluster to the other once; oscillation has to come back
    if (va >= params.revisits && vb >= params.revisits && switches >= 2) {
      r.status = ConvergenceReport::Status::oscillating;
      r.witness_a = pts[bi].n;
      r.witness_b = pts[bj].n;
      r.visits_a = va;
      r.visits_b = vb;
      r.separation = best;
      return r;
    }
  }
  r.reason = "tail spread " + std::to_string(radius) + " exceeds tol without a revisited pair of clusters";
  return r;
}

// ---------------------------------------------------------------------------
// Prime vs log-weighted prime vs von Mangoldt averages
// ---------------------------------------------------------------------------

struct ThreeAverageGap {
  std::uint64_t n = 0;
  double gap_prime_vs_log = 0.0;
  double cert_prime_vs_log = 0.0;
  double gap_log_vs_full = 0.0;
  double cert_log_vs_full = 0.0;
  double power_bound = 1.0;
  Vector prime_average;
  Vector log_average;
  Vector full_average;
};

/// Measured distances between the three averages at N, with the certificates
/// M ||x|| sum_p |1/pi(N) - log p / N| and M ||x|| (psi(N) - theta(N)) / N.
inline ThreeAverageGap three_average_gap(std::shared_ptr<const Operator> op, const Vector& x, const PrimeTable& table,
                                         std::uint64_t n) {
  if (n < 2) throw Error(ErrorCode::domain, "three-average gap needs N >= 2");
  if (n > table.horizon()) {
    throw Error(ErrorCode::horizon_exceeded, "N exceeds the prime table horizon " + std::to_string(table.horizon()));
  }
  detail::check_dim(*op, x);
  VectorSum prime(x.size());
  VectorSum logp(x.size());
  VectorSum full(x.size());
  const bool diagonal = op->phases().has_value();
  const std::uint64_t validity = validity_horizon(*op, x);
  Vector v = x;
  std::uint64_t vk = 0;
  for (std::uint64_t k = 2; k <= n; ++k) {
    const double lam = table.von_mangoldt(k);
    if (lam == 0.0) continue;
    if (k > validity) throw Error(ErrorCode::window_exceeded, "truncated shift window exceeded at exponent " + std::to_string(k));
    if (diagonal || op->as<TruncatedShift>()) {
      v = apply_power(*op, x, k);
    } else {
      v = apply_power(*op, v, k - vk);
    }
    vk = k;
    full.add(v, cplx(lam, 0.0));
    if (table.is_prime(k)) {
      prime.add(v);
      logp.add(v, cplx(lam, 0.0));
    }
  }
  ThreeAverageGap g;
  g.n = n;
  g.power_bound = op->power_bound();
  g.prime_average = prime.value() / static_cast<double>(table.prime_count(n));
  g.log_average = logp.value() / static_cast<double>(n);
  g.full_average = full.value() / static_cast<double>(n);
  g.gap_prime_vs_log = norm(*op, g.prime_average - g.log_average);
  g.gap_log_vs_full = norm(*op, g.log_average - g.full_average);
  const double xn = norm(*op, x);
  g.cert_prime_vs_log = g.power_bound * xn * table.lambda_prime_uniform_gap(n);
  g.cert_log_vs_full =
      g.power_bound * xn * (table.psi(n) - table.theta(n)) / static_cast<double>(n);
  return g;
}

}  // namespace modlab
