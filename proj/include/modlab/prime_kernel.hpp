#pragma once

/**
 * @file prime_kernel.hpp
 * @brief Sieve-backed prime tables, arithmetic weights and exact prime character limits.
 *
 * The table is a bit-packed odds-only sieve of Eratosthenes with a per-word rank
 * array (so pi(N) is one popcount) and the cumulative Chebyshev theta at every prime.
 * Lambda (von Mangoldt) is evaluated on demand by perfect-power detection; Lambda'
 * is log n on primes. The Fourier-Bohr limit of lambda^{Q(p_j)} at a root of unity
 * lambda = e(b/q) is the reduced-residue average
 *
 *     (1/phi(q)) * sum_{0<a<q, (a,q)=1} e(Q(a) b / q),
 *
 * which follows from equidistribution of primes over reduced residues mod q.
 */

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "modlab/angle.hpp"
#include "modlab/error.hpp"
#include "modlab/numeric.hpp"

namespace modlab {

class PrimeTable {
 public:
  /// Largest supported horizon; memory use is about 0.8 bytes per integer at the bound.
  static constexpr std::uint64_t max_horizon = 100'000'000;

  explicit PrimeTable(std::uint64_t horizon) : horizon_(horizon) {
    if (horizon < 2) throw Error(ErrorCode::invalid_horizon, "prime table horizon must be >= 2");
    if (horizon > max_horizon) {
      throw Error(ErrorCode::resource, "prime table horizon " + std::to_string(horizon) + " exceeds bound " +
                                           std::to_string(max_horizon));
    }
    sieve();
    index();
  }

  /// Rebuilds a table from a packed odds bitset (bit i <-> 2i+1), as stored in the cache file.
  static PrimeTable from_odd_bits(std::uint64_t horizon, std::vector<std::uint64_t> bits) {
    PrimeTable t;
    if (horizon < 2 || horizon > max_horizon) throw Error(ErrorCode::invalid_horizon, "bad cached horizon");
    if (bits.size() != word_count(horizon)) throw Error(ErrorCode::parse, "cached bitset has wrong length");
    t.horizon_ = horizon;
    t.odd_bits_ = std::move(bits);
    t.index();
    return t;
  }

  std::uint64_t horizon() const { return horizon_; }
  std::span<const std::uint32_t> primes() const { return primes_; }
  std::span<const std::uint64_t> odd_bits() const { return odd_bits_; }

  bool is_prime(std::uint64_t n) const {
    check_range(n);
    if (n == 2) return true;
    if (n < 2 || (n & 1) == 0) return false;
    const std::uint64_t i = n >> 1;
    return (odd_bits_[i >> 6] >> (i & 63)) & 1;
  }

  /// pi(N) = #{p <= N}.
  std::uint64_t prime_count(std::uint64_t n) const {
    check_range(n);
    if (n < 2) return 0;
    const std::uint64_t idx = (n - 1) >> 1;  // largest odd <= n is 2*idx+1
    const std::uint64_t w = idx >> 6;
    const std::uint64_t mask = (idx & 63) == 63 ? ~0ULL : ((1ULL << ((idx & 63) + 1)) - 1);
    return 1 + rank_[w] + static_cast<std::uint64_t>(std::popcount(odd_bits_[w] & mask));
  }

  /// p_j, 1-based.
  std::uint64_t nth_prime(std::uint64_t j) const {
    if (j < 1 || j > primes_.size()) {
      throw Error(ErrorCode::horizon_exceeded, "prime index " + std::to_string(j) + " outside [1, " +
                                                   std::to_string(primes_.size()) + "]");
    }
    return primes_[j - 1];
  }

  /// theta(n) = sum_{p <= n} log p.
  double theta(std::uint64_t n) const {
    const std::uint64_t c = prime_count(n);
    return c == 0 ? 0.0 : cumulative_theta_[c - 1];
  }

  /// Cumulative theta after the j-th prime (1-based).
  double theta_at_index(std::uint64_t j) const { return j == 0 ? 0.0 : cumulative_theta_.at(j - 1); }

  /// Lambda(n): log p if n = p^k, else 0.
  double von_mangoldt(std::uint64_t n) const {
    check_positive(n);
    if (n == 1) return 0.0;
    if (is_prime(n)) return std::log(static_cast<double>(n));
    for (unsigned k = 2; k < 64; ++k) {
      const std::uint64_t r = integer_root(n, k);
      if (r < 2) break;
      if (ipow_equals(r, k, n) && is_prime(r)) return std::log(static_cast<double>(r));
    }
    return 0.0;
  }

  /// Lambda'(n) = 1_P(n) log n.
  double von_mangoldt_prime(std::uint64_t n) const {
    check_positive(n);
    return is_prime(n) ? std::log(static_cast<double>(n)) : 0.0;
  }

  /// psi(n) = sum_{k <= n} Lambda(k).
  double psi(std::uint64_t n) const {
    check_range(n);
    CompensatedSum<double> s;
    for (std::uint32_t p : primes_) {
      if (p > n) break;
      const double lp = std::log(static_cast<double>(p));
      for (std::uint64_t pk = p; pk <= n; pk *= p) {
        s.add(lp);
        if (pk > n / p) break;
      }
    }
    return s.value();
  }

  /// pi(x; q, a) = #{p <= x : p = a mod q}.
  std::uint64_t prime_count_progression(std::uint64_t x, std::uint64_t q, std::uint64_t a) const {
    if (q == 0) throw Error(ErrorCode::invalid_modulus, "modulus must be positive");
    if (a >= q) throw Error(ErrorCode::invalid_argument, "residue must satisfy 0 <= a < q");
    check_range(x);
    std::uint64_t count = 0;
    for (std::uint32_t p : primes_) {
      if (p > x) break;
      if (p % q == a) ++count;
    }
    return count;
  }

  /// sum_{j <= pi(N)} |1/pi(N) - log p_j / N|: the exact supremum over |b_k| <= 1 of the
  /// gap between the prime average and the Lambda'-weighted average.
  double lambda_prime_uniform_gap(std::uint64_t n) const {
    if (n < 2) throw Error(ErrorCode::domain, "uniform gap needs N >= 2");
    const std::uint64_t count = prime_count(n);
    const double inv_pi = 1.0 / static_cast<double>(count);
    const double inv_n = 1.0 / static_cast<double>(n);
    CompensatedSum<double> s;
    for (std::uint64_t j = 0; j < count; ++j) {
      s.add(std::abs(inv_pi - std::log(static_cast<double>(primes_[j])) * inv_n));
    }
    return s.value();
  }

 private:
  PrimeTable() = default;

  static std::uint64_t word_count(std::uint64_t horizon) { return ((horizon >> 1) >> 6) + 1; }

  void check_range(std::uint64_t n) const {
    if (n > horizon_) {
      throw Error(ErrorCode::horizon_exceeded,
                  std::to_string(n) + " exceeds table horizon " + std::to_string(horizon_));
    }
  }

  void check_positive(std::uint64_t n) const {
    if (n == 0) throw Error(ErrorCode::domain, "arithmetic weights are defined for n >= 1");
    check_range(n);
  }

  void sieve() {
    const std::uint64_t last_idx = horizon_ >> 1;  // odd numbers 1,3,...,2*last_idx+1 (may exceed H by one)
    odd_bits_.assign(word_count(horizon_), ~0ULL);
    // Clear 1 and anything beyond the horizon.
    odd_bits_[0] &= ~1ULL;
    for (std::uint64_t i = last_idx; i < odd_bits_.size() * 64; ++i) {
      if (2 * i + 1 > horizon_) odd_bits_[i >> 6] &= ~(1ULL << (i & 63));
    }
    for (std::uint64_t i = 1; (2 * i + 1) * (2 * i + 1) <= horizon_; ++i) {
      if (!((odd_bits_[i >> 6] >> (i & 63)) & 1)) continue;
      const std::uint64_t p = 2 * i + 1;
      for (std::uint64_t m = p * p; m <= horizon_; m += 2 * p) {
        const std::uint64_t j = m >> 1;
        odd_bits_[j >> 6] &= ~(1ULL << (j & 63));
      }
    }
  }

  void index() {
    rank_.assign(odd_bits_.size(), 0);
    std::uint32_t running = 0;
    for (std::size_t w = 0; w < odd_bits_.size(); ++w) {
      rank_[w] = running;
      running += static_cast<std::uint32_t>(std::popcount(odd_bits_[w]));
    }
    primes_.clear();
    primes_.reserve(running + 1);
    primes_.push_back(2);
    for (std::size_t w = 0; w < odd_bits_.size(); ++w) {
      std::uint64_t word = odd_bits_[w];
      while (word != 0) {
        const int b = std::countr_zero(word);
        primes_.push_back(static_cast<std::uint32_t>(2 * (w * 64 + static_cast<std::uint64_t>(b)) + 1));
        word &= word - 1;
      }
    }
    cumulative_theta_.resize(primes_.size());
    CompensatedSum<double> s;
    for (std::size_t j = 0; j < primes_.size(); ++j) {
      s.add(std::log(static_cast<double>(primes_[j])));
      cumulative_theta_[j] = s.value();
    }
  }

  static std::uint64_t integer_root(std::uint64_t n, unsigned k) {
    auto r = static_cast<std::uint64_t>(std::pow(static_cast<double>(n), 1.0 / k));
    while (r > 0 && !ipow_le(r, k, n)) --r;
    while (ipow_le(r + 1, k, n)) ++r;
    return r;
  }

  static bool ipow_le(std::uint64_t r, unsigned k, std::uint64_t n) {
    u128 acc = 1;
    for (unsigned i = 0; i < k; ++i) {
      acc *= r;
      if (acc > n) return false;
    }
    return true;
  }

  static bool ipow_equals(std::uint64_t r, unsigned k, std::uint64_t n) {
    u128 acc = 1;
    for (unsigned i = 0; i < k; ++i) {
      acc *= r;
      if (acc > n) return false;
    }
    return acc == n;
  }

  std::uint64_t horizon_ = 0;
  std::vector<std::uint64_t> odd_bits_;
  std::vector<std::uint32_t> rank_;
  std::vector<std::uint32_t> primes_;
  std::vector<double> cumulative_theta_;
};

/// Polynomial with nonnegative integer coefficients (constant term first), degree >= 1.
class PolyNN {
 public:
  explicit PolyNN(std::vector<std::uint64_t> coefficients) : coeffs_(std::move(coefficients)) {
    while (!coeffs_.empty() && coeffs_.back() == 0) coeffs_.pop_back();
    if (coeffs_.size() < 2) throw Error(ErrorCode::invalid_argument, "polynomial must have degree >= 1");
  }

  static PolyNN identity() { return PolyNN({0, 1}); }
  static PolyNN monomial(unsigned degree) {
    std::vector<std::uint64_t> c(degree + 1, 0);
    c.back() = 1;
    return PolyNN(std::move(c));
  }

  std::size_t degree() const { return coeffs_.size() - 1; }
  std::span<const std::uint64_t> coefficients() const { return coeffs_; }

  /// Q(x); throws on overflow past 2^64 - 1.
  std::uint64_t operator()(std::uint64_t x) const {
    u128 acc = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
      acc = acc * x + *it;
      if (acc > std::numeric_limits<std::uint64_t>::max()) {
        throw Error(ErrorCode::domain, "polynomial value overflows 64 bits at x=" + std::to_string(x));
      }
    }
    return static_cast<std::uint64_t>(acc);
  }

  /// Q(x) mod q, exact for any x.
  std::uint64_t eval_mod(std::uint64_t x, std::uint64_t q) const {
    const u128 xm = x % q;
    u128 acc = 0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = (acc * xm + (*it % q)) % q;
    return static_cast<std::uint64_t>(acc);
  }

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      if (coeffs_[i] == 0) continue;
      if (!s.empty()) s += "+";
      if (i == 0 || coeffs_[i] != 1) s += std::to_string(coeffs_[i]);
      if (i >= 1) s += "t";
      if (i >= 2) s += "^" + std::to_string(i);
    }
    return s;
  }

 private:
  std::vector<std::uint64_t> coeffs_;
};

/// Li(x) = int_2^x dt / log t by adaptive 15-point Gauss-Kronrod on u = log t.
inline double log_integral(double x, double rel_tol = 1e-12) {
  if (!(x >= 2.0)) throw Error(ErrorCode::domain, "log integral needs x >= 2");
  if (x == 2.0) return 0.0;
  static constexpr std::array<double, 8> xk = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> wk = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

  const auto f = [](double u) { return std::exp(u) / u; };
  struct Piece {
    double a, b, kronrod, error;
  };
  const auto rule = [&](double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double k = wk[7] * fc;
    double g = wg[3] * fc;
    for (int i = 0; i < 7; ++i) {
      const double s = f(c - h * xk[i]) + f(c + h * xk[i]);
      k += wk[i] * s;
      if (i % 2 == 1) g += wg[i / 2] * s;
    }
    return Piece{a, b, k * h, std::abs((k - g) * h)};
  };

  std::vector<Piece> pieces{rule(std::log(2.0), std::log(x))};
  for (int iter = 0; iter < 10000; ++iter) {
    double total = 0.0, err = 0.0;
    for (const auto& p : pieces) {
      total += p.kronrod;
      err += p.error;
    }
    if (err <= rel_tol * std::abs(total)) break;
    auto worst = std::max_element(pieces.begin(), pieces.end(),
                                  [](const Piece& l, const Piece& r) { return l.error < r.error; });
    const double mid = 0.5 * (worst->a + worst->b);
    const Piece left = rule(worst->a, mid);
    const Piece right = rule(mid, worst->b);
    *worst = left;
    pieces.push_back(right);
  }
  CompensatedSum<double> s;
  for (const auto& p : pieces) s.add(p.kronrod);
  return s.value();
}

/// Exact limit of (1/n) sum_{j<=n} lambda^{Q(p_j)} at lambda = e(b/q), gcd(b, q) = 1.
inline cplx fourier_bohr_exact(std::uint64_t q, std::int64_t b, const PolyNN& poly) {
  if (q == 0) throw Error(ErrorCode::invalid_modulus, "q must be positive");
  const auto qq = static_cast<i128>(q);
  i128 br = static_cast<i128>(b) % qq;
  if (br < 0) br += qq;
  const auto bred = static_cast<std::uint64_t>(br);
  if (gcd_u64(bred, q) != 1) {
    throw Error(ErrorCode::non_primitive, "b/q = " + std::to_string(b) + "/" + std::to_string(q) +
                                              " is not reduced; reduce before asking for the limit");
  }
  if (q == 1) return {1.0, 0.0};
  CompensatedSum<cplx> s;
  std::uint64_t count = 0;
  for (std::uint64_t a = 1; a < q; ++a) {
    if (gcd_u64(a, q) != 1) continue;
    const std::uint64_t qa = poly.eval_mod(a, q);
    const auto num = static_cast<std::uint64_t>((static_cast<u128>(qa) * bred) % q);
    s.add(Angle::rational(static_cast<std::int64_t>(num), q).unit());
    ++count;
  }
  return s.value() / static_cast<double>(count);
}

}  // namespace modlab
