#pragma once

// Independent reference computations for the tests. Nothing here calls into modlab.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <vector>

namespace oracle {

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

inline std::vector<std::uint64_t> primes_upto(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t k = 2; k <= n; ++k) {
    if (is_prime(k)) out.push_back(k);
  }
  return out;
}

/// log p if n = p^k, else 0, by factoring.
inline double von_mangoldt(std::uint64_t n) {
  if (n < 2) return 0.0;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) {
      while (n % d == 0) n /= d;
      return n == 1 ? std::log(static_cast<double>(d)) : 0.0;
    }
  }
  return std::log(static_cast<double>(n));
}

/// li(x) - li(2) from the series li(x) = gamma + log log x + sum (log x)^k / (k k!).
inline double log_integral(double x) {
  constexpr long double gamma = 0.577215664901532860606512090082402431L;
  constexpr long double li2 = 1.04516378011749278484458888919461313L;
  const long double u = std::log(static_cast<long double>(x));
  long double term = 1.0L;  // u^k / k!
  long double sum = 0.0L;
  for (int k = 1; k < 400; ++k) {
    term *= u / k;
    sum += term / k;
    if (term / k < 1e-22L * sum) break;
  }
  return static_cast<double>(gamma + std::log(u) + sum - li2);
}

/// (1/phi(q)) sum over reduced residues a of e(b Q(a) / q), straight from the definition.
/// Q is given by coefficients (constant first); evaluated with plain integer arithmetic.
inline std::complex<double> residue_average(std::uint64_t q, std::int64_t b, const std::vector<std::uint64_t>& poly) {
  long double re = 0.0L;
  long double im = 0.0L;
  std::uint64_t count = 0;
  for (std::uint64_t a = 1; a <= q; ++a) {
    if (std::gcd(a, q) != 1) continue;
    std::uint64_t v = 0;
    std::uint64_t pw = 1;
    for (std::uint64_t c : poly) {
      v += c * pw;
      pw *= a;
    }
    const std::int64_t r = ((static_cast<std::int64_t>(v % q) * b) % static_cast<std::int64_t>(q) +
                            static_cast<std::int64_t>(q)) % static_cast<std::int64_t>(q);
    const long double ang = 2.0L * 3.141592653589793238462643383279502884L * r / q;
    re += std::cos(ang);
    im += std::sin(ang);
    ++count;
  }
  return {static_cast<double>(re / count), static_cast<double>(im / count)};
}

/// #{(k1,k2,k3,k4) in [1,n]^4 : k1 + k2 = k3 + k4} by direct enumeration over three indices.
inline std::uint64_t additive_quadruples(std::int64_t n) {
  std::uint64_t count = 0;
  for (std::int64_t a = 1; a <= n; ++a) {
    for (std::int64_t b = 1; b <= n; ++b) {
      for (std::int64_t c = 1; c <= n; ++c) {
        const std::int64_t d = a + b - c;
        if (d >= 1 && d <= n) ++count;
      }
    }
  }
  return count;
}

}  // namespace oracle
