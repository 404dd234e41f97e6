#pragma once

// Exact angle arithmetic on the circle R/Z.
//
// An Angle t in [0,1) stands for the unimodular number e^{2 pi i t}. Two
// representations are kept:
//   * rational b/q (reduced), multiplied by integers with exact modular arithmetic;
//   * 128-bit binary fixed point, multiplied by integers with wrapping unsigned
//     arithmetic, which is exact modulo 1.
// Every finite double in [0,1) is a dyadic rational with at most 53 significant
// bits, so it converts to the fixed-point form without rounding. Powers
// lambda^k are therefore computed by argument reduction, never by repeated
// multiplication, and do not drift off the circle.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

#include "modlab/error.hpp"
#include "modlab/numeric.hpp"

namespace modlab {

using u128 = unsigned __int128;
using i128 = __int128;

class Angle {
 public:
  Angle() = default;

  /// b/q reduced mod 1. q = 0 is rejected.
  static Angle rational(std::int64_t b, std::uint64_t q) {
    if (q == 0) throw Error(ErrorCode::invalid_modulus, "angle denominator must be positive");
    const auto qq = static_cast<i128>(q);
    i128 r = static_cast<i128>(b) % qq;
    if (r < 0) r += qq;
    auto num = static_cast<std::uint64_t>(r);
    const std::uint64_t g = gcd_u64(num, q);
    Angle a;
    a.rational_ = true;
    a.num_ = (num == 0) ? 0 : num / g;
    a.den_ = (num == 0) ? 1 : q / g;
    return a;
  }

  /// Exact conversion of a double (taken mod 1).
  static Angle from_turns(double t) {
    if (!std::isfinite(t)) throw Error(ErrorCode::domain, "angle must be finite");
    double r = t - std::floor(t);
    if (r >= 1.0) r = 0.0;
    Angle a;
    a.rational_ = false;
    if (r == 0.0) {
      a.frac_ = 0;
      return a;
    }
    int e = 0;
    const double m = std::frexp(r, &e);  // r = m * 2^e, m in [0.5, 1)
    const auto mant = static_cast<std::uint64_t>(std::ldexp(m, 53));  // exact 53-bit integer
    const int shift = e - 53 + 128;
    if (shift >= 0) {
      a.frac_ = static_cast<u128>(mant) << shift;
    } else if (shift > -64) {
      a.frac_ = static_cast<u128>(mant) >> (-shift);
    } else {
      a.frac_ = 0;
    }
    return a;
  }

  static Angle from_fixed(u128 frac) {
    Angle a;
    a.rational_ = false;
    a.frac_ = frac;
    return a;
  }

  bool is_rational() const { return rational_; }
  std::uint64_t numerator() const { return num_; }
  std::uint64_t denominator() const { return den_; }
  u128 fixed() const { return rational_ ? to_fixed_round() : frac_; }

  /// k * t mod 1, exact.
  Angle times(std::int64_t k) const {
    if (rational_) {
      const auto q = static_cast<i128>(den_);
      i128 kk = static_cast<i128>(k) % q;
      if (kk < 0) kk += q;
      const i128 r = (kk * static_cast<i128>(num_)) % q;
      Angle a;
      a.rational_ = true;
      a.num_ = static_cast<std::uint64_t>(r);
      a.den_ = den_;
      if (a.num_ == 0) a.den_ = 1;
      return a;
    }
    return from_fixed(static_cast<u128>(static_cast<i128>(k)) * frac_);
  }

  /// Same as times() for unsigned exponents beyond int64 range.
  Angle times_u(std::uint64_t k) const {
    if (rational_) {
      const std::uint64_t kk = k % den_;
      const auto r = static_cast<std::uint64_t>((static_cast<u128>(kk) * num_) % den_);
      Angle a;
      a.rational_ = true;
      a.num_ = r;
      a.den_ = (r == 0) ? 1 : den_;
      return a;
    }
    return from_fixed(static_cast<u128>(k) * frac_);
  }

  /// t/3 for t in [0,1) (not a group operation: the representative in [0,1) is divided).
  Angle third() const {
    if (rational_) return rational(static_cast<std::int64_t>(num_), den_ * 3);
    return from_fixed(frac_ / 3);
  }

  Angle negated() const { return times(-1); }

  Angle plus(const Angle& other) const {
    if (rational_ && other.rational_) {
      const std::uint64_t g = gcd_u64(den_, other.den_);
      const u128 lcm = static_cast<u128>(den_ / g) * other.den_;
      if (lcm < (static_cast<u128>(1) << 62)) {
        const auto l = static_cast<std::uint64_t>(lcm);
        const u128 n = static_cast<u128>(num_) * (l / den_) + static_cast<u128>(other.num_) * (l / other.den_);
        return rational(static_cast<std::int64_t>(n % l), l);
      }
    }
    return from_fixed(fixed() + other.fixed());
  }

  /// Representative in [0,1).
  double turns() const {
    if (rational_) return static_cast<double>(num_) / static_cast<double>(den_);
    const auto hi = static_cast<std::uint64_t>(frac_ >> 64);
    const auto lo = static_cast<std::uint64_t>(frac_);
    return std::ldexp(static_cast<double>(hi), -64) + std::ldexp(static_cast<double>(lo), -128);
  }

  /// e^{2 pi i t}; quarter turns are returned exactly.
  cplx unit() const {
    if (rational_) {
      if (num_ == 0) return {1.0, 0.0};
      if (4 % den_ == 0) return quarter(static_cast<int>(num_ * (4 / den_)));
    } else if ((frac_ & ((static_cast<u128>(1) << 126) - 1)) == 0) {
      return quarter(static_cast<int>(frac_ >> 126));
    }
    // Map to (-1/2, 1/2] for a smaller argument.
    double r = turns();
    if (r > 0.5) r -= 1.0;
    const double theta = 2.0 * std::numbers::pi * r;
    return {std::cos(theta), std::sin(theta)};
  }

  /// If t is within `tol` (turns) of b/q for some q <= max_order, returns (b, q) reduced.
  std::optional<std::pair<std::uint64_t, std::uint64_t>> as_root_of_unity(std::uint64_t max_order,
                                                                         double tol = 1e-9) const {
    if (rational_) {
      if (den_ <= max_order) return std::make_pair(num_, den_);
      return std::nullopt;
    }
    const double t = turns();
    for (std::uint64_t q = 1; q <= max_order; ++q) {
      const double qt = static_cast<double>(q) * t;
      const double nearest = std::round(qt);
      if (std::abs(qt - nearest) <= tol) {
        const auto b = static_cast<std::uint64_t>(nearest) % q;
        const std::uint64_t g = gcd_u64(b, q);
        if (b == 0) return std::make_pair<std::uint64_t, std::uint64_t>(0, 1);
        return std::make_pair(b / g, q / g);
      }
    }
    return std::nullopt;
  }

  std::string to_string() const {
    if (rational_) return std::to_string(num_) + "/" + std::to_string(den_);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", turns());
    return buf;
  }

  friend bool operator==(const Angle& a, const Angle& b) {
    if (a.rational_ && b.rational_) return a.num_ == b.num_ && a.den_ == b.den_;
    return a.fixed() == b.fixed();
  }

 private:
  static cplx quarter(int k) {
    switch (k & 3) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }

  u128 to_fixed_round() const {
    // floor(num * 2^128 / den) by long division in two 64-bit halves.
    const u128 hi = (static_cast<u128>(num_) << 64) / den_;
    const u128 rem = (static_cast<u128>(num_) << 64) % den_;
    const u128 lo = (rem << 64) / den_;
    return (hi << 64) | lo;
  }

  bool rational_ = true;
  std::uint64_t num_ = 0;
  std::uint64_t den_ = 1;
  u128 frac_ = 0;
};

/// Circular distance between two angles, in turns, in [0, 1/2].
inline double circular_distance(const Angle& a, const Angle& b) {
  double d = std::abs(a.turns() - b.turns());
  return std::min(d, 1.0 - d);
}

/// e(x) = e^{2 pi i x}.
inline cplx unit_turns(double x) { return Angle::from_turns(x).unit(); }

}  // namespace modlab
