#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "modlab/error.hpp"

namespace modlab {

using cplx = std::complex<double>;

/// Neumaier-compensated running sum. Works for double and std::complex<double>.
template <typename T>
class CompensatedSum {
 public:
  void add(T x) {
    if constexpr (std::is_same_v<T, cplx>) {
      re_.add(x.real());
      im_.add(x.imag());
    } else {
      const double t = sum_ + x;
      if (std::abs(sum_) >= std::abs(x)) {
        comp_ += (sum_ - t) + x;
      } else {
        comp_ += (x - t) + sum_;
      }
      sum_ = t;
    }
  }

  T value() const {
    if constexpr (std::is_same_v<T, cplx>) {
      return {re_.value(), im_.value()};
    } else {
      return sum_ + comp_;
    }
  }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
  struct Empty {};
  std::conditional_t<std::is_same_v<T, cplx>, CompensatedSum<double>, Empty> re_{}, im_{};
};

/// Geometric checkpoint grid: start, start*ratio, ... (rounded, deduplicated), always ending at `last`.
inline std::vector<std::uint64_t> geometric_grid(std::uint64_t start, double ratio, std::uint64_t last) {
  if (start < 1 || ratio <= 1.0) {
    throw Error(ErrorCode::invalid_argument, "geometric grid needs start >= 1 and ratio > 1");
  }
  std::vector<std::uint64_t> grid;
  double x = static_cast<double>(start);
  while (x < static_cast<double>(last)) {
    const auto n = static_cast<std::uint64_t>(std::llround(x));
    if (n >= 1 && n < last && (grid.empty() || n > grid.back())) grid.push_back(n);
    x *= ratio;
  }
  grid.push_back(last);
  return grid;
}

/// Index of the first entry of the tail (last third) of a grid of the given size.
inline std::size_t tail_start(std::size_t size) {
  if (size == 0) return 0;
  return size - std::max<std::size_t>(1, (size + 2) / 3);
}

/// Tail max of a profile: the finite-horizon stand-in for a limsup.
inline double tail_max(std::span<const double> profile) {
  if (profile.empty()) return 0.0;
  return *std::max_element(profile.begin() + static_cast<std::ptrdiff_t>(tail_start(profile.size())),
                           profile.end());
}

/// A profile is "bounded" on the grid when its tail does not outgrow its head by more than `factor`.
inline bool bounded_trend(std::span<const double> profile, double factor = 1.5) {
  if (profile.empty()) return true;
  const std::size_t ts = tail_start(profile.size());
  if (ts == 0) return true;
  const double head = *std::max_element(profile.begin(), profile.begin() + static_cast<std::ptrdiff_t>(ts));
  return tail_max(profile) <= factor * head + 1e-12;
}

/// Tail max at most `ratio` times the head max: the limsup reading of "tends to 0",
/// tolerant of slow (logarithmic) decay and of spikes that recur forever.
inline bool limsup_vanishing(std::span<const double> profile, double ratio = 0.5) {
  const std::size_t ts = tail_start(profile.size());
  if (profile.size() < 3 || ts == 0) return false;
  const double head = *std::max_element(profile.begin(), profile.begin() + static_cast<std::ptrdiff_t>(ts));
  return tail_max(profile) <= ratio * head;
}

constexpr std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) {
  while (b != 0) {
    const std::uint64_t t = a % b;
    a = b;
    b = t;
  }
  return a;
}

constexpr std::uint64_t euler_phi(std::uint64_t n) {
  std::uint64_t result = n;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p == 0) {
      while (n % p == 0) n /= p;
      result -= result / p;
    }
  }
  if (n > 1) result -= result / n;
  return result;
}

/// Seeded generator with platform-independent uniform and normal draws
/// (the std distributions are implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    // Box-Muller; u1 in (0,1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  cplx complex_normal() { return {normal(), normal()}; }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace modlab
