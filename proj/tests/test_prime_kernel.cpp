#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "common.hpp"
#include "modlab/prime_kernel.hpp"
#include "oracles.hpp"

using namespace modlab;
using testing_support::table_1e6;

TEST(PrimeTable, SmallTablesMatchTrialDivision) {
  for (std::uint64_t h : {2, 3, 10, 64, 65, 100, 127, 128, 129, 1000, 4099}) {
    const PrimeTable t(h);
    const auto ref = oracle::primes_upto(h);
    ASSERT_EQ(t.primes().size(), ref.size()) << "H=" << h;
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_EQ(t.primes()[i], ref[i]);
    for (std::uint64_t n = 0; n <= h; ++n) EXPECT_EQ(t.is_prime(n), oracle::is_prime(n)) << n;
  }
}

TEST(PrimeTable, Examples) {
  EXPECT_EQ(PrimeTable(10).primes().size(), 4u);
  EXPECT_EQ(PrimeTable(2).primes().size(), 1u);
  EXPECT_EQ(PrimeTable(100).prime_count(100), 25u);
  const auto t = table_1e6();
  EXPECT_EQ(t->prime_count(1), 0u);
  EXPECT_EQ(t->prime_count(10), 4u);
  EXPECT_EQ(t->prime_count(1000), 168u);
  EXPECT_EQ(t->prime_count(1'000'000), 78498u);
  EXPECT_EQ(t->nth_prime(1), 2u);
  EXPECT_EQ(t->nth_prime(4), 7u);
  EXPECT_EQ(t->nth_prime(25), 97u);
  EXPECT_EQ(t->nth_prime(78498), 999983u);
}

TEST(PrimeTable, RejectsBadHorizons) {
  EXPECT_THROW(PrimeTable(1), Error);
  EXPECT_THROW(PrimeTable(0), Error);
  EXPECT_THROW(PrimeTable(PrimeTable::max_horizon + 1), Error);
  const PrimeTable t(100);
  EXPECT_THROW((void)t.is_prime(101), Error);
  EXPECT_THROW((void)t.nth_prime(26), Error);
  EXPECT_THROW((void)t.nth_prime(0), Error);
  EXPECT_THROW((void)t.von_mangoldt(0), Error);
}

TEST(PrimeTable, PrimeCountAgreesWithEnumerationEverywhere) {
  const PrimeTable t(5000);
  std::uint64_t c = 0;
  for (std::uint64_t n = 0; n <= 5000; ++n) {
    if (oracle::is_prime(n)) ++c;
    ASSERT_EQ(t.prime_count(n), c) << n;
  }
}

TEST(PrimeTable, VonMangoldt) {
  const auto t = table_1e6();
  EXPECT_DOUBLE_EQ(t->von_mangoldt(8), std::log(2.0));
  EXPECT_EQ(t->von_mangoldt(6), 0.0);
  EXPECT_DOUBLE_EQ(t->von_mangoldt(7), std::log(7.0));
  EXPECT_EQ(t->von_mangoldt(1), 0.0);
  EXPECT_EQ(t->von_mangoldt_prime(8), 0.0);
  EXPECT_DOUBLE_EQ(t->von_mangoldt_prime(7), std::log(7.0));
  for (std::uint64_t n = 1; n <= 20000; ++n) ASSERT_DOUBLE_EQ(t->von_mangoldt(n), oracle::von_mangoldt(n)) << n;
  EXPECT_DOUBLE_EQ(t->von_mangoldt(997ULL * 997), std::log(997.0));
  EXPECT_DOUBLE_EQ(t->von_mangoldt(1ULL << 19), std::log(2.0));
}

// Reference values computed with an independent sieve at 30 digits.
TEST(PrimeTable, ChebyshevFunctions) {
  const auto t = table_1e6();
  const double n = 1e6;
  EXPECT_NEAR(t->theta(1'000'000) / n, 0.998484175025634292, 1e-12);
  EXPECT_NEAR(t->psi(1'000'000) / n, 0.999586597495632922, 1e-12);
  double th = 0.0;
  for (std::uint64_t p : oracle::primes_upto(2000)) th += std::log(static_cast<double>(p));
  EXPECT_NEAR(t->theta(2000), th, 1e-9);
  // Lambda' mean within 0.01 of 1
  EXPECT_NEAR(t->theta(1'000'000) / n, 1.0, 0.01);
  double prev = 0.0;
  for (std::uint64_t j = 1; j <= 1000; ++j) {
    const double v = t->theta_at_index(j);
    ASSERT_GT(v, prev);
    prev = v;
  }
}

TEST(PrimeTable, Progressions) {
  const auto t = table_1e6();
  EXPECT_EQ(t->prime_count_progression(20, 4, 1), 3u);
  EXPECT_EQ(t->prime_count_progression(20, 4, 3), 4u);
  EXPECT_EQ(t->prime_count_progression(10, 2, 0), 1u);
  EXPECT_THROW((void)t->prime_count_progression(10, 0, 0), Error);
  EXPECT_THROW((void)t->prime_count_progression(10, 4, 4), Error);
  for (std::uint64_t q : {3, 5, 7, 12}) {
    std::uint64_t total = 0;
    for (std::uint64_t a = 0; a < q; ++a) total += t->prime_count_progression(10000, q, a);
    EXPECT_EQ(total, t->prime_count(10000));
  }
}

TEST(LogIntegral, AgreesWithSeriesOracle) {
  EXPECT_EQ(log_integral(2.0), 0.0);
  EXPECT_NEAR(log_integral(10.0), 5.12043572466980515, 1e-10);
  EXPECT_NEAR(log_integral(1e6), 78626.5039956820644, 1e-5);
  for (double x : {2.5, 3.0, 17.0, 1e3, 12345.0, 1e5, 1e7}) {
    EXPECT_NEAR(log_integral(x), oracle::log_integral(x), 1e-10 * std::max(1.0, oracle::log_integral(x))) << x;
  }
  const auto t = table_1e6();
  EXPECT_NEAR(log_integral(1e6) / static_cast<double>(t->prime_count(1'000'000)), 1.0, 0.01);
  EXPECT_THROW((void)log_integral(1.5), Error);
}

TEST(FourierBohrExact, Examples) {
  const PolyNN id = PolyNN::identity();
  const PolyNN sq({0, 0, 1});
  EXPECT_NEAR(std::abs(fourier_bohr_exact(1, 0, id) - cplx(1, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(fourier_bohr_exact(2, 1, id) - cplx(-1, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(fourier_bohr_exact(3, 1, id) - cplx(-0.5, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(fourier_bohr_exact(4, 1, sq) - cplx(0, 1)), 0.0, 1e-15);
  EXPECT_THROW((void)fourier_bohr_exact(4, 2, id), Error);
  EXPECT_THROW((void)fourier_bohr_exact(0, 1, id), Error);
}

TEST(FourierBohrExact, MatchesResidueEnumeration) {
  const std::vector<std::vector<std::uint64_t>> polys = {{0, 1}, {0, 0, 1}, {1, 2, 3}, {0, 0, 0, 1}, {5, 0, 1}};
  for (const auto& c : polys) {
    const PolyNN poly(c);
    for (std::uint64_t q = 1; q <= 24; ++q) {
      for (std::int64_t b = -static_cast<std::int64_t>(q); b < static_cast<std::int64_t>(2 * q); ++b) {
        const std::uint64_t br = static_cast<std::uint64_t>(((b % static_cast<std::int64_t>(q)) + q) % q);
        if (std::gcd(br, q) != 1) continue;
        const cplx got = fourier_bohr_exact(q, b, poly);
        const cplx ref = oracle::residue_average(q, b, c);
        ASSERT_NEAR(std::abs(got - ref), 0.0, 1e-13) << "q=" << q << " b=" << b << " Q=" << poly.to_string();
      }
    }
  }
}

TEST(FourierBohrExact, EmpiricalPrimeAverage) {
  const auto t = table_1e6();
  const PolyNN sq({0, 0, 1});
  std::complex<long double> s = 0;
  const std::uint64_t n = t->prime_count(100'000);
  for (std::uint64_t j = 1; j <= n; ++j) {
    const std::uint64_t p = t->nth_prime(j);
    const long double ang = 2.0L * 3.141592653589793238L * static_cast<long double>((p % 4) * (p % 4) % 4) / 4.0L;
    s += std::complex<long double>(std::cos(ang), std::sin(ang));
  }
  const cplx avg(static_cast<double>(s.real() / n), static_cast<double>(s.imag() / n));
  EXPECT_LT(std::abs(avg - fourier_bohr_exact(4, 1, sq)), 0.05);
}

TEST(UniformGap, Values) {
  const auto t = table_1e6();
  EXPECT_NEAR(t->lambda_prime_uniform_gap(2), 1.0 - std::log(2.0) / 2.0, 1e-15);
  const double g4 = t->lambda_prime_uniform_gap(10'000);
  const double g6 = t->lambda_prime_uniform_gap(1'000'000);
  EXPECT_NEAR(g4, 0.103501611494068758, 1e-11);
  EXPECT_NEAR(g6, 0.0631602625442630758, 1e-11);
  EXPECT_LT(g6, g4);
  EXPECT_LE(g6, 0.2);
  EXPECT_THROW((void)t->lambda_prime_uniform_gap(1), Error);
}

TEST(PolyNN, EvaluationAndValidation) {
  const PolyNN q({1, 2, 3});
  EXPECT_EQ(q(0), 1u);
  EXPECT_EQ(q(2), 17u);
  EXPECT_EQ(q.eval_mod(1'000'003, 7), q(1'000'003) % 7);
  for (std::uint64_t x = 1; x < 200; ++x) EXPECT_LT(q(x), q(x + 1));
  EXPECT_THROW(PolyNN({3}), Error);
  EXPECT_THROW((void)PolyNN::monomial(5)(1ULL << 20), Error);
  EXPECT_EQ(PolyNN({0, 0, 1}).to_string(), "t^2");
}

TEST(Numeric, CompensatedSumAndGrid) {
  CompensatedSum<double> s;
  s.add(1e16);
  for (int i = 0; i < 1000; ++i) s.add(1.0);
  s.add(-1e16);
  EXPECT_EQ(s.value(), 1000.0);
  const auto g = geometric_grid(10, 1.3, 1000);
  EXPECT_EQ(g.front(), 10u);
  EXPECT_EQ(g.back(), 1000u);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_LT(g[i - 1], g[i]);
  EXPECT_THROW((void)geometric_grid(10, 1.0, 100), Error);
  EXPECT_EQ(euler_phi(24), 8u);
  EXPECT_EQ(gcd_u64(12, 18), 6u);
}
