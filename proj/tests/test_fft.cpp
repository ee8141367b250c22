#include <gtest/gtest.h>

#include <random>

#include "birchmax/fft.hpp"

using namespace birchmax;

namespace {

using cplx = std::complex<double>;

std::vector<cplx> naive_dft(const std::vector<cplx>& x, int sign) {
  const std::size_t n = x.size();
  std::vector<cplx> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    long double re = 0, im = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const long double ang = sign * 2.0L * std::numbers::pi_v<long double> * static_cast<long double>((j * k) % n) / n;
      re += x[j].real() * std::cos(ang) - x[j].imag() * std::sin(ang);
      im += x[j].real() * std::sin(ang) + x[j].imag() * std::cos(ang);
    }
    out[k] = {static_cast<double>(re), static_cast<double>(im)};
  }
  return out;
}

std::vector<cplx> random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<cplx> x(n);
  for (auto& v : x) v = {u(rng), u(rng)};
  return x;
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace

TEST(Fft, Radix2MatchesNaive) {
  for (std::size_t n : {1u, 2u, 8u, 64u, 512u}) {
    const auto x = random_vector(n, 3);
    for (int sign : {+1, -1}) {
      auto y = x;
      Radix2Fft(n).transform(y, sign);
      EXPECT_LT(max_diff(y, naive_dft(x, sign)), 1e-12 * n) << n;
    }
  }
  EXPECT_THROW(Radix2Fft(12), std::invalid_argument);
}

class BluesteinLengths : public ::testing::TestWithParam<std::size_t> {};

TEST_P(BluesteinLengths, ChirpZMatchesNaive) {
  const std::size_t n = GetParam();
  const auto x = random_vector(n, static_cast<unsigned>(n));
  DftPlan chirp(n, 0), direct(n, n + 1);
  ASSERT_FALSE(chirp.uses_naive());
  ASSERT_TRUE(direct.uses_naive());
  DftWorkspace ws;
  for (int sign : {+1, -1}) {
    std::vector<cplx> a(n), b(n);
    chirp.transform(x, a, sign, ws);
    direct.transform(x, b, sign, ws);
    const auto ref = naive_dft(x, sign);
    EXPECT_LT(max_diff(a, ref), 1e-10) << n;
    EXPECT_LT(max_diff(b, ref), 1e-10) << n;
  }
}

INSTANTIATE_TEST_SUITE_P(Primes, BluesteinLengths, ::testing::Values(3, 5, 7, 101, 1009, 2003, 4099));

TEST(Fft, InPlaceAndRoundTrip) {
  const std::size_t n = 1009;
  const auto x = random_vector(n, 11);
  DftPlan plan(n, 0);
  DftWorkspace ws;
  auto y = x;
  plan.transform(y, y, -1, ws);
  plan.transform(y, y, +1, ws);
  for (auto& v : y) v /= static_cast<double>(n);
  EXPECT_LT(max_diff(x, y), 1e-12);
}
