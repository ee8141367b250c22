#pragma once

// Reference computations that share no code path with the library: direct
// trigonometric loops, Boost quadrature and special functions, brute-force
// enumeration.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/binomial.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <algorithm>
#include <functional>
#include <tuple>
#include <utility>
#include <numbers>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

inline cplx e_p(std::int64_t t, std::int64_t p) {
  long double r = static_cast<long double>(((t % p) + p) % p) / static_cast<long double>(p);
  const double ang = static_cast<double>(2.0L * std::numbers::pi_v<long double> * r);
  return {std::cos(ang), std::sin(ang)};
}

inline std::int64_t inverse_mod(std::int64_t n, std::int64_t p) {
  // Extended Euclid.
  std::int64_t a = ((n % p) + p) % p, m = p, x0 = 1, x1 = 0;
  while (m) {
    const std::int64_t q = a / m;
    std::tie(a, m) = std::make_pair(m, a - q * m);
    std::tie(x0, x1) = std::make_pair(x1, x0 - q * x1);
  }
  return ((x0 % p) + p) % p;
}

/// (1/sqrt p) sum_{n in [first, x]} e_p(n^3 + a n) with direct trig per term.
inline cplx birch_partial(std::int64_t p, std::int64_t a, std::int64_t x) {
  cplx s{0, 0};
  for (std::int64_t n = 0; n <= x; ++n) {
    const std::int64_t n3 = (n * n % p) * n % p;
    s += e_p(n3 + a * n % p, p);
  }
  return s / std::sqrt(static_cast<double>(p));
}

inline cplx kloosterman_partial(std::int64_t p, std::int64_t a, std::int64_t x) {
  cplx s{0, 0};
  for (std::int64_t n = 1; n <= x; ++n) s += e_p(a * n % p + inverse_mod(n, p), p);
  return s / std::sqrt(static_cast<double>(p));
}

/// Sato-Tate CDF by quadrature of the density.
inline double st_cdf_quadrature(double x) {
  if (x <= -2) return 0;
  if (x >= 2) return 1;
  auto dens = [](double t) { return std::sqrt(std::max(0.0, 1.0 - t * t / 4.0)) / std::numbers::pi; };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(dens, -2.0, x, 15, 1e-14);
}

/// E e^{tX} = int_0^pi e^{2t cos th} (2/pi) sin^2 th d th.
inline double st_mgf_quadrature(double t) {
  auto f = [t](double th) {
    const double s = std::sin(th);
    return std::exp(2.0 * t * std::cos(th) - 2.0 * t) * (2.0 / std::numbers::pi) * s * s;
  };
  const double scaled = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, std::numbers::pi, 10, 1e-13);
  return scaled * std::exp(2.0 * t);
}

/// I_1(2t)/t from Boost.
inline double st_mgf_bessel(double t) {
  if (t == 0) return 1.0;
  return boost::math::cyl_bessel_i(1, 2.0 * t) / t;
}

inline double catalan(unsigned n) {
  return boost::math::binomial_coefficient<double>(2 * n, n) / (n + 1);
}

/// a_n = (2/pi) int_0^pi g(t) cos(nt) dt, g written out piecewise here.
inline double fourier_a_quadrature(unsigned n) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  auto left = [n](double t) { return std::sin(t) * std::cos(n * t); };
  auto right = [n](double t) { return (1.0 - std::cos(t)) * std::cos(n * t); };
  const double pi = std::numbers::pi;
  const double v = GK::integrate(left, 0.0, pi / 2, 12, 1e-14) + GK::integrate(right, pi / 2, pi, 12, 1e-14);
  return 2.0 / pi * v;
}

/// Sato-Tate moments E X^m.
inline double st_moment(unsigned m) { return m % 2 ? 0.0 : catalan(m / 2); }

/// E[(sum c X)^k (sum conj(c) X)^l] by enumerating all index tuples.
inline cplx moment_brute(const std::vector<cplx>& c, unsigned k, unsigned l) {
  const std::size_t n = c.size();
  const unsigned total = k + l;
  std::vector<std::size_t> idx(total, 0);
  cplx acc{0, 0};
  for (;;) {
    cplx w{1, 0};
    std::vector<unsigned> mult(n, 0);
    for (unsigned i = 0; i < total; ++i) {
      w *= i < k ? c[idx[i]] : std::conj(c[idx[i]]);
      ++mult[idx[i]];
    }
    double e = 1.0;
    for (auto m : mult) e *= st_moment(m);
    acc += w * e;
    unsigned pos = 0;
    while (pos < total && ++idx[pos] == n) idx[pos++] = 0;
    if (pos == total) break;
  }
  return acc;
}

}  // namespace oracle
