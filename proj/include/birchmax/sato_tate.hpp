#pragma once

// The Sato-Tate law mu_ST = (1/pi) sqrt(1 - x^2/4) dx on [-2, 2], its moments
// and moment generating function, and the random Fourier series
//
//   M = max_{alpha in [0,1)} | alpha X(0) + sum_{h != 0} (e(alpha h) - 1)/(2 pi i h) X(h) |
//
// with independent Sato-Tate X(h).

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "birchmax/ccdf.hpp"
#include "birchmax/errors.hpp"
#include "birchmax/fft.hpp"
#include "birchmax/parallel.hpp"

namespace birchmax {

using cplx = std::complex<double>;

/// Catalan number C_n, exact. Throws past C_35 (the last one below 2^64).
inline std::uint64_t catalan(unsigned n) {
  if (n > 35) throw contract_error("catalan: n > 35 overflows 64 bits");
  unsigned __int128 c = 1;
  for (unsigned i = 0; i < n; ++i) c = c * 2 * (2 * i + 1) / (i + 2);
  return static_cast<std::uint64_t>(c);
}

/// E(X^l) under mu_ST: C_{l/2} for even l, 0 for odd l.
inline std::uint64_t st_moment(unsigned l) { return l % 2 ? 0 : catalan(l / 2); }

/// P(X <= x) = 1 - (theta - sin(theta) cos(theta))/pi with theta = arccos(x/2).
inline double st_cdf(double x) {
  if (x <= -2.0) return 0.0;
  if (x >= 2.0) return 1.0;
  const double c = x / 2.0;
  const double theta = std::acos(c);
  return 1.0 - (theta - std::sqrt(1.0 - c * c) * c) / std::numbers::pi;
}

namespace detail {

inline constexpr double log_two_pi = 1.8378770664093454836;

/// log of the asymptotic series sum_k (-1)^k a_k(1) / z^k for I_1(z).
inline double log_bessel_i1_series(double z) {
  double term = 1.0, sum = 1.0;
  for (int k = 1; k <= 30; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(4.0 - odd * odd) / (k * 8.0 * z);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return std::log(sum);
}

inline constexpr double asymptotic_threshold = 50.0;

}  // namespace detail

/// log E(e^{tX}) = log(I_1(2t)/t), stable for every real t.
inline double log_st_mgf(double t) {
  t = std::abs(t);
  if (t == 0.0) return 0.0;
  if (t < detail::asymptotic_threshold) {
    // sum_{n>=1} t^{2n} / (n! (n+1)!), all terms positive.
    const double t2 = t * t;
    double term = t2 / 2.0, sum = term;
    for (int n = 1; n < 2000; ++n) {
      term *= t2 / ((n + 1.0) * (n + 2.0));
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return std::log1p(sum);
  }
  const double z = 2.0 * t;
  return z - 0.5 * (detail::log_two_pi + std::log(z)) - std::log(t) + detail::log_bessel_i1_series(z);
}

/// E(e^{tX}) = sum_n t^{2n} / (n! (n+1)!).
inline double st_mgf(double t) {
  const double l = log_st_mgf(t);
  if (l > 709.0) throw overflow_error("st_mgf overflows a double", l);
  return std::exp(l);
}

/// f(t) = log E(e^{tX}) for t < 1 and log E(e^{tX}) - 2t for t >= 1.
inline double f_of_t(double t) {
  if (t < 0.0) throw domain_error("f_of_t requires t >= 0");
  if (t < 1.0) return log_st_mgf(t);
  if (t < detail::asymptotic_threshold) return log_st_mgf(t) - 2.0 * t;
  // -(3/2) log t - (1/2) log(4 pi) + log(series), without the 2t cancellation.
  return -1.5 * std::log(t) - 0.5 * std::log(4.0 * std::numbers::pi) +
         detail::log_bessel_i1_series(2.0 * t);
}

/// f(t)/t^2, continuous at 0 with limit 1/2.
inline double f_over_t2(double t) {
  if (t == 0.0) return 0.5;
  if (t < 1.0) {
    const double t2 = t * t;
    double term = 0.5, sum = 0.5;  // (mgf - 1)/t^2
    for (int n = 1; n < 200; ++n) {
      term *= t2 / ((n + 1.0) * (n + 2.0));
      sum += term;
      if (term < 1e-18 * sum) break;
    }
    return std::log1p(sum * t2) / t2;
  }
  return f_of_t(t) / (t * t);
}

enum class SamplingMethod { inverse_cdf, rejection };

inline std::string to_string(SamplingMethod m) {
  return m == SamplingMethod::inverse_cdf ? "inverse-cdf" : "rejection";
}

namespace detail {

/// theta in [0, pi] with (theta - sin(theta)cos(theta))/pi = u at u = k/N.
struct InverseCdfTable {
  static constexpr int size = 1024;
  std::array<double, size + 1> theta{};

  InverseCdfTable() {
    theta[0] = 0.0;
    theta[size] = std::numbers::pi;
    for (int k = 1; k < size; ++k) {
      const double u = static_cast<double>(k) / size;
      double lo = 0.0, hi = std::numbers::pi;
      for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double F = (mid - 0.5 * std::sin(2.0 * mid)) / std::numbers::pi;
        (F < u ? lo : hi) = mid;
      }
      theta[k] = 0.5 * (lo + hi);
    }
  }

  static const InverseCdfTable& instance() {
    static const InverseCdfTable t;
    return t;
  }
};

}  // namespace detail

/// Draws X = 2 cos(theta) with theta of density (2/pi) sin^2(theta) on [0, pi].
///
/// Each (seed, stream) pair gives an independent, reproducible sequence, so
/// Monte Carlo trials can run in any order or on any number of threads.
class SatoTateSampler {
 public:
  explicit SatoTateSampler(std::uint64_t seed, SamplingMethod method = SamplingMethod::inverse_cdf,
                           std::uint64_t stream = 0)
      : seed_(seed), method_(method) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t seed() const noexcept { return seed_; }
  SamplingMethod method() const noexcept { return method_; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double operator()() { return method_ == SamplingMethod::inverse_cdf ? inverse_cdf() : rejection(); }

  /// Solves F(theta) = u by safeguarded Newton inside the tabulated bracket.
  double inverse_cdf() {
    const double u = uniform();
    const auto& tab = detail::InverseCdfTable::instance();
    const double pos = u * detail::InverseCdfTable::size;
    const int k = std::min(static_cast<int>(pos), detail::InverseCdfTable::size - 1);
    double lo = tab.theta[k], hi = tab.theta[k + 1];
    double theta = lo + (hi - lo) * (pos - k);
    for (int it = 0; it < 60; ++it) {
      const double s2 = std::sin(2.0 * theta), c2 = std::cos(2.0 * theta);
      const double g = (theta - 0.5 * s2) / std::numbers::pi - u;
      if (g < 0) lo = theta; else hi = theta;
      const double dg = (1.0 - c2) / std::numbers::pi;
      double next = dg > 0 ? theta - g / dg : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - theta) <= 1e-15 * (1.0 + theta) || hi - lo < 1e-15) {
        theta = next;
        break;
      }
      theta = next;
    }
    return 2.0 * std::cos(theta);
  }

  /// x-coordinate of a uniform point in the disc of radius 2.
  double rejection() {
    for (;;) {
      const double x = 2.0 * uniform() - 1.0;
      const double y = 2.0 * uniform() - 1.0;
      if (x * x + y * y <= 1.0) return 2.0 * x;
    }
  }

 private:
  std::uint64_t seed_;
  SamplingMethod method_;
  std::mt19937_64 engine_;
};

inline double sample_st(SatoTateSampler& sampler) { return sampler(); }

/// Index helper for series samples stored as X[h + H], h = -H..H.
inline std::size_t series_index(long h, long H) { return static_cast<std::size_t>(h + H); }

/// alpha X(0) + sum_{1 <= |h| <= H} (e(alpha h) - 1)/(2 pi i h) X(h), by
/// incremental rotation of e(alpha)^h (re-anchored every 64 steps).
inline cplx model_series(std::span<const double> X, double alpha, long H) {
  if (X.size() != static_cast<std::size_t>(2 * H + 1)) {
    throw contract_error("model_series: expected 2H + 1 samples");
  }
  const double two_pi = 2.0 * std::numbers::pi;
  const cplx step{std::cos(two_pi * alpha), std::sin(two_pi * alpha)};
  cplx zh{1.0, 0.0};
  cplx acc{alpha * X[series_index(0, H)], 0.0};
  const cplx inv_two_pi_i{0.0, -1.0 / two_pi};  // 1/(2 pi i)
  for (long h = 1; h <= H; ++h) {
    if (h % 64 == 0) {
      const double ang = two_pi * std::fmod(alpha * static_cast<double>(h), 1.0);
      zh = {std::cos(ang), std::sin(ang)};
    } else {
      zh *= step;
    }
    const cplx term = (zh - 1.0) * X[series_index(h, H)] - (std::conj(zh) - 1.0) * X[series_index(-h, H)];
    acc += term * inv_two_pi_i / static_cast<double>(h);
  }
  return acc;
}

struct ModelConfig {
  long H = 1000;
  /// Number of equispaced alpha values; rounded up to a power of two >= 2H + 1.
  /// 0 selects 4 (2H + 1) rounded up.
  std::size_t alpha_grid = 0;
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  SamplingMethod method = SamplingMethod::inverse_cdf;
  /// Golden-section steps around the best grid points.
  int refine_steps = 24;

  void validate() const {
    if (H < 1) throw contract_error("ModelConfig: H must be >= 1");
    if (alpha_grid != 0 && alpha_grid < 4) throw contract_error("ModelConfig: alpha_grid must be >= 4");
    if (trials < 1) throw contract_error("ModelConfig: trials must be >= 1");
  }

  std::size_t resolved_grid() const {
    const std::size_t want = alpha_grid == 0 ? 4 * static_cast<std::size_t>(2 * H + 1) : alpha_grid;
    return std::bit_ceil(std::max(want, static_cast<std::size_t>(2 * H + 1)));
  }
};

struct ModelDistribution {
  EmpiricalCCDF dist;
  ModelConfig config;
  std::size_t grid = 0;
  /// E|tail|^2 bound for the terms |h| > H (weights bounded by 1/(pi |h|)).
  double truncation_moment_bound = 0.0;
  /// sqrt(2 / (pi^2 H)): the standard deviation scale of the discarded tail.
  double truncation_sd = 0.0;
  /// Worst-case error of the raw alpha grid before refinement: 2(2H+1)/(2 grid).
  double grid_error_bound = 0.0;
};

/// Draws X(0), X(1), X(-1), X(2), X(-2), ... into X[h + H].
inline void draw_series_samples(SatoTateSampler& s, std::span<double> X, long H) {
  X[series_index(0, H)] = s();
  for (long h = 1; h <= H; ++h) {
    X[series_index(h, H)] = s();
    X[series_index(-h, H)] = s();
  }
}

namespace detail {

/// max over alpha in [0, 1] of |series| for one draw: FFT on the grid, then
/// golden-section refinement around the two best grid maxima.
inline double series_sup(std::span<const double> X, long H, const Radix2Fft& fft,
                         std::vector<cplx>& buf, int refine_steps) {
  const std::size_t N = fft.size();
  buf.assign(N, cplx{0.0, 0.0});
  const double two_pi = 2.0 * std::numbers::pi;
  cplx constant{0.0, 0.0};
  for (long h = 1; h <= H; ++h) {
    const cplx cp = cplx{0.0, -1.0} * (X[series_index(h, H)] / (two_pi * h));
    const cplx cm = cplx{0.0, 1.0} * (X[series_index(-h, H)] / (two_pi * h));
    buf[static_cast<std::size_t>(h) % N] += cp;
    buf[(N - static_cast<std::size_t>(h) % N) % N] += cm;
    constant -= cp + cm;
  }
  fft.transform(buf, +1);
  const double x0 = X[series_index(0, H)];
  auto grid_value = [&](std::size_t j) {
    const double alpha = static_cast<double>(j) / static_cast<double>(N);
    return std::abs(alpha * x0 + constant + buf[j % N]);
  };
  std::size_t best = 0, second = 0;
  double best_v = -1, second_v = -1;
  for (std::size_t j = 0; j <= N; ++j) {
    const double v = grid_value(j);
    if (v > best_v) {
      second = best;
      second_v = best_v;
      best = j;
      best_v = v;
    } else if (v > second_v) {
      second = j;
      second_v = v;
    }
  }
  double result = best_v;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (std::size_t cand : {best, second}) {
    double lo = std::max(0.0, (static_cast<double>(cand) - 1.0) / static_cast<double>(N));
    double hi = std::min(1.0, (static_cast<double>(cand) + 1.0) / static_cast<double>(N));
    double c = hi - inv_phi * (hi - lo), d = lo + inv_phi * (hi - lo);
    double fc = std::abs(model_series(X, c, H)), fd = std::abs(model_series(X, d, H));
    for (int it = 0; it < refine_steps; ++it) {
      if (fc > fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - inv_phi * (hi - lo);
        fc = std::abs(model_series(X, c, H));
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + inv_phi * (hi - lo);
        fd = std::abs(model_series(X, d, H));
      }
    }
    result = std::max({result, fc, fd});
  }
  return result;
}

}  // namespace detail

/// Monte Carlo law of M truncated at |h| <= H. Trial i uses sampler stream i,
/// so the sample set does not depend on the worker count.
inline ModelDistribution simulate_M(const ModelConfig& config) {
  config.validate();
  const std::size_t N = config.resolved_grid();
  const Radix2Fft fft(N);
  const long H = config.H;
  std::vector<double> values(config.trials);
  const unsigned workers = std::max(1u, config.workers);
  std::vector<std::vector<cplx>> bufs(workers);
  std::vector<std::vector<double>> xs(workers, std::vector<double>(2 * H + 1));
  parallel_for(config.trials, workers, [&](unsigned w, std::size_t trial) {
    SatoTateSampler sampler(config.seed, config.method, trial);
    draw_series_samples(sampler, xs[w], H);
    values[trial] = detail::series_sup(xs[w], H, fft, bufs[w], config.refine_steps);
  });
  ModelDistribution out;
  out.dist = EmpiricalCCDF(std::move(values));
  out.config = config;
  out.grid = N;
  const double c0 = 1.0 / (2.0 * std::numbers::pi);
  out.truncation_moment_bound = 8.0 * c0 * c0 * 2.0 / static_cast<double>(H);
  out.truncation_sd = std::sqrt(2.0 / (std::numbers::pi * std::numbers::pi * static_cast<double>(H)));
  out.grid_error_bound = 2.0 * (2.0 * H + 1.0) / (2.0 * static_cast<double>(N));
  return out;
}

/// log E exp(s sum_h c_h X(h)) = sum_h log E exp(s c_h X).
inline double log_model_laplace(double s, std::span<const double> coeffs) {
  double acc = 0.0;
  for (double c : coeffs) {
    if (!std::isfinite(c)) throw contract_error("model_laplace: non-finite coefficient");
    acc += log_st_mgf(s * c);
  }
  return acc;
}

inline double model_laplace(double s, std::span<const double> coeffs) {
  const double l = log_model_laplace(s, coeffs);
  if (l > 709.0) throw overflow_error("model_laplace overflows a double", l);
  return std::exp(l);
}

struct MomentOracleLimits {
  unsigned max_order = 12;     // k + l
  std::size_t max_support = 4096;
};

/// Exact E[(sum_h c_h X_h)^k (sum_h conj(c_h) X_h)^l] for independent Sato-Tate X_h,
/// one coefficient per distinct h.
///
/// Uses E[A^k B^l] = k! l! [u^k v^l] prod_h E exp((u c_h + v conj(c_h)) X_h) with
/// E exp(zX) = sum_n C_n z^{2n} / (2n)!, truncated to degrees (k, l).
inline cplx moment_oracle(std::span<const cplx> coeffs, unsigned k, unsigned l,
                          MomentOracleLimits limits = {}) {
  if (k + l > limits.max_order) {
    throw resource_error("moment_oracle: k + l = " + std::to_string(k + l) + " exceeds " +
                         std::to_string(limits.max_order));
  }
  if (coeffs.size() > limits.max_support) {
    throw resource_error("moment_oracle: support " + std::to_string(coeffs.size()) + " exceeds " +
                         std::to_string(limits.max_support));
  }
  const unsigned K = k + 1, Lw = l + 1;
  auto at = [Lw](unsigned i, unsigned j) { return i * Lw + j; };
  std::vector<cplx> poly(K * Lw, cplx{0.0, 0.0}), next(K * Lw), factor(K * Lw);
  poly[0] = 1.0;
  // binom and factorial tables up to degree k + l
  const unsigned D = k + l;
  std::vector<double> fact(D + 1, 1.0);
  for (unsigned i = 1; i <= D; ++i) fact[i] = fact[i - 1] * i;
  for (const cplx c : coeffs) {
    std::fill(factor.begin(), factor.end(), cplx{0.0, 0.0});
    const cplx cb = std::conj(c);
    // (u c + v cb)^d / d! * C_{d/2} for even d: coefficient of u^i v^{d-i} is
    // C_{d/2} c^i cb^{d-i} / (i! (d-i)!).
    for (unsigned d = 0; d <= D; d += 2) {
      const double m = static_cast<double>(catalan(d / 2));
      for (unsigned i = 0; i <= d; ++i) {
        const unsigned j = d - i;
        if (i > k || j > l) continue;
        factor[at(i, j)] += m * std::pow(c, static_cast<int>(i)) * std::pow(cb, static_cast<int>(j)) /
                            (fact[i] * fact[j]);
      }
    }
    std::fill(next.begin(), next.end(), cplx{0.0, 0.0});
    for (unsigned i1 = 0; i1 < K; ++i1)
      for (unsigned j1 = 0; j1 < Lw; ++j1) {
        const cplx a = poly[at(i1, j1)];
        if (a == cplx{0.0, 0.0}) continue;
        for (unsigned i2 = 0; i1 + i2 < K; ++i2)
          for (unsigned j2 = 0; j1 + j2 < Lw; ++j2) next[at(i1 + i2, j1 + j2)] += a * factor[at(i2, j2)];
      }
    poly.swap(next);
  }
  return poly[at(k, l)] * fact[k] * fact[l];
}

}  // namespace birchmax
