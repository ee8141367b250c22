#pragma once

// The envelope g(t), its Fourier coefficients, the extremal quantity
//
//   G(H) = max_alpha max_{y in [-2,2]^{2H}} | sum_{1<=|h|<=H} (e(alpha h) - 1)/h y_h |,
//
// and the constants I = int_0^inf f(u)/u^2 du, A0, B0, delta that govern the
// double-exponential tail.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "birchmax/errors.hpp"
#include "birchmax/parallel.hpp"
#include "birchmax/quadrature.hpp"
#include "birchmax/sato_tate.hpp"

namespace birchmax {

inline constexpr double euler_gamma = 0.57721566490153286061;

/// 2pi-periodic: sin t on [0, pi/2], 1 - cos t on (pi/2, 3pi/2), -sin t on [3pi/2, 2pi].
inline double g_eval(double t) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  t = std::fmod(t, two_pi);
  if (t < 0) t += two_pi;
  if (t <= std::numbers::pi / 2) return std::sin(t);
  if (t < 1.5 * std::numbers::pi) return 1.0 - std::cos(t);
  return -std::sin(t);
}

/// g(2 pi x) with x reduced mod 1 before scaling.
inline double g_of_turns(double x) {
  x -= std::floor(x);
  return g_eval(2.0 * std::numbers::pi * x);
}

/// Closed-form cosine coefficients a_n = (1/pi) int_{-pi}^{pi} g(t) cos(nt) dt.
inline double fourier_a(unsigned n) {
  constexpr double pi = std::numbers::pi;
  if (n == 0) return 1.0 + 4.0 / pi;
  if (n == 1) return -1.0 / pi - 0.5;
  const double m = n;
  switch (n % 4) {
    case 0: return -4.0 / ((m * m - 1.0) * pi);
    case 1: return -2.0 / (m * (m + 1.0) * pi);
    case 2: return 0.0;
    default: return -2.0 / (m * (m - 1.0) * pi);
  }
}

/// a_n by adaptive quadrature of (2/pi) int_0^pi g(t) cos(nt) dt, split at pi/2.
inline QuadratureResult fourier_a_quadrature(unsigned n, QuadratureOptions opts = {}) {
  const double bp[] = {std::numbers::pi / 2};
  opts.initial_splits = std::max<std::size_t>(opts.initial_splits, n / 2 + 1);
  auto r = integrate([n](double t) { return g_eval(t) * std::cos(n * t); }, 0.0, std::numbers::pi, bp, opts);
  r.value *= 2.0 / std::numbers::pi;
  r.error *= 2.0 / std::numbers::pi;
  return r;
}

struct EnvelopeCheck {
  bool ok = true;
  double lhs = 0.0;  // |(e^{i beta} - 1) x + (1 - e^{-i beta}) y|
  double rhs = 0.0;  // 4 g(beta)
};

/// |(e^{i beta} - 1) x + (1 - e^{-i beta}) y| <= 4 g(beta) + 1e-12 for x, y in [-2, 2].
inline EnvelopeCheck envelope_check(double beta, double x, double y) {
  if (!(x >= -2.0 && x <= 2.0 && y >= -2.0 && y <= 2.0)) {
    throw contract_error("envelope_check: x and y must lie in [-2, 2]");
  }
  const cplx e{std::cos(beta), std::sin(beta)};
  EnvelopeCheck c;
  c.lhs = std::abs((e - 1.0) * x + (1.0 - std::conj(e)) * y);
  c.rhs = 4.0 * g_eval(beta);
  c.ok = c.lhs <= c.rhs + 1e-12;
  return c;
}

/// 4 sum_{h<=H} g(2 pi alpha h)/h at one alpha.
inline double gh_lemma_value(double alpha, long H) {
  double s = 0.0;
  for (long h = 1; h <= H; ++h) s += g_of_turns(alpha * static_cast<double>(h)) / static_cast<double>(h);
  return 4.0 * s;
}

namespace detail {

/// c_h = (e(alpha h) - 1)/h for h = 1..H followed by h = -1..-H.
inline void gh_coefficients(double alpha, long H, std::vector<cplx>& c) {
  c.resize(2 * static_cast<std::size_t>(H));
  const double two_pi = 2.0 * std::numbers::pi;
  for (long h = 1; h <= H; ++h) {
    double x = alpha * static_cast<double>(h);
    x -= std::floor(x);
    const cplx e{std::cos(two_pi * x), std::sin(two_pi * x)};
    c[h - 1] = (e - 1.0) / static_cast<double>(h);
    c[H + h - 1] = (std::conj(e) - 1.0) / static_cast<double>(-h);
  }
}

/// max_{s in {+-1}^n} |sum s_h c_h|, the support function of a zonotope, by an
/// angular sweep: along theta in [0, pi) the optimal signs are sign Re(e^{-i theta} c_h),
/// and each sign flips exactly once.
inline double zonotope_radius(std::span<const cplx> c, std::vector<std::pair<double, std::size_t>>& events,
                              std::vector<signed char>& sign) {
  constexpr double pi = std::numbers::pi;
  events.clear();
  sign.assign(c.size(), 0);
  cplx z{0.0, 0.0};
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == cplx{0.0, 0.0}) continue;
    // Direction reduced to [0, pi); the sign at theta = 0 is +1 for that representative.
    double phi = std::arg(c[i]);
    signed char s = 1;
    if (phi < 0) {
      phi += pi;
      s = -1;
    }
    if (phi >= pi) {
      phi -= pi;
      s = static_cast<signed char>(-s);
    }
    // Re(e^{-i theta} c) with c = s |c| e^{i phi}: positive part flips at theta = phi + pi/2 (mod pi).
    double flip = phi + pi / 2;
    if (phi < pi / 2) {
      sign[i] = s;
    } else {
      sign[i] = static_cast<signed char>(-s);
      flip -= pi;
    }
    z += static_cast<double>(sign[i]) * c[i];
    events.emplace_back(flip, i);
  }
  std::sort(events.begin(), events.end());
  double best = std::abs(z);
  for (const auto& [theta, i] : events) {
    z -= 2.0 * static_cast<double>(sign[i]) * c[i];
    sign[i] = static_cast<signed char>(-sign[i]);
    best = std::max(best, std::abs(z));
  }
  return best;
}

/// max over theta on a grid of sum_h 2 |Re(e^{-i theta} c_h)|.
inline double theta_grid_value(std::span<const cplx> c, std::size_t theta_grid) {
  double best = 0.0;
  for (std::size_t j = 0; j < theta_grid; ++j) {
    const double th = std::numbers::pi * static_cast<double>(j) / static_cast<double>(theta_grid);
    const cplx rot{std::cos(th), -std::sin(th)};
    double s = 0.0;
    for (const cplx& ch : c) s += std::abs((rot * ch).real());
    best = std::max(best, 2.0 * s);
  }
  return best;
}

template <class F>
double golden_max(const F& fn, double lo, double hi, int steps, double& arg) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - inv_phi * (hi - lo), d = lo + inv_phi * (hi - lo);
  double fc = fn(c), fd = fn(d);
  for (int it = 0; it < steps; ++it) {
    if (fc > fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = fn(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = fn(d);
    }
  }
  arg = fc > fd ? c : d;
  return std::max(fc, fd);
}

}  // namespace detail

/// max_y |sum (e(alpha h) - 1)/h y_h| at a fixed alpha. theta_grid == 0 evaluates the
/// inner maximum exactly; otherwise it is approximated from below on a theta grid.
inline double gh_at_alpha(double alpha, long H, std::size_t theta_grid = 0) {
  std::vector<cplx> c;
  detail::gh_coefficients(alpha, H, c);
  if (theta_grid > 0) return detail::theta_grid_value(c, theta_grid);
  std::vector<std::pair<double, std::size_t>> events;
  std::vector<signed char> sign;
  return 2.0 * detail::zonotope_radius(c, events, sign);
}

struct GHEstimate {
  long H = 0;
  double value = 0.0;
  double argmax_alpha = 0.0;
  std::size_t alpha_grid = 0;
  std::size_t theta_grid = 0;
};

/// Lower estimate of G(H): the inner maximum at each alpha of an equispaced grid on
/// [0, 1/2] (G is symmetric under alpha -> 1 - alpha), then golden-section refinement
/// around the best grid points. alpha_grid == 0 selects 64 H.
inline GHEstimate estimate_GH(long H, std::size_t alpha_grid = 0, std::size_t theta_grid = 0,
                              unsigned workers = 1, int refine_steps = 40) {
  if (H < 1) throw contract_error("estimate_GH: H must be >= 1");
  const std::size_t N = alpha_grid == 0 ? 64 * static_cast<std::size_t>(H) : alpha_grid;
  if (N < 4) throw contract_error("estimate_GH: alpha_grid must be >= 4");
  const std::size_t half = N / 2;
  std::vector<double> vals(half + 1);
  const unsigned w = std::max(1u, workers);
  std::vector<std::vector<cplx>> cs(w);
  std::vector<std::vector<std::pair<double, std::size_t>>> evs(w);
  std::vector<std::vector<signed char>> sg(w);
  parallel_for(half + 1, w, [&](unsigned k, std::size_t j) {
    const double alpha = static_cast<double>(j) / static_cast<double>(N);
    detail::gh_coefficients(alpha, H, cs[k]);
    vals[j] = theta_grid > 0 ? detail::theta_grid_value(cs[k], theta_grid)
                             : 2.0 * detail::zonotope_radius(cs[k], evs[k], sg[k]);
  });
  // Refine around the three best local maxima.
  std::vector<std::size_t> order(half + 1);
  for (std::size_t j = 0; j <= half; ++j) order[j] = j;
  const std::size_t top = std::min<std::size_t>(3, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<long>(top), order.end(),
                    [&](std::size_t a, std::size_t b) { return vals[a] > vals[b] || (vals[a] == vals[b] && a < b); });
  GHEstimate est;
  est.H = H;
  est.alpha_grid = N;
  est.theta_grid = theta_grid;
  est.value = vals[order[0]];
  est.argmax_alpha = static_cast<double>(order[0]) / static_cast<double>(N);
  auto fn = [&](double a) { return gh_at_alpha(a, H, theta_grid); };
  for (std::size_t t = 0; t < top; ++t) {
    const double j = static_cast<double>(order[t]);
    const double lo = std::max(0.0, (j - 1.0) / static_cast<double>(N));
    const double hi = std::min(0.5, (j + 1.0) / static_cast<double>(N));
    double arg = 0.0;
    const double v = detail::golden_max(fn, lo, hi, refine_steps, arg);
    if (v > est.value) {
      est.value = v;
      est.argmax_alpha = arg;
    }
  }
  return est;
}

struct GHLemmaBound {
  long H = 0;
  double value = 0.0;
  double argmax_alpha = 0.0;
};

/// max_alpha 4 sum_{h<=H} g(2 pi alpha h)/h over a grid (default 64 H) on [0, 1/2],
/// refined around the best grid point, and also evaluated at the probe alphas.
inline GHLemmaBound gh_lemma_bound(long H, std::size_t alpha_grid = 0, std::span<const double> probes = {},
                                   unsigned workers = 1, int refine_steps = 40) {
  if (H < 1) throw contract_error("gh_lemma_bound: H must be >= 1");
  const std::size_t N = alpha_grid == 0 ? 64 * static_cast<std::size_t>(H) : alpha_grid;
  if (N < 4) throw contract_error("gh_lemma_bound: alpha_grid must be >= 4");
  const std::size_t half = N / 2;
  std::vector<double> vals(half + 1);
  parallel_for(half + 1, workers, [&](unsigned, std::size_t j) {
    vals[j] = gh_lemma_value(static_cast<double>(j) / static_cast<double>(N), H);
  });
  const auto it = std::max_element(vals.begin(), vals.end());
  const auto jb = static_cast<double>(it - vals.begin());
  GHLemmaBound b;
  b.H = H;
  b.value = *it;
  b.argmax_alpha = jb / static_cast<double>(N);
  double arg = 0.0;
  const double v = detail::golden_max([H](double a) { return gh_lemma_value(a, H); },
                                      std::max(0.0, (jb - 1.0) / static_cast<double>(N)),
                                      std::min(0.5, (jb + 1.0) / static_cast<double>(N)), refine_steps, arg);
  if (v > b.value) {
    b.value = v;
    b.argmax_alpha = arg;
  }
  for (double a : probes) {
    const double pv = gh_lemma_value(a, H);
    if (pv > b.value) {
      b.value = pv;
      b.argmax_alpha = a;
    }
  }
  return b;
}

struct SumGAsymptotic {
  double direct = 0.0;
  double main_terms = 0.0;
  double residual = 0.0;
  bool major_arc = false;
  long numerator = 0;    // b, major arcs only
  long denominator = 0;  // r, major arcs only
};

/// Rational b/r with r <= R and |alpha - b/r| <= 1/(r H), if one exists.
///
/// For r <= R <= log H the tolerance is below 1/(2 r^2), so by Legendre's theorem
/// any such b/r is a continued-fraction convergent of alpha.
inline std::optional<std::pair<long, long>> major_arc_rational(double alpha, long H, double R) {
  double x = alpha - std::floor(alpha);
  long p0 = 0, q0 = 1, p1 = 1, q1 = 0;  // convergents p_{k-2}/q_{k-2}, p_{k-1}/q_{k-1}
  double rest = x;
  for (int it = 0; it < 64; ++it) {
    const double a_k = std::floor(rest);
    const long a = static_cast<long>(a_k);
    const long p2 = a * p1 + p0, q2 = a * q1 + q0;
    if (static_cast<double>(q2) > R) break;
    if (q2 >= 1 && std::abs(x - static_cast<double>(p2) / static_cast<double>(q2)) <=
                       1.0 / (static_cast<double>(q2) * static_cast<double>(H))) {
      return std::pair<long, long>{p2, q2};
    }
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const double frac = rest - a_k;
    if (frac < 1e-15) break;
    rest = 1.0 / frac;
  }
  return std::nullopt;
}

/// Compares sum_{h<=H} g(2 pi alpha h)/h with the major-arc formula (alpha close to b/r
/// with r <= log H, evaluated at b/r) or the minor-arc formula otherwise.
inline SumGAsymptotic sum_g_asymptotic(double alpha, long H) {
  if (H < 16) throw contract_error("sum_g_asymptotic: H must be >= 16");
  SumGAsymptotic out;
  out.direct = gh_lemma_value(alpha, H) / 4.0;
  const double logH = std::log(static_cast<double>(H));
  const double R = logH;
  const auto Rn = static_cast<unsigned>(std::floor(R));
  auto log_abs_one_minus_e = [](double x) {
    x -= std::floor(x);
    return std::log(2.0 * std::abs(std::sin(std::numbers::pi * x)));
  };
  if (auto rat = major_arc_rational(alpha, H, R)) {
    const auto [b, r] = *rat;
    out.major_arc = true;
    out.numerator = b;
    out.denominator = r;
    double lead = fourier_a(0) / 2.0;
    for (unsigned m = 1; static_cast<double>(m * r) <= R; ++m) lead += fourier_a(static_cast<unsigned>(m * r));
    double rest = 0.0;
    for (unsigned n = 1; n <= Rn; ++n) {
      if (n % static_cast<unsigned>(r) == 0) continue;
      rest += fourier_a(n) * log_abs_one_minus_e(static_cast<double>(n) * static_cast<double>(b) / static_cast<double>(r));
    }
    out.main_terms = lead * logH - rest;
  } else {
    double rest = 0.0;
    for (unsigned n = 1; n <= Rn; ++n) rest += fourier_a(n) * log_abs_one_minus_e(n * alpha);
    out.main_terms = fourier_a(0) / 2.0 * logH - rest;
  }
  out.residual = out.direct - out.main_terms;
  return out;
}

struct IntegralResult {
  double value = 0.0;
  double error = 0.0;       // quadrature error estimate plus truncated tail remainder bound
  double stability = 0.0;   // |I(splits) - I(2 splits)|
  double cutoff = 0.0;      // T
  double tail = 0.0;        // analytic contribution of [T, inf)
  std::size_t intervals = 0;
};

namespace detail {

/// int_T^inf f(u)/u^2 du from f(u) = -(3/2) log u - (1/2) log(4 pi) - 3/(16u) - 3/(64u^2) + O(u^-3).
inline double f_integral_tail(double T) {
  return -1.5 * (std::log(T) + 1.0) / T - 0.5 * std::log(4.0 * std::numbers::pi) / T - 3.0 / (32.0 * T * T) -
         1.0 / (64.0 * T * T * T);
}

inline QuadratureResult f_integral_body(double T, std::size_t splits, double tol) {
  QuadratureOptions opts;
  opts.abs_tol = tol;
  opts.rel_tol = 0.0;
  opts.initial_splits = splits;
  opts.max_intervals = 200000;
  // [0, 1]: f(u)/u^2 is smooth with value 1/2 at 0.
  const auto a = integrate([](double u) { return f_over_t2(u); }, 0.0, 1.0, {}, opts);
  // [1, T] in v = log u: f(e^v) e^{-v} dv.
  const auto b = integrate([](double v) { return f_of_t(std::exp(v)) * std::exp(-v); }, 0.0, std::log(T), {},
                           opts);
  QuadratureResult r;
  r.value = a.value + b.value;
  r.error = a.error + b.error;
  r.intervals = a.intervals + b.intervals;
  r.converged = a.converged && b.converged;
  return r;
}

}  // namespace detail

/// I = int_0^inf f(u)/u^2 du, split at the jump u = 1, with the range beyond T = 1e4
/// integrated from the asymptotic expansion of f.
inline IntegralResult f_integral(std::size_t initial_splits = 4, double T = 1e4) {
  if (!(T > 1.0)) throw contract_error("f_integral: cutoff must exceed 1");
  const double tol = 1e-13;
  const auto r1 = detail::f_integral_body(T, initial_splits, tol);
  const auto r2 = detail::f_integral_body(T, 2 * initial_splits, tol);
  if (!r1.converged || !r2.converged) {
    throw convergence_error("f_integral: quadrature did not converge", r2.value + detail::f_integral_tail(T),
                            std::max(r1.error, r2.error));
  }
  IntegralResult out;
  out.cutoff = T;
  out.tail = detail::f_integral_tail(T);
  out.value = r2.value + out.tail;
  out.stability = std::abs(r1.value - r2.value);
  // The first omitted tail term is O(1/T^4).
  out.error = r2.error + out.stability + 1.0 / (T * T * T * T);
  out.intervals = r2.intervals;
  return out;
}

struct ConstantsReport {
  double I = 0.0;
  double I_error = 0.0;
  double I_stability = 0.0;
  double A0 = 0.0;
  double B0 = 0.0;
  double delta = 0.0;
  double A0_error = 0.0;
  double B0_error = 0.0;
  /// |A0 - (2/pi) exp(-(pi/2) B0 - 1)|
  double A0_identity_residual = 0.0;
  /// |(pi/2 - delta)(1/pi + 4/pi^2) - 1|
  double delta_identity_residual = 0.0;
};

/// A0 = exp(-gamma - 1 - I/2), B0 = (2/pi)(gamma + log 2 - log pi + I/2),
/// delta = (4 pi - pi^2)/(2 pi + 8).
inline ConstantsReport constants(std::size_t initial_splits = 4) {
  constexpr double pi = std::numbers::pi;
  const auto I = f_integral(initial_splits);
  ConstantsReport c;
  c.I = I.value;
  c.I_error = I.error;
  c.I_stability = I.stability;
  c.A0 = std::exp(-euler_gamma - 1.0 - c.I / 2.0);
  c.B0 = (2.0 / pi) * (euler_gamma + std::log(2.0) - std::log(pi) + c.I / 2.0);
  c.delta = (4.0 * pi - pi * pi) / (2.0 * pi + 8.0);
  c.A0_error = c.A0 * c.I_error / 2.0;
  c.B0_error = c.I_error / pi;
  c.A0_identity_residual = std::abs(c.A0 - (2.0 / pi) * std::exp(-(pi / 2.0) * c.B0 - 1.0));
  c.delta_identity_residual = std::abs((pi / 2.0 - c.delta) * (1.0 / pi + 4.0 / (pi * pi)) - 1.0);
  return c;
}

struct SaddleTail {
  double V = 0.0;
  double s = 0.0;
  double log_s = 0.0;
  /// exp(-A0 e^{pi V/2}) and its logarithm.
  double predicted_tail = 0.0;
  double log_tail = 0.0;
  /// Relative size sqrt(V) e^{-pi V/4} of the correction inside the outer exponent.
  double band = 0.0;
  double tail_low = 0.0;   // exp(-A0 e^{pi V/2} (1 + band))
  double tail_high = 0.0;  // exp(-A0 e^{pi V/2} (1 - band)), capped at 1
};

inline SaddleTail saddle_and_tail(double V, const ConstantsReport& c) {
  if (!(V > 0.0)) throw domain_error("saddle_and_tail requires V > 0");
  constexpr double pi = std::numbers::pi;
  SaddleTail t;
  t.V = V;
  t.log_s = pi * V / 2.0 - pi * c.B0 / 2.0 - 1.0;
  if (t.log_s > 709.0) throw overflow_error("saddle point overflows a double", t.log_s);
  t.s = std::exp(t.log_s);
  const double log_rate = std::log(c.A0) + pi * V / 2.0;  // log(A0 e^{pi V/2})
  if (log_rate > 709.0) throw overflow_error("tail exponent overflows a double", log_rate);
  const double rate = std::exp(log_rate);
  t.log_tail = -rate;
  t.predicted_tail = std::exp(t.log_tail);
  t.band = std::sqrt(V) * std::exp(-pi * V / 4.0);
  t.tail_low = std::exp(-rate * (1.0 + t.band));
  t.tail_high = std::min(1.0, std::exp(-rate * (1.0 - t.band)));
  return t;
}

}  // namespace birchmax
