#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.

#include <algorithm>
#include <cmath>
#include <queue>
#include <span>
#include <vector>

#include "birchmax/errors.hpp"

namespace birchmax {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t intervals = 0;
  bool converged = false;
};

struct QuadratureOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-13;
  std::size_t max_intervals = 20000;
  /// Each starting piece is split into this many equal parts before adaptation.
  std::size_t initial_splits = 1;
};

namespace detail {

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gauss_kronrod_15(const F& f, double a, double b) {
  static constexpr double xk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                   0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                   0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                   0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr double wk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                   0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                   0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                   0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                   0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * wk[7];
  double gauss = fc * wg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * xk[j];
    const double s = f(c - dx) + f(c + dx);
    kronrod += wk[j] * s;
    if (j % 2 == 1) gauss += wg[j / 2] * s;
  }
  kronrod *= h;
  gauss *= h;
  return {a, b, kronrod, std::abs(kronrod - gauss)};
}

}  // namespace detail

/// Integrates f over [a, b] split at the given interior breakpoints, refining
/// the segment with the largest error estimate until the total estimate meets
/// max(abs_tol, rel_tol |I|).
template <class F>
QuadratureResult integrate(const F& f, double a, double b, std::span<const double> breakpoints = {},
                           QuadratureOptions opts = {}) {
  std::vector<double> edges{a};
  for (double x : breakpoints) {
    if (x > a && x < b) edges.push_back(x);
  }
  edges.push_back(b);
  std::sort(edges.begin(), edges.end());

  std::priority_queue<detail::Segment> heap;
  double total = 0.0, err = 0.0;
  const std::size_t splits = std::max<std::size_t>(1, opts.initial_splits);
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double width = (edges[i + 1] - edges[i]) / static_cast<double>(splits);
    for (std::size_t s = 0; s < splits; ++s) {
      const double lo = edges[i] + width * static_cast<double>(s);
      const double hi = s + 1 == splits ? edges[i + 1] : lo + width;
      auto seg = detail::gauss_kronrod_15(f, lo, hi);
      total += seg.value;
      err += seg.error;
      heap.push(seg);
    }
  }
  while (err > std::max(opts.abs_tol, opts.rel_tol * std::abs(total)) && heap.size() < opts.max_intervals) {
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;
    }
    const auto left = detail::gauss_kronrod_15(f, worst.a, mid);
    const auto right = detail::gauss_kronrod_15(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum from the segments to drop accumulated update rounding.
  QuadratureResult r;
  r.intervals = heap.size();
  while (!heap.empty()) {
    r.value += heap.top().value;
    r.error += heap.top().error;
    heap.pop();
  }
  r.converged = r.error <= std::max(opts.abs_tol, opts.rel_tol * std::abs(r.value));
  return r;
}

}  // namespace birchmax
