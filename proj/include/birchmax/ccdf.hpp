#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace birchmax {

/// Sorted sample with complementary-CDF evaluation: ccdf(t) = #{x > t} / n.
class EmpiricalCCDF {
 public:
  EmpiricalCCDF() = default;
  explicit EmpiricalCCDF(std::vector<double> samples) : sorted_(std::move(samples)) {
    std::sort(sorted_.begin(), sorted_.end());
  }

  std::size_t size() const noexcept { return sorted_.size(); }
  bool empty() const noexcept { return sorted_.empty(); }
  std::span<const double> sorted() const noexcept { return sorted_; }

  double ccdf(double threshold) const {
    if (sorted_.empty()) return 0.0;
    const auto above = sorted_.end() - std::upper_bound(sorted_.begin(), sorted_.end(), threshold);
    return static_cast<double>(above) / static_cast<double>(sorted_.size());
  }

  double cdf(double threshold) const { return sorted_.empty() ? 0.0 : 1.0 - ccdf(threshold); }

  double min() const { return sorted_.empty() ? std::numeric_limits<double>::quiet_NaN() : sorted_.front(); }
  double max() const { return sorted_.empty() ? std::numeric_limits<double>::quiet_NaN() : sorted_.back(); }

  /// Lower median: exactly half of an even-sized sample lies strictly above it
  /// when the sample has no ties.
  double median() const { return quantile(0.5); }

  /// Order statistic x_(ceil(q n)) with q in (0, 1].
  double quantile(double q) const {
    if (sorted_.empty()) throw std::out_of_range("quantile of an empty sample");
    const double n = static_cast<double>(sorted_.size());
    auto idx = static_cast<std::size_t>(std::ceil(q * n));
    idx = std::clamp<std::size_t>(idx, 1, sorted_.size());
    return sorted_[idx - 1];
  }

  double mean() const {
    double s = 0.0;
    for (double v : sorted_) s += v;
    return sorted_.empty() ? 0.0 : s / static_cast<double>(sorted_.size());
  }

 private:
  std::vector<double> sorted_;
};

/// log(-log(q)) for a tail probability q in (0, 1); NaN outside.
inline double log_neg_log(double q) {
  if (!(q > 0.0 && q < 1.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::log(-std::log(q));
}

/// Least-squares slope of y against x.
inline double ls_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

/// Slope of log(-log ccdf(V)) against V over the V-range where the CCDF lies in
/// [lo, hi], sampled on `points` equispaced V values.
inline double tail_slope(const EmpiricalCCDF& dist, double lo, double hi, int points = 40) {
  // V range: from the (1-hi) quantile to the (1-lo) quantile.
  const double v_lo = dist.quantile(1.0 - hi);
  const double v_hi = dist.quantile(1.0 - lo);
  std::vector<double> xs, ys;
  for (int i = 0; i < points; ++i) {
    const double v = v_lo + (v_hi - v_lo) * i / (points - 1);
    const double q = dist.ccdf(v);
    if (q < lo || q > hi) continue;
    const double y = log_neg_log(q);
    if (std::isfinite(y)) {
      xs.push_back(v);
      ys.push_back(y);
    }
  }
  return ls_slope(xs, ys);
}

}  // namespace birchmax
