#pragma once

// Arithmetic averages over a in F_p^x compared with the independent Sato-Tate
// model: shifted products, weighted sums, Laplace transforms, equidistribution,
// the max-tail moment and the largest half-interval sums.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "birchmax/engine.hpp"
#include "birchmax/errors.hpp"
#include "birchmax/sato_tate.hpp"

namespace birchmax {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct MomentComparison {
  cplx arithmetic{0.0, 0.0};
  cplx model{0.0, 0.0};
  /// The error expression without its implied constant.
  double bound = 0.0;
  double gap = 0.0;
  /// k + l exceeds the range in which the asymptotic is proven at this p.
  bool extrapolated = false;
};

inline void require_table(const CompleteSumTable& t) {
  if (t.p == 0 || t.values.size() != t.p) throw contract_error("complete-sum table unavailable");
}

/// (1/(p-1)) sum_{a in F_p^x} prod_i values[a - h_i].
inline double mixed_moment_arithmetic(const CompleteSumTable& table, std::span<const std::int64_t> shifts) {
  require_table(table);
  if (table.p <= 7) throw contract_error("mixed_moment_arithmetic requires p > 7");
  if (shifts.empty()) throw contract_error("mixed_moment_arithmetic requires k >= 1");
  const std::uint64_t p = table.p;
  std::vector<residue> off(shifts.size());
  for (std::size_t i = 0; i < shifts.size(); ++i) off[i] = reduce_signed(-shifts[i], p);
  CompensatedSum acc;
  for (residue a = 1; a < p; ++a) {
    double prod = 1.0;
    for (residue o : off) {
      residue idx = a + o;
      if (idx >= p) idx -= p;
      prod *= table.values[idx];
    }
    acc.add(prod);
  }
  return acc.value() / static_cast<double>(p - 1);
}

/// E(X(h_1) ... X(h_k)) for independent Sato-Tate X(h): prod of Catalan numbers over
/// the multiplicities, 0 if any multiplicity is odd.
inline double mixed_moment_model(std::span<const std::int64_t> shifts) {
  std::map<std::int64_t, unsigned> mult;
  for (auto h : shifts) ++mult[h];
  double prod = 1.0;
  for (const auto& [h, m] : mult) prod *= static_cast<double>(st_moment(m));
  return prod;
}

/// 2^k k / sqrt(p).
inline double algebraic_error_term(unsigned k, std::uint64_t p) {
  return std::ldexp(static_cast<double>(k), static_cast<int>(k)) / std::sqrt(static_cast<double>(p));
}

/// Weights c(h) for y <= |h| < z placed at h mod p, plus the list of those c(h).
struct WeightVector {
  std::vector<cplx> by_residue;
  std::vector<cplx> support;
  double l1 = 0.0;
};

inline WeightVector make_weights(std::uint64_t p, const std::function<cplx(std::int64_t)>& c, double y, double z) {
  if (!(y >= 0.0 && y < z && z <= static_cast<double>(p) / 2.0)) {
    throw contract_error("weights require 0 <= y < z <= p/2");
  }
  WeightVector w;
  w.by_residue.assign(p, cplx{0.0, 0.0});
  const auto hmax = static_cast<std::int64_t>(std::ceil(z)) - 1;
  for (std::int64_t h = -hmax; h <= hmax; ++h) {
    const double ah = std::abs(static_cast<double>(h));
    if (ah < y || ah >= z) continue;
    const cplx v = c(h);
    w.by_residue[reduce_signed(h, p)] += v;
    w.support.push_back(v);
    w.l1 += std::abs(v);
  }
  return w;
}

/// Compares (1/(p-1)) sum_a (sum c(h) Bi(a-h))^k (sum conj(c(h)) Bi(a-h))^l with the
/// model moment; the inner sums for all a come from one cyclic convolution.
inline MomentComparison weighted_moment_pair(const CompleteSumTable& table, const DftPlan& plan,
                                             const std::function<cplx(std::int64_t)>& c, double y, double z,
                                             unsigned k, unsigned l, MomentOracleLimits limits = {}) {
  require_table(table);
  if (plan.size() != table.p) throw contract_error("DFT plan length differs from p");
  const std::uint64_t p = table.p;
  const auto w = make_weights(p, c, y, z);
  MomentComparison out;
  out.model = moment_oracle(w.support, k, l, limits);
  const auto A = convolve_with_table(plan, w.by_residue, table);
  CompensatedSum re, im;
  for (residue a = 1; a < p; ++a) {
    // Bi is real, so the conjugate-weight sum is conj(A(a)).
    const cplx v = std::pow(A[a], static_cast<int>(k)) * std::pow(std::conj(A[a]), static_cast<int>(l));
    re.add(v.real());
    im.add(v.imag());
  }
  out.arithmetic = cplx{re.value(), im.value()} / static_cast<double>(p - 1);
  out.bound = std::pow(4.0 * w.l1, static_cast<double>(k + l)) / std::sqrt(static_cast<double>(p));
  out.gap = std::abs(out.arithmetic - out.model);
  out.extrapolated = static_cast<double>(std::max(k, l)) > std::log(static_cast<double>(p)) / 4.0;
  return out;
}

/// 6 max(log log p, 1).
inline double default_exclusion_threshold(std::uint64_t p) {
  return 6.0 * std::max(std::log(std::log(static_cast<double>(p))), 1.0);
}

struct LaplaceResult {
  double s = 0.0;
  double value = 0.0;
  double log_value = 0.0;
  double threshold = 0.0;
  std::size_t excluded = 0;
};

/// (1/(p-1)) sum_{a in F_p^x, |v(a)| < threshold} exp(s v(a)) with v(a) = Im of the
/// normalized half-interval sum (equivalently sum_h Im gamma_p(h) Bi(a - h)).
inline LaplaceResult arithmetic_laplace(std::span<const double> im_half, double s, double threshold,
                                        double s_cap = 64.0) {
  if (std::abs(s) > s_cap) throw contract_error("arithmetic_laplace: |s| exceeds the configured cap");
  const std::size_t p = im_half.size();
  if (p < 3) throw contract_error("arithmetic_laplace: table too small");
  LaplaceResult r;
  r.s = s;
  r.threshold = threshold;
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 1; a < p; ++a) {
    if (std::abs(im_half[a]) >= threshold) {
      ++r.excluded;
      continue;
    }
    top = std::max(top, s * im_half[a]);
  }
  if (r.excluded == p - 1) {
    r.value = 0.0;
    r.log_value = -std::numeric_limits<double>::infinity();
    return r;
  }
  CompensatedSum acc;
  for (std::size_t a = 1; a < p; ++a) {
    if (std::abs(im_half[a]) >= threshold) continue;
    acc.add(std::exp(s * im_half[a] - top));
  }
  r.log_value = top + std::log(acc.value() / static_cast<double>(p - 1));
  r.value = std::exp(r.log_value);
  return r;
}

/// Coefficients Im gamma_p(h) for 1 <= |h| < p/2 (the h = 0 term vanishes).
inline std::vector<double> half_gamma_imag_coefficients(const FieldContext& ctx) {
  auto t = half_gamma_imag_table(ctx);
  t.erase(t.begin());
  return t;
}

/// sup_x |F_n(x) - F(x)| for the empirical law of the sample.
inline double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw contract_error("ks_distance of an empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double F = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  return d;
}

inline std::vector<double> nonzero_values(const CompleteSumTable& table) {
  require_table(table);
  return {table.values.begin() + 1, table.values.end()};
}

/// KS distance between {Bi_p(a) : a in F_p^x} and the Sato-Tate law.
inline double ks_sato_tate(const CompleteSumTable& table) {
  if (table.p <= 7) throw contract_error("ks_sato_tate requires p > 7");
  return ks_distance(nonzero_values(table), st_cdf);
}

/// KS distance to the uniform law on [-2, 2], as a contrast.
inline double ks_uniform(const CompleteSumTable& table) {
  return ks_distance(nonzero_values(table), [](double x) { return std::clamp((x + 2.0) / 4.0, 0.0, 1.0); });
}

struct MaxTailResult {
  double value = 0.0;
  /// e^{-2k} + |S| (4 log p)^{10k} / sqrt(p)
  double rhs = 0.0;
  double y = 0.0;
  unsigned k = 0;
  std::size_t set_size = 0;
  /// The proven regime needs y = 1e5 k < p/2 and k <= log p / (100 log log p).
  bool monitor_only = true;
};

/// y = min(1e5 k, p/4).
inline double default_tail_cut(unsigned k, std::uint64_t p) {
  return std::min(1e5 * static_cast<double>(k), static_cast<double>(p) / 4.0);
}

/// (1/(p-1)) sum_a max_{alpha in S} |sum_{y<=|h|<p/2} (e(alpha h) - 1)/h Bi(a-h)|^{2k}.
inline MaxTailResult max_tail_moment(const CompleteSumTable& table, const DftPlan& plan,
                                     std::span<const double> alphas, double y, unsigned k,
                                     std::size_t max_set = 64) {
  require_table(table);
  if (alphas.empty()) throw contract_error("max_tail_moment: S must be non-empty");
  if (alphas.size() > max_set) {
    throw resource_error("max_tail_moment: |S| = " + std::to_string(alphas.size()) + " exceeds " +
                         std::to_string(max_set));
  }
  if (k < 1) throw contract_error("max_tail_moment: k must be >= 1");
  const std::uint64_t p = table.p;
  std::vector<double> best(p, 0.0);
  for (double alpha : alphas) {
    auto c = [alpha](std::int64_t h) {
      double x = alpha * static_cast<double>(h);
      x -= std::floor(x);
      const double t = 2.0 * std::numbers::pi * x;
      return (cplx{std::cos(t), std::sin(t)} - 1.0) / static_cast<double>(h);
    };
    const auto w = make_weights(p, c, std::max(y, 1.0), static_cast<double>(p) / 2.0);
    const auto conv = convolve_with_table(plan, w.by_residue, table);
    for (residue a = 1; a < p; ++a) best[a] = std::max(best[a], std::abs(conv[a]));
  }
  CompensatedSum acc;
  for (residue a = 1; a < p; ++a) acc.add(std::pow(best[a], 2.0 * k));
  MaxTailResult r;
  r.value = acc.value() / static_cast<double>(p - 1);
  const double lp = std::log(static_cast<double>(p));
  r.rhs = std::exp(-2.0 * k) + static_cast<double>(alphas.size()) * std::pow(4.0 * lp, 10.0 * k) /
                                   std::sqrt(static_cast<double>(p));
  r.y = y;
  r.k = k;
  r.set_size = alphas.size();
  r.monitor_only = !(1e5 * k < static_cast<double>(p) / 2.0 && k <= lp / (100.0 * std::log(lp)));
  return r;
}

struct ExtremeEntry {
  residue a = 0;
  double modulus = 0.0;  // |sum_{0<=n<=p/2} e_p(f(n) + a n)|
  double ratio = 0.0;    // modulus / ((2/pi) sqrt(p) log log p)
};

struct ExtremeReport {
  std::vector<ExtremeEntry> top;
  double benchmark = 0.0;  // (2/pi) sqrt(p) log log p
  double mean_modulus = 0.0;
  std::vector<std::pair<double, std::size_t>> counts;  // (ratio threshold, #a at or above it)
};

/// Ranks a in F_p^x by the modulus of the half-interval sum.
inline ExtremeReport extreme_search(std::span<const cplx> half_row, std::size_t top_k,
                                    std::span<const double> thresholds = {}) {
  const std::size_t p = half_row.size();
  if (p <= 7) throw contract_error("extreme_search requires p > 7");
  const double sp = std::sqrt(static_cast<double>(p));
  ExtremeReport rep;
  rep.benchmark = (2.0 / std::numbers::pi) * sp * std::log(std::log(static_cast<double>(p)));
  std::vector<ExtremeEntry> all;
  all.reserve(p - 1);
  CompensatedSum total;
  for (std::size_t a = 1; a < p; ++a) {
    const double m = std::abs(half_row[a]) * sp;
    all.push_back({a, m, m / rep.benchmark});
    total.add(m);
  }
  rep.mean_modulus = total.value() / static_cast<double>(p - 1);
  const std::size_t k = std::min(top_k, all.size());
  auto cmp = [](const ExtremeEntry& x, const ExtremeEntry& y) {
    return x.modulus > y.modulus || (x.modulus == y.modulus && x.a < y.a);
  };
  std::partial_sort(all.begin(), all.begin() + static_cast<long>(k), all.end(), cmp);
  rep.top.assign(all.begin(), all.begin() + static_cast<long>(k));
  static constexpr double default_thresholds[] = {0.25, 0.5, 0.75, 1.0};
  std::span<const double> th = thresholds.empty() ? std::span<const double>(default_thresholds) : thresholds;
  for (double t : th) {
    std::size_t n = 0;
    for (const auto& e : all) n += e.ratio >= t;
    rep.counts.emplace_back(t, n);
  }
  return rep;
}

}  // namespace birchmax
