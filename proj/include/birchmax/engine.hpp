#pragma once

// Complete sums, checkpointed partial sums, max profiles and the cutoff
// coefficients that connect them.
//
// Every table is built for all a in F_p at once: the complete sum at a is
//   (1/sqrt p) sum_n e_p(f(n)) e_p(a n),
// i.e. one length-p DFT of n -> e_p(f(n)); a partial sum up to x is the same
// transform applied to the sequence truncated after n = x.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "birchmax/ccdf.hpp"
#include "birchmax/errors.hpp"
#include "birchmax/fft.hpp"
#include "birchmax/field.hpp"
#include "birchmax/parallel.hpp"

namespace birchmax {

struct EngineOptions {
  unsigned workers = 1;
  std::size_t naive_threshold = DftPlan::default_naive_threshold;
  /// Refuse any single table larger than this many bytes.
  std::size_t max_bytes = std::size_t{3} << 30;
  /// Largest p accepted by the O(p^2) exact max profile.
  std::uint64_t exact_mode_cap = 10000;
};

struct CompleteSumTable {
  TraceFamily family;
  std::uint64_t p = 0;
  /// Real projection of the normalized complete sums, indexed by a.
  std::vector<double> values;
  /// The sums before projection; imaginary parts are rounding noise.
  std::vector<cplx> complex_values;
  double max_imag_residue = 0.0;
};

/// Rows of normalized partial sums at cutoffs x_0 = 1 < x_1 < ... < x_L = p.
///
/// x_l = round(l p / L). Row l holds (1/sqrt p) sum_{0 <= n <= c_l} for every a,
/// where c_l = min(x_l, p - 1); the last row is therefore the complete sum.
struct CheckpointMatrix {
  TraceFamily family;
  std::uint64_t p = 0;
  std::uint32_t L = 0;
  std::vector<std::uint64_t> checkpoints;  // x_0..x_L
  std::vector<cplx> data;                  // (L + 1) rows of length p

  std::size_t rows() const { return checkpoints.size(); }
  std::span<const cplx> row(std::size_t l) const { return {data.data() + l * p, p}; }
  std::uint64_t cutoff(std::size_t l) const { return std::min(checkpoints[l], p - 1); }
};

enum class MaxMode { exact, checkpointed };

struct MaxProfile {
  TraceFamily family;
  std::uint64_t p = 0;
  MaxMode mode = MaxMode::exact;
  std::uint32_t L = 0;  // checkpointed mode only
  /// M[a] = max over cutoffs x of (1/sqrt p)|sum_{0<=n<=x}|, for every a in F_p.
  std::vector<double> M;
};

/// x_0 = 1, x_l = round(l p / L) for 0 < l < L, x_L = p.
inline std::vector<std::uint64_t> checkpoint_positions(std::uint64_t p, std::uint32_t L) {
  if (L < 2 || L > p) {
    throw contract_error("checkpoint count L = " + std::to_string(L) + " outside [2, p]");
  }
  std::vector<std::uint64_t> x(L + 1);
  x[0] = 1;
  for (std::uint32_t l = 1; l < L; ++l) x[l] = (2 * l * p + L) / (2 * static_cast<std::uint64_t>(L));
  x[L] = p;
  return x;
}

/// max(8, round(p^{1/8})).
inline std::uint32_t default_checkpoint_count(std::uint64_t p) {
  const auto l = static_cast<std::uint32_t>(std::lround(std::pow(static_cast<double>(p), 0.125)));
  return std::max<std::uint32_t>(8, l);
}

/// Per-prime, per-family machinery shared by every table builder: the phase
/// sequence f(n) mod p and a DFT plan of length p.
class SumEngine {
 public:
  SumEngine(TraceFamily family, std::shared_ptr<const FieldContext> ctx, EngineOptions opts = {})
      : family_(std::move(family)), ctx_(std::move(ctx)), opts_(opts) {
    if (family_.kind == FamilyKind::odd_polynomial && ctx_->p() <= static_cast<std::uint64_t>(family_.degree())) {
      throw domain_error("p must exceed the polynomial degree");
    }
    phase_ = phase_sequence(family_, *ctx_);
    base_.assign(ctx_->p(), cplx{0.0, 0.0});
    for (std::uint64_t n = first_index(family_); n < ctx_->p(); ++n) base_[n] = ctx_->unit(phase_[n]);
  }

  SumEngine(TraceFamily family, std::uint64_t p, EngineOptions opts = {})
      : SumEngine(std::move(family), std::make_shared<const FieldContext>(p), opts) {}

  const TraceFamily& family() const noexcept { return family_; }
  const FieldContext& field() const noexcept { return *ctx_; }
  std::uint64_t p() const noexcept { return ctx_->p(); }
  const EngineOptions& options() const noexcept { return opts_; }
  const std::vector<std::uint32_t>& phases() const noexcept { return phase_; }

  const DftPlan& plan() const {
    if (!plan_) plan_ = std::make_shared<const DftPlan>(p(), opts_.naive_threshold);
    return *plan_;
  }

  /// Normalized sums (1/sqrt p) sum_{first <= n <= x} e_p(f(n) + a n) for all a.
  std::vector<cplx> truncated_transform(std::uint64_t x, DftWorkspace& ws) const {
    std::vector<cplx> seq(p(), cplx{0.0, 0.0});
    std::copy(base_.begin(), base_.begin() + static_cast<std::ptrdiff_t>(std::min(x, p() - 1) + 1),
              seq.begin());
    plan().transform(seq, seq, +1, ws);
    const double scale = 1.0 / ctx_->sqrt_p();
    for (auto& v : seq) v *= scale;
    return seq;
  }

  CompleteSumTable complete_sums() const {
    check_bytes(p() * (sizeof(cplx) + sizeof(double)), "complete-sum table");
    DftWorkspace ws;
    CompleteSumTable t;
    t.family = family_;
    t.p = p();
    t.complex_values = truncated_transform(p() - 1, ws);
    t.values.resize(p());
    for (std::uint64_t a = 0; a < p(); ++a) {
      t.values[a] = t.complex_values[a].real();
      t.max_imag_residue = std::max(t.max_imag_residue, std::abs(t.complex_values[a].imag()));
    }
    return t;
  }

  /// Direct O(x) partial sum; the independent route for every table.
  cplx partial_sum(residue a, std::uint64_t x) const {
    if (x >= p()) throw contract_error("partial_sum: cutoff x must be < p");
    a %= p();
    cplx acc{0.0, 0.0};
    const std::uint64_t start = first_index(family_);
    std::uint64_t an = (a * start) % p();
    for (std::uint64_t n = start; n <= x; ++n) {
      std::uint64_t idx = phase_[n] + an;
      if (idx >= p()) idx -= p();
      acc += ctx_->unit(idx);
      an += a;
      if (an >= p()) an -= p();
    }
    return acc / ctx_->sqrt_p();
  }

  CheckpointMatrix checkpoint_matrix(std::uint32_t L) const {
    CheckpointMatrix m;
    m.family = family_;
    m.p = p();
    m.L = L;
    m.checkpoints = checkpoint_positions(p(), L);
    check_bytes(m.checkpoints.size() * p() * sizeof(cplx), "checkpoint matrix");
    m.data.resize(m.checkpoints.size() * p());
    const unsigned workers = std::max(1u, opts_.workers);
    std::vector<DftWorkspace> ws(workers);
    plan();
    parallel_for(m.checkpoints.size(), workers, [&](unsigned w, std::size_t l) {
      const auto row = truncated_transform(m.cutoff(l), ws[w]);
      std::copy(row.begin(), row.end(), m.data.begin() + static_cast<std::ptrdiff_t>(l * p()));
    });
    return m;
  }

  /// O(p^2): running partial sums over every cutoff x = 0..p-1.
  MaxProfile exact_max_profile() const {
    if (p() > opts_.exact_mode_cap) {
      throw resource_error("exact max profile refused: p = " + std::to_string(p()) +
                           " exceeds the exact-mode cap " + std::to_string(opts_.exact_mode_cap));
    }
    MaxProfile prof{family_, p(), MaxMode::exact, 0, std::vector<double>(p(), 0.0)};
    const std::uint64_t start = first_index(family_);
    parallel_for(p(), opts_.workers, [&](unsigned, std::size_t ai) {
      const std::uint64_t a = ai;
      cplx acc{0.0, 0.0};
      double best = 0.0;
      std::uint64_t an = (a * start) % p();
      for (std::uint64_t n = start; n < p(); ++n) {
        std::uint64_t idx = phase_[n] + an;
        if (idx >= p()) idx -= p();
        acc += ctx_->unit(idx);
        best = std::max(best, std::norm(acc));
        an += a;
        if (an >= p()) an -= p();
      }
      prof.M[a] = std::sqrt(best) / ctx_->sqrt_p();
    });
    return prof;
  }

  /// Max over the L + 1 checkpoint rows, streamed so only one row per worker
  /// is resident.
  MaxProfile checkpointed_max_profile(std::uint32_t L) const {
    const auto xs = checkpoint_positions(p(), L);
    const unsigned workers = std::max(1u, opts_.workers);
    check_bytes((workers + 2) * p() * sizeof(cplx), "checkpointed max profile");
    std::vector<DftWorkspace> ws(workers);
    std::vector<std::vector<double>> per_worker(workers, std::vector<double>(p(), 0.0));
    plan();
    parallel_for(xs.size(), workers, [&](unsigned w, std::size_t l) {
      const auto row = truncated_transform(std::min(xs[l], p() - 1), ws[w]);
      auto& best = per_worker[w];
      for (std::uint64_t a = 0; a < p(); ++a) best[a] = std::max(best[a], std::abs(row[a]));
    });
    MaxProfile prof{family_, p(), MaxMode::checkpointed, L, std::vector<double>(p(), 0.0)};
    for (const auto& best : per_worker) {
      for (std::uint64_t a = 0; a < p(); ++a) prof.M[a] = std::max(prof.M[a], best[a]);
    }
    return prof;
  }

  /// Row at x = (p-1)/2: (1/sqrt p) sum_{0 <= n <= p/2} e_p(f(n) + a n) for all a.
  std::vector<cplx> half_sums() const {
    DftWorkspace ws;
    return truncated_transform((p() - 1) / 2, ws);
  }

 private:
  void check_bytes(std::size_t bytes, const char* what) const {
    if (bytes > opts_.max_bytes) {
      throw resource_error(std::string(what) + " needs " + std::to_string(bytes) +
                           " bytes, above the configured cap of " + std::to_string(opts_.max_bytes));
    }
  }

  TraceFamily family_;
  std::shared_ptr<const FieldContext> ctx_;
  EngineOptions opts_;
  std::vector<std::uint32_t> phase_;
  std::vector<cplx> base_;
  mutable std::shared_ptr<const DftPlan> plan_;
};

inline CompleteSumTable complete_sums(const TraceFamily& family, std::uint64_t p,
                                      EngineOptions opts = {}) {
  return SumEngine(family, p, opts).complete_sums();
}

inline MaxProfile max_profile(const SumEngine& engine, MaxMode mode, std::uint32_t L = 0) {
  if (mode == MaxMode::exact) return engine.exact_max_profile();
  return engine.checkpointed_max_profile(L == 0 ? default_checkpoint_count(engine.p()) : L);
}

/// Phi_p: the distribution of M[a] over a in F_p^x (a = 0 excluded).
inline EmpiricalCCDF phi_distribution(const MaxProfile& profile) {
  return EmpiricalCCDF(std::vector<double>(profile.M.begin() + 1, profile.M.end()));
}

/// N_p: the distribution of the imaginary half sums over a in F_p^x.
inline EmpiricalCCDF half_sum_distribution(std::span<const double> im_half) {
  return EmpiricalCCDF(std::vector<double>(im_half.begin() + 1, im_half.end()));
}

/// Symmetric representative of h mod p in (-p/2, p/2).
inline std::int64_t symmetric_residue(std::int64_t h, std::uint64_t p) {
  auto r = static_cast<std::int64_t>(reduce_signed(h, p));
  if (r > static_cast<std::int64_t>(p / 2)) r -= static_cast<std::int64_t>(p);
  return r;
}

/// gamma_p(h; x) = (1/sqrt p) sum_{0 <= m <= x} e_p(m h), |h| < p/2.
///
/// Evaluated as e^{pi i h x/p} sin(pi h (x+1)/p) / sin(pi h/p) with every
/// angle reduced modulo 2p in integer arithmetic.
inline cplx gamma_coefficient(const FieldContext& ctx, std::int64_t h, std::uint64_t x) {
  const std::uint64_t p = ctx.p();
  if (x >= p) throw contract_error("gamma_coefficient: x must be < p");
  if (2 * static_cast<std::uint64_t>(std::llabs(h)) >= p) {
    throw contract_error("gamma_coefficient: |h| must be < p/2");
  }
  const double sp = ctx.sqrt_p();
  if (h == 0) return cplx{static_cast<double>(x + 1) / sp, 0.0};
  const std::uint64_t two_p = 2 * p;
  auto angle = [&](std::uint64_t k) {
    return std::numbers::pi * static_cast<double>(k % two_p) / static_cast<double>(p);
  };
  const std::uint64_t hm = reduce_signed(h, two_p);
  const double num = std::sin(angle(mul_mod(hm, x + 1, two_p)));
  const double den = std::sin(angle(hm));
  const double ph = angle(mul_mod(hm, x, two_p));
  return cplx{std::cos(ph), std::sin(ph)} * (num / den / sp);
}

/// gamma_p(h) in the half-interval normalization: (1/p) sum_{0 <= m <= p/2} e_p(m h).
/// gamma_p(0) = 1/2 + 1/(2p). Equals gamma_coefficient(h, (p-1)/2) / sqrt(p).
inline cplx half_gamma(const FieldContext& ctx, std::int64_t h) {
  return gamma_coefficient(ctx, h, (ctx.p() - 1) / 2) / ctx.sqrt_p();
}

/// Im gamma_p(h) for every residue h (index h mod p); index 0 holds 0.
inline std::vector<double> half_gamma_imag_table(const FieldContext& ctx) {
  const std::uint64_t p = ctx.p();
  std::vector<double> g(p, 0.0);
  const auto half = static_cast<std::int64_t>(p / 2);
  for (std::int64_t h = -half; h <= half; ++h) {
    if (h == 0) continue;
    g[reduce_signed(h, p)] = half_gamma(ctx, h).imag();
  }
  return g;
}

/// (1/sqrt p) sum_{|h| < p/2} gamma_p(h; x) S(a - h), with S the complex complete sums.
/// An exact identity: equals the partial sum up to x.
inline cplx plancherel_reconstruct(const FieldContext& ctx, const CompleteSumTable& table,
                                   residue a, std::uint64_t x) {
  const std::uint64_t p = ctx.p();
  const auto half = static_cast<std::int64_t>(p / 2);
  cplx acc{0.0, 0.0};
  for (std::int64_t h = -half; h <= half; ++h) {
    const residue idx = reduce_signed(static_cast<std::int64_t>(a % p) - h, p);
    acc += gamma_coefficient(ctx, h, x) * table.complex_values[idx];
  }
  return acc / ctx.sqrt_p();
}

/// out[a] = sum_h c[h] v[a - h] over Z/pZ.
inline std::vector<cplx> cyclic_convolve(const DftPlan& plan, std::span<const cplx> c,
                                         std::span<const cplx> v) {
  const std::size_t p = plan.size();
  DftWorkspace ws;
  std::vector<cplx> fc(c.begin(), c.end()), fv(v.begin(), v.end());
  plan.transform(fc, fc, -1, ws);
  plan.transform(fv, fv, -1, ws);
  for (std::size_t i = 0; i < p; ++i) fc[i] *= fv[i];
  plan.transform(fc, fc, +1, ws);
  const double scale = 1.0 / static_cast<double>(p);
  for (auto& z : fc) z *= scale;
  return fc;
}

/// Convolution of real weights with the real complete sums: sum_h c[h] Bi(a - h).
inline std::vector<cplx> convolve_with_table(const DftPlan& plan, std::span<const cplx> weights,
                                             const CompleteSumTable& table) {
  std::vector<cplx> v(table.values.begin(), table.values.end());
  return cyclic_convolve(plan, weights, v);
}

/// Im of the half-interval row for every a.
inline std::vector<double> imag_half_sums(const SumEngine& engine) {
  const auto row = engine.half_sums();
  std::vector<double> im(row.size());
  for (std::size_t a = 0; a < row.size(); ++a) im[a] = row[a].imag();
  return im;
}

/// The same quantity through sum_h Im(gamma_p(h)) Bi(a - h); valid for real tables.
inline std::vector<double> imag_half_sums_by_convolution(const SumEngine& engine,
                                                         const CompleteSumTable& table) {
  const auto g = half_gamma_imag_table(engine.field());
  std::vector<cplx> w(g.begin(), g.end());
  const auto conv = convolve_with_table(engine.plan(), w, table);
  std::vector<double> out(conv.size());
  for (std::size_t a = 0; a < conv.size(); ++a) out[a] = conv[a].real();
  return out;
}

struct ShortIntervalReport {
  std::uint64_t interval_length = 0;
  std::size_t samples = 0;
  double epsilon = 0.05;
  double max_ratio = 0.0;
  double mean_ratio = 0.0;
  double max_modulus = 0.0;
  residue argmax_a = 0;
  std::uint64_t argmax_start = 0;
  bool exploratory = false;  // Kloosterman: the comparison bound is conjectural
};

/// |sum_{n in I} e_p(phase)| for random (a, I), against |I|^{1/4+eps} p^{1/4}
/// (polynomial phases) or |I|^{1-eps} (Kloosterman).
inline ShortIntervalReport short_interval_scan(const SumEngine& engine, std::uint64_t length,
                                               std::size_t samples, std::uint64_t seed,
                                               double epsilon = 0.05) {
  const std::uint64_t p = engine.p();
  if (length == 0 || length > p - 1) throw contract_error("interval length must lie in [1, p-1]");
  ShortIntervalReport rep;
  rep.interval_length = length;
  rep.samples = samples;
  rep.epsilon = epsilon;
  rep.exploratory = engine.family().kind == FamilyKind::kloosterman;
  const double len = static_cast<double>(length);
  const double scale = rep.exploratory ? std::pow(len, 1.0 - epsilon)
                                       : std::pow(len, 0.25 + epsilon) * std::pow(static_cast<double>(p), 0.25);
  std::mt19937_64 rng(seed);
  const auto& ph = engine.phases();
  double total = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const residue a = 1 + rng() % (p - 1);
    const std::uint64_t start = 1 + rng() % (p - length);  // I = [start, start + length) inside [1, p-1]
    cplx acc{0.0, 0.0};
    for (std::uint64_t n = start; n < start + length; ++n) {
      acc += engine.field().unit((ph[n] + mul_mod(a, n, p)) % p);
    }
    const double mod = std::abs(acc);
    const double ratio = mod / scale;
    total += ratio;
    if (ratio > rep.max_ratio) {
      rep.max_ratio = ratio;
      rep.argmax_a = a;
      rep.argmax_start = start;
    }
    rep.max_modulus = std::max(rep.max_modulus, mod);
  }
  rep.mean_ratio = samples ? total / static_cast<double>(samples) : 0.0;
  return rep;
}

}  // namespace birchmax
