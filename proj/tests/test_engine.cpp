#include <gtest/gtest.h>

#include <random>

#include "birchmax/engine.hpp"
#include "oracles.hpp"

using namespace birchmax;

TEST(Engine, CompleteSumsMatchDirectLoop) {
  for (std::uint64_t p : {11ull, 101ull, 1009ull}) {
    const auto t = complete_sums(TraceFamily::birch(), p);
    for (std::uint64_t a = 0; a < p; a += (p > 200 ? 37 : 1)) {
      const auto ref = oracle::birch_partial(static_cast<std::int64_t>(p), static_cast<std::int64_t>(a),
                                             static_cast<std::int64_t>(p - 1));
      EXPECT_NEAR(t.values[a], ref.real(), 1e-11) << p << " " << a;
      EXPECT_NEAR(ref.imag(), 0.0, 1e-10);
    }
  }
  const auto k = complete_sums(TraceFamily::kloosterman(), 101);
  for (std::int64_t a = 0; a < 101; ++a) {
    EXPECT_NEAR(k.values[a], oracle::kloosterman_partial(101, a, 100).real(), 1e-12);
  }
}

TEST(Engine, TransformAgreesWithNaivePathUpTo2003) {
  for (std::uint64_t p : {101ull, 1009ull, 2003ull}) {
    EngineOptions chirp;
    chirp.naive_threshold = 0;
    const auto a = SumEngine(TraceFamily::birch(), p, chirp).complete_sums();
    const auto b = complete_sums(TraceFamily::birch(), p);
    for (std::uint64_t i = 0; i < p; ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-9);
  }
}

TEST(Engine, WeilBoundRealityAndOrthogonality) {
  for (std::uint64_t p : {1009ull, 10007ull}) {
    for (const auto& fam : {TraceFamily::birch(), TraceFamily::kloosterman(),
                            TraceFamily::odd_polynomial({0, 0, 0, 1, 0, 1})}) {
      const auto t = complete_sums(fam, p);
      double mx = 0;
      cplx sum{0, 0};
      for (std::uint64_t a = 0; a < p; ++a) {
        mx = std::max(mx, std::abs(t.values[a]));
        sum += t.complex_values[a];
      }
      const double sp = std::sqrt(static_cast<double>(p));
      EXPECT_LE(mx, fam.weil_bound() + 1e-8) << fam.name();
      EXPECT_LE(t.max_imag_residue, 1e-8 * sp);
      // sum_a S(a) = sqrt(p) * (n = 0 term): 1 for polynomial phases, absent for Kloosterman.
      const double expected = fam.kind == FamilyKind::kloosterman ? 0.0 : sp;
      EXPECT_NEAR(sum.real(), expected, 1e-8 * sp) << fam.name();
      EXPECT_NEAR(sum.imag(), 0.0, 1e-8 * sp);
    }
  }
}

TEST(Engine, KnownSmallValues) {
  // p = 3: n^3 = n mod 3, so Bi_3(a) = (1/sqrt 3) sum_n e_3((1+a) n) = sqrt 3 [a = 2].
  const auto t = complete_sums(TraceFamily::birch(), 3);
  EXPECT_NEAR(t.values[2], std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(t.values[0], 0.0, 1e-12);
  EXPECT_NEAR(t.values[1], 0.0, 1e-12);
}

TEST(Engine, CheckpointPositions) {
  const auto x = checkpoint_positions(101, 4);
  ASSERT_EQ(x.size(), 5u);
  EXPECT_EQ(x.front(), 1u);
  EXPECT_EQ(x.back(), 101u);
  EXPECT_EQ(x[1], 25u);   // 25.25
  EXPECT_EQ(x[2], 51u);   // 50.5 rounds up
  EXPECT_EQ(x[3], 76u);   // 75.75
  EXPECT_THROW(checkpoint_positions(101, 1), contract_error);
  EXPECT_THROW(checkpoint_positions(101, 102), contract_error);
  EXPECT_EQ(default_checkpoint_count(10007), 8u);
}

TEST(Engine, CheckpointRowsArePartialSums) {
  const std::uint64_t p = 1009;
  SumEngine eng(TraceFamily::birch(), p);
  const auto m = eng.checkpoint_matrix(8);
  const auto full = eng.complete_sums();
  ASSERT_EQ(m.rows(), 9u);
  for (std::uint64_t a = 0; a < p; a += 101) {
    for (std::size_t l = 0; l < m.rows(); ++l) {
      const auto ref = oracle::birch_partial(static_cast<std::int64_t>(p), static_cast<std::int64_t>(a),
                                             static_cast<std::int64_t>(m.cutoff(l)));
      EXPECT_NEAR(std::abs(m.row(l)[a] - ref), 0.0, 1e-11);
    }
    EXPECT_NEAR(std::abs(m.row(8)[a] - full.complex_values[a]), 0.0, 1e-12);
  }
}

TEST(Engine, MaxProfilesAndSubsetProperty) {
  const std::uint64_t p = 1009;
  SumEngine eng(TraceFamily::birch(), p);
  const auto exact = max_profile(eng, MaxMode::exact);
  const auto chk = max_profile(eng, MaxMode::checkpointed, 16);
  for (std::uint64_t a = 0; a < p; ++a) {
    EXPECT_LE(chk.M[a], exact.M[a] + 1e-12);
    EXPECT_GE(exact.M[a], 1.0 / std::sqrt(static_cast<double>(p)) - 1e-15);  // x = 0 term
  }
  // Brute-force maximum for a few a.
  for (std::int64_t a : {1, 17, 500}) {
    double best = 0;
    cplx s{0, 0};
    for (std::int64_t n = 0; n < static_cast<std::int64_t>(p); ++n) {
      s += oracle::e_p((n * n % p) * n % p + a * n % p, p);
      best = std::max(best, std::abs(s));
    }
    EXPECT_NEAR(exact.M[a], best / std::sqrt(static_cast<double>(p)), 1e-10);
  }
  EngineOptions tiny;
  tiny.exact_mode_cap = 1000;
  EXPECT_THROW(SumEngine(TraceFamily::birch(), p, tiny).exact_max_profile(), resource_error);
}

TEST(Engine, WorkersGiveIdenticalResults) {
  EngineOptions one, four;
  four.workers = 4;
  one.naive_threshold = four.naive_threshold = 0;
  const auto a = SumEngine(TraceFamily::birch(), 10007, one).checkpoint_matrix(8);
  const auto b = SumEngine(TraceFamily::birch(), 10007, four).checkpoint_matrix(8);
  EXPECT_EQ(a.data, b.data);
  const auto pa = SumEngine(TraceFamily::birch(), 10007, one).checkpointed_max_profile(8);
  const auto pb = SumEngine(TraceFamily::birch(), 10007, four).checkpointed_max_profile(8);
  EXPECT_EQ(pa.M, pb.M);
}

TEST(Engine, PlancherelIdentity) {
  for (std::uint64_t p : {101ull, 1009ull}) {
    auto ctx = std::make_shared<const FieldContext>(p);
    for (const auto& fam : {TraceFamily::birch(), TraceFamily::kloosterman()}) {
      SumEngine eng(fam, ctx);
      const auto t = eng.complete_sums();
      std::mt19937_64 rng(p);
      for (int i = 0; i < 20; ++i) {
        const residue a = rng() % p;
        const std::uint64_t x = rng() % p;
        EXPECT_NEAR(std::abs(plancherel_reconstruct(*ctx, t, a, x) - eng.partial_sum(a, x)), 0.0, 1e-9);
      }
    }
  }
}

TEST(Engine, GammaCoefficients) {
  FieldContext ctx(1009);
  // gamma(h; x) = (1/sqrt p) sum_{m <= x} e_p(m h), directly.
  for (std::int64_t h : {-504, -3, 0, 1, 2, 250}) {
    for (std::uint64_t x : {0ull, 1ull, 504ull, 1008ull}) {
      cplx s{0, 0};
      for (std::uint64_t m = 0; m <= x; ++m) s += oracle::e_p(static_cast<std::int64_t>(m) * h, 1009);
      EXPECT_NEAR(std::abs(gamma_coefficient(ctx, h, x) - s / std::sqrt(1009.0)), 0.0, 1e-11);
    }
  }
  EXPECT_NEAR(half_gamma(ctx, 0).real(), 0.5 + 1.0 / (2 * 1009.0), 1e-15);
  for (std::int64_t h = 1; h < 504; ++h) {
    EXPECT_LE(std::abs(half_gamma(ctx, h)), 1.0 / (2.0 * h) + 1e-15);
    EXPECT_LE(std::abs(half_gamma(ctx, -h)), 1.0 / (2.0 * h) + 1e-15);
  }
  EXPECT_THROW(gamma_coefficient(ctx, 505, 3), contract_error);
  EXPECT_THROW(gamma_coefficient(ctx, 1, 1009), contract_error);
}

TEST(Engine, ImaginaryHalfSumsByConvolution) {
  SumEngine eng(TraceFamily::birch(), 1009);
  const auto direct = imag_half_sums(eng);
  const auto conv = imag_half_sums_by_convolution(eng, eng.complete_sums());
  for (std::size_t a = 0; a < direct.size(); ++a) EXPECT_NEAR(direct[a], conv[a], 1e-10);
}

TEST(Engine, ResourceGuard) {
  EngineOptions small;
  small.max_bytes = 1000;
  EXPECT_THROW(SumEngine(TraceFamily::birch(), 1009, small).complete_sums(), resource_error);
}

TEST(Engine, ShortIntervalScan) {
  SumEngine eng(TraceFamily::birch(), 10007);
  const auto rep = short_interval_scan(eng, 100, 50, 5);
  EXPECT_FALSE(rep.exploratory);
  EXPECT_GT(rep.max_modulus, 0.0);
  EXPECT_LE(rep.max_modulus, 100.0);
  SumEngine kl(TraceFamily::kloosterman(), 10007);
  EXPECT_TRUE(short_interval_scan(kl, 100, 10, 5).exploratory);
  EXPECT_THROW(short_interval_scan(eng, 10007, 1, 1), contract_error);
}

TEST(Engine, DistributionsExcludeZero) {
  SumEngine eng(TraceFamily::birch(), 101);
  const auto prof = eng.exact_max_profile();
  const auto d = phi_distribution(prof);
  EXPECT_EQ(d.size(), 100u);
  EXPECT_EQ(d.ccdf(d.max()), 0.0);
  EXPECT_EQ(d.ccdf(d.min() - 1), 1.0);
}
