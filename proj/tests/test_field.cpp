#include <gtest/gtest.h>

#include "birchmax/field.hpp"
#include "oracles.hpp"

using namespace birchmax;

TEST(Field, PrimalityAgreesWithTrialDivision) {
  for (std::uint64_t n = 0; n < 3000; ++n) {
    bool prime = n >= 2;
    for (std::uint64_t d = 2; d * d <= n && prime; ++d) prime = n % d != 0;
    EXPECT_EQ(is_prime(n), prime) << n;
  }
  EXPECT_EQ(next_prime(100000), 100003u);
}

TEST(Field, ContextRejectsBadModuli) {
  EXPECT_THROW(FieldContext(10), domain_error);
  EXPECT_THROW(FieldContext(2), domain_error);
  EXPECT_THROW(FieldContext(2147483659ull), domain_error);
  EXPECT_NO_THROW(FieldContext(7));
}

TEST(Field, CharacterMatchesDirectTrig) {
  FieldContext ctx(101);
  EXPECT_EQ(additive_character(ctx, 0), cplx(1.0, 0.0));
  for (residue t = 0; t < 101; ++t) {
    EXPECT_NEAR(std::abs(additive_character(ctx, t) - oracle::e_p(static_cast<std::int64_t>(t), 101)), 0.0, 1e-15);
  }
  EXPECT_THROW(additive_character(ctx, 101), contract_error);
}

TEST(Field, InverseAndInverseTable) {
  FieldContext ctx(10007);
  EXPECT_EQ(modular_inverse(ctx, 2), 5004u);
  EXPECT_THROW(modular_inverse(ctx, 0), domain_error);
  const auto inv = inverse_table(ctx);
  for (residue n = 1; n < 10007; ++n) {
    EXPECT_EQ(mul_mod(n, inv[n], 10007), 1u);
    if (n % 997 == 0) {
      EXPECT_EQ(inv[n], static_cast<std::uint32_t>(oracle::inverse_mod(static_cast<std::int64_t>(n), 10007)));
    }
  }
}

TEST(Field, PhaseEvaluation) {
  FieldContext ctx(101);
  EXPECT_EQ(eval_phase(TraceFamily::birch(), ctx, 0, 0), 0u);
  EXPECT_EQ(eval_phase(TraceFamily::birch(), ctx, 5, 2), 18u);
  EXPECT_EQ(eval_phase(TraceFamily::kloosterman(), ctx, 3, 2), (6 + 51) % 101u);
  EXPECT_THROW(eval_phase(TraceFamily::kloosterman(), ctx, 3, 0), domain_error);
  const auto quintic = TraceFamily::odd_polynomial({0, 0, 0, 1, 0, 2});
  // 2^3 + 2*2^5 + 7*2
  EXPECT_EQ(eval_phase(quintic, ctx, 7, 2), (8 + 64 + 14) % 101u);
  const auto neg = TraceFamily::odd_polynomial({0, -1, 0, 1});
  EXPECT_EQ(eval_phase(neg, ctx, 0, 2), 6u);
}

TEST(Field, FamilyValidationAndParsing) {
  EXPECT_THROW(TraceFamily::odd_polynomial({0, 1}), domain_error);
  EXPECT_THROW(TraceFamily::odd_polynomial({1, 0, 0, 1}), domain_error);
  EXPECT_THROW(TraceFamily::odd_polynomial({0, 0, 1, 1}), domain_error);
  EXPECT_EQ(TraceFamily::parse("birch"), TraceFamily::birch());
  EXPECT_EQ(TraceFamily::parse("kloosterman"), TraceFamily::kloosterman());
  const auto f = TraceFamily::parse("oddpoly:0,0,0,0,0,1");
  EXPECT_EQ(f.degree(), 5);
  EXPECT_EQ(f.weil_bound(), 4.0);
  EXPECT_EQ(f.name(), "oddpoly:0,0,0,0,0,1");
  EXPECT_THROW(TraceFamily::parse("cubic"), domain_error);
  EXPECT_THROW(TraceFamily::parse("oddpoly:0,x,0,1"), domain_error);
  EXPECT_TRUE(TraceFamily::odd_polynomial({0, 0, 0, 0, 0, 0, 0, 1}).has_degree_warning());
  EXPECT_FALSE(TraceFamily::birch().has_degree_warning());
  EXPECT_EQ(TraceFamily::kloosterman().weil_bound(), 2.0);
}
