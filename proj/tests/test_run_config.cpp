#include <gtest/gtest.h>

#include <sstream>

#include "birchmax/run_config.hpp"

using namespace birchmax;

TEST(RunConfig, KeyValueParsing) {
  std::istringstream in("# comment\n\nfamily = kloosterman\np=10007\n  seed =  7 \n");
  const auto kv = parse_key_values(in);
  ASSERT_EQ(kv.size(), 3u);
  EXPECT_EQ(kv[0].first, "family");
  EXPECT_EQ(kv[0].second, "kloosterman");
  EXPECT_EQ(kv[2].second, "7");
  std::istringstream bad("p 10007\n");
  EXPECT_THROW(parse_key_values(bad), contract_error);
}

TEST(RunConfig, ApplySettings) {
  RunConfig c;
  apply_setting(c, "p", "10007");
  EXPECT_EQ(c.primes, std::vector<std::uint64_t>{10007});
  apply_setting(c, "primes", "10..30");
  EXPECT_EQ(c.primes, (std::vector<std::uint64_t>{11, 13, 17, 19, 23, 29}));
  apply_setting(c, "primes", "1009,10007");
  EXPECT_EQ(c.primes.size(), 2u);
  apply_setting(c, "H", "16,64,256");
  EXPECT_EQ(c.H, (std::vector<long>{16, 64, 256}));
  apply_setting(c, "model-H", "1000");
  EXPECT_EQ(c.H, std::vector<long>{1000});
  apply_setting(c, "s", "2,3.5");
  EXPECT_EQ(c.s, (std::vector<double>{2.0, 3.5}));
  apply_setting(c, "method", "rejection");
  EXPECT_EQ(c.method, SamplingMethod::rejection);
}

TEST(RunConfig, Rejections) {
  RunConfig c;
  EXPECT_THROW(apply_setting(c, "p", "10"), contract_error);
  EXPECT_THROW(apply_setting(c, "p", "2"), contract_error);
  EXPECT_THROW(apply_setting(c, "p", "abc"), contract_error);
  EXPECT_THROW(apply_setting(c, "primes", "1009,1010"), contract_error);
  EXPECT_THROW(apply_setting(c, "primes", "24..28"), contract_error);
  EXPECT_THROW(apply_setting(c, "L", "1"), contract_error);
  EXPECT_THROW(apply_setting(c, "H", "0"), contract_error);
  EXPECT_THROW(apply_setting(c, "alpha-grid", "3"), contract_error);
  EXPECT_THROW(apply_setting(c, "trials", "0"), contract_error);
  EXPECT_THROW(apply_setting(c, "workers", "0"), contract_error);
  EXPECT_THROW(apply_setting(c, "family", "cubic"), domain_error);
  EXPECT_THROW(apply_setting(c, "colour", "red"), contract_error);
}

TEST(RunConfig, Validation) {
  RunConfig c;
  c.subcommand = "sums";
  EXPECT_THROW(validate(c), contract_error);
  apply_setting(c, "p", "7");
  EXPECT_THROW(validate(c), contract_error);
  apply_setting(c, "p", "101");
  EXPECT_NO_THROW(validate(c));
  apply_setting(c, "L", "200");
  EXPECT_THROW(validate(c), contract_error);
  RunConfig m;
  m.subcommand = "model";
  EXPECT_THROW(validate(m), contract_error);
  apply_setting(m, "H", "100");
  EXPECT_NO_THROW(validate(m));
  RunConfig k;
  k.subcommand = "constants";
  EXPECT_NO_THROW(validate(k));
}
