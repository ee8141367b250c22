#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("birchmax_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Runs the binary with stderr captured; returns the exit status.
int run(const std::string& args, const fs::path& dir, std::string* err = nullptr) {
  const auto log = dir / "stderr.txt";
  const std::string cmd = std::string("env -u CACHE_DIR ") + BIRCHMAX_CLI + " " + args + " 2> " + log.string() +
                          " > /dev/null";
  const int st = std::system(cmd.c_str());
  if (err) {
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    *err = ss.str();
  }
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& f) {
  std::ifstream in(f, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, SumsWritesCacheAndCsvThenHitsCache) {
  const auto d = scratch("sums");
  const std::string args = "sums --family birch --p 10007 --L 16 --out " + d.string();
  std::string err;
  ASSERT_EQ(run(args, d, &err), 0) << err;
  EXPECT_NE(err.find("cache miss"), std::string::npos);
  EXPECT_TRUE(fs::exists(d / "cache" / "birch_p10007_L0_v1.bmax"));
  EXPECT_TRUE(fs::exists(d / "cache" / "birch_p10007_L16_v1.bmax"));
  EXPECT_TRUE(fs::exists(d / "sums_birch_p10007.csv"));
  EXPECT_TRUE(fs::exists(d / "sums_birch_p10007.json"));
  const auto first = slurp(d / "profile_birch_p10007_L16.csv");
  ASSERT_EQ(run(args, d, &err), 0) << err;
  EXPECT_NE(err.find("cache hit: birch_p10007_L0_v1.bmax"), std::string::npos);
  EXPECT_NE(err.find("cache hit: birch_p10007_L16_v1.bmax"), std::string::npos);
  EXPECT_EQ(slurp(d / "profile_birch_p10007_L16.csv"), first);
}

TEST(Cli, RejectsNonPrime) {
  const auto d = scratch("np");
  std::string err;
  EXPECT_NE(run("sums --p 10 --out " + d.string(), d, &err), 0);
  EXPECT_NE(err.find("not prime"), std::string::npos) << err;
}

TEST(Cli, CorruptCacheIsAnError) {
  const auto d = scratch("corrupt");
  ASSERT_EQ(run("sums --p 1009 --L 8 --out " + d.string(), d), 0);
  {
    std::fstream f(d / "cache" / "birch_p1009_L0_v1.bmax", std::ios::in | std::ios::out | std::ios::binary);
    f.write("XXXX", 4);
  }
  std::string err;
  EXPECT_NE(run("sums --p 1009 --L 8 --out " + d.string(), d, &err), 0);
  EXPECT_NE(err.find("magic"), std::string::npos) << err;
}

TEST(Cli, UnknownConfigKeyIsAnError) {
  const auto d = scratch("cfg");
  {
    std::ofstream f(d / "run.cfg");
    f << "p = 1009\nbogus = 3\n";
  }
  std::string err;
  EXPECT_NE(run("verify --config " + (d / "run.cfg").string() + " --out " + d.string(), d, &err), 0);
  EXPECT_NE(err.find("bogus"), std::string::npos);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const auto d = scratch("override");
  {
    std::ofstream f(d / "run.cfg");
    f << "# ladder\nprimes = 1009\nseed = 3\n";
  }
  ASSERT_EQ(run("verify --config " + (d / "run.cfg").string() + " --p 1013 --out " + d.string(), d), 0);
  EXPECT_TRUE(fs::exists(d / "verify_birch_p1013.csv"));
  EXPECT_FALSE(fs::exists(d / "verify_birch_p1009.csv"));
  EXPECT_NE(slurp(d / "verify_birch_p1013.json").find("\"seed\": 3"), std::string::npos);
}

TEST(Cli, CacheDirEnvironment) {
  const auto d = scratch("env");
  const auto c = d / "elsewhere";
  const std::string cmd = "CACHE_DIR=" + c.string() + " " + BIRCHMAX_CLI + " sums --p 1009 --L 8 --out " +
                          d.string() + " 2> /dev/null";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(c / "birch_p1009_L0_v1.bmax"));
  EXPECT_FALSE(fs::exists(d / "cache"));
}

TEST(Cli, VerifyExitCodes) {
  const auto d = scratch("verify");
  std::string err;
  EXPECT_EQ(run("verify --p 10007 --out " + d.string(), d, &err), 0) << err;
  EXPECT_EQ(run("verify --family kloosterman --p 10007 --out " + d.string(), d, &err), 0) << err;
  const auto csv = slurp(d / "verify_birch_p10007.csv");
  EXPECT_NE(csv.find("mixed_moment_k4"), std::string::npos);
  EXPECT_EQ(csv.find(",0\n"), std::string::npos);
}

TEST(Cli, DistColumnsAreMonotoneAndAligned) {
  const auto d = scratch("dist");
  ASSERT_EQ(run("dist --p 10007 --model-H 64 --trials 500 --seed 7 --out " + d.string(), d), 0);
  const auto f = d / "dist_birch_p10007_L8_H64_seed7.csv";
  ASSERT_TRUE(fs::exists(f)) << "missing " << f;
  std::ifstream in(f);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "V,phi_ccdf,phi_lognlog,model_ccdf,model_lognlog");
  double prev_phi = 2, prev_model = 2;
  int rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string v, phi, lphi, model;
    std::getline(ss, v, ',');
    std::getline(ss, phi, ',');
    std::getline(ss, lphi, ',');
    std::getline(ss, model, ',');
    EXPECT_LE(std::stod(phi), prev_phi);
    EXPECT_LE(std::stod(model), prev_model);
    prev_phi = std::stod(phi);
    prev_model = std::stod(model);
    ++rows;
  }
  EXPECT_EQ(rows, 401);
  EXPECT_TRUE(fs::exists(d / "dist_birch_p10007_L8_H64_seed7.gp"));
}

TEST(Cli, ByteIdenticalAcrossRunsAndWorkers) {
  const auto a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
  const std::string args = "dist --p 10007 --L 8 --model-H 100 --trials 2000 --seed 7";
  ASSERT_EQ(run(args + " --out " + a.string(), a), 0);
  ASSERT_EQ(run(args + " --out " + b.string(), b), 0);
  ASSERT_EQ(run(args + " --workers 4 --out " + c.string(), c), 0);
  const std::string name = "dist_birch_p10007_L8_H100_seed7.csv";
  const auto ref = slurp(a / name);
  ASSERT_FALSE(ref.empty());
  EXPECT_EQ(slurp(b / name), ref);
  EXPECT_EQ(slurp(c / name), ref);
}

TEST(Cli, ConstantsAndGh) {
  const auto d = scratch("const");
  ASSERT_EQ(run("constants --out " + d.string(), d), 0);
  const auto csv = slurp(d / "constants.csv");
  EXPECT_NE(csv.find("I,-2.39687652804"), std::string::npos) << csv;
  EXPECT_NE(csv.find("delta,0.18880"), std::string::npos);
  ASSERT_EQ(run("gh --H 16,64 --out " + d.string(), d), 0);
  EXPECT_NE(slurp(d / "gh.csv").find("\n16,"), std::string::npos);
}

TEST(Cli, SearchLaplaceModel) {
  const auto d = scratch("misc");
  ASSERT_EQ(run("search --p 10007 --top-k 5 --out " + d.string(), d), 0);
  ASSERT_EQ(run("laplace --p 10007 --s 2,3 --out " + d.string(), d), 0);
  ASSERT_EQ(run("model --H 50 --trials 200 --method rejection --out " + d.string(), d), 0);
  std::ifstream in(d / "search_birch_p10007.csv");
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 5);
  EXPECT_TRUE(fs::exists(d / "laplace_birch_p10007.csv"));
  EXPECT_TRUE(fs::exists(d / "model_H50_seed1.json"));
  EXPECT_NE(run("model --out " + d.string(), d), 0);
}
