// birchmax: command-line driver for the exponential-sum experiments.
//
//   birchmax sums --family birch --p 10007 --L 16
//   birchmax dist --p 100003 --model-H 1000 --trials 20000 --seed 7
//   birchmax gh --H 16,64,256,1024
//   birchmax verify --p 10007
//
// Every run writes CSV files into --out and a JSON record beside each one.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "birchmax/birchmax.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace birchmax;

namespace {

// Long flag names, in the order they are applied. Config-file keys are the same.
const std::vector<std::string> setting_keys = {"family", "p",  "primes",    "L",       "H",      "model-H",
                                               "alpha-grid", "trials", "seed", "workers", "cache-dir", "out",
                                               "s",      "top-k", "method"};

std::string family_tag(const TraceFamily& fam) {
  if (fam.kind != FamilyKind::odd_polynomial) return fam.name();
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(detail::fnv1a(fam.name())));
  return std::string("oddpoly-") + hex;
}

json config_json(const RunConfig& c) {
  json j;
  j["subcommand"] = c.subcommand;
  j["family"] = c.family;
  j["primes"] = c.primes;
  j["L"] = c.L ? json(*c.L) : json(nullptr);
  j["H"] = c.H;
  j["alpha_grid"] = c.alpha_grid;
  j["trials"] = c.trials;
  j["seed"] = c.seed;
  j["workers"] = c.workers;
  j["s"] = c.s;
  j["top_k"] = c.top_k;
  j["method"] = to_string(c.method);
  return j;
}

class Run {
 public:
  explicit Run(RunConfig cfg) : cfg_(std::move(cfg)), family_(TraceFamily::parse(cfg_.family)) {
    fs::path dir = cfg_.cache_dir;
    if (dir.empty()) {
      if (const char* env = std::getenv("CACHE_DIR"); env && *env) dir = env;
    }
    if (dir.empty()) dir = fs::path(cfg_.out) / "cache";
    cache_.emplace(dir);
    fs::create_directories(cfg_.out);
  }

  const RunConfig& cfg() const { return cfg_; }
  const TraceFamily& family() const { return family_; }

  EngineOptions engine_options() const {
    EngineOptions o;
    o.workers = cfg_.workers;
    return o;
  }

  CompleteSumTable table(std::uint64_t p) {
    const auto key = cache_->key_for(family_, p, 0);
    keys_.push_back(key);
    if (auto t = cache_->load_complete(family_, p)) {
      std::cerr << "cache hit: " << key << '\n';
      return *t;
    }
    auto t = SumEngine(family_, p, engine_options()).complete_sums();
    cache_->store(t);
    std::cerr << "cache miss: " << key << " (stored)\n";
    return t;
  }

  CheckpointMatrix matrix(std::uint64_t p, std::uint32_t L) {
    const auto key = cache_->key_for(family_, p, L);
    keys_.push_back(key);
    if (auto m = cache_->load_matrix(family_, p, L)) {
      std::cerr << "cache hit: " << key << '\n';
      return *m;
    }
    auto m = SumEngine(family_, p, engine_options()).checkpoint_matrix(L);
    cache_->store(m);
    std::cerr << "cache miss: " << key << " (stored)\n";
    return m;
  }

  std::uint32_t checkpoints_for(std::uint64_t p) const { return cfg_.L ? *cfg_.L : default_checkpoint_count(p); }

  fs::path path(const std::string& name) const { return fs::path(cfg_.out) / name; }

  std::ofstream open(const std::string& name) {
    std::ofstream f(path(name), std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path(name).string());
    f.imbue(std::locale::classic());
    outputs_.push_back(name);
    return f;
  }

  // Writes <stem>.json with the resolved config, cache keys and the given results.
  void meta(const std::string& stem, json results) {
    json j;
    j["library_version"] = library_version;
    j["config"] = config_json(cfg_);
    j["seed"] = cfg_.seed;
    j["cache_keys"] = keys_;
    j["outputs"] = outputs_;
    j["results"] = std::move(results);
    std::ofstream f(path(stem + ".json"), std::ios::trunc);
    f << j.dump(2) << '\n';
    keys_.clear();
    outputs_.clear();
  }

 private:
  RunConfig cfg_;
  TraceFamily family_;
  std::optional<TableCache> cache_;
  std::vector<std::string> keys_;
  std::vector<std::string> outputs_;
};

std::string fmt(double v) { return format_double(v); }

std::vector<double> max_over_rows(const CheckpointMatrix& m) {
  std::vector<double> M(m.p, 0.0);
  for (std::size_t l = 0; l < m.rows(); ++l) {
    const auto row = m.row(l);
    for (std::uint64_t a = 0; a < m.p; ++a) M[a] = std::max(M[a], std::abs(row[a]));
  }
  return M;
}

int cmd_sums(Run& run) {
  for (auto p : run.cfg().primes) {
    const auto tag = family_tag(run.family()) + "_p" + std::to_string(p);
    const auto t = run.table(p);
    const std::uint32_t L = run.checkpoints_for(p);
    const auto m = run.matrix(p, L);
    const auto M = max_over_rows(m);
    {
      auto f = run.open("sums_" + tag + ".csv");
      write_complete_csv(f, t);
    }
    {
      auto f = run.open("profile_" + tag + "_L" + std::to_string(L) + ".csv");
      f << "a,M\n";
      for (std::uint64_t a = 0; a < p; ++a) f << a << ',' << fmt(M[a]) << '\n';
    }
    double vmax = 0.0;
    for (double v : t.values) vmax = std::max(vmax, std::abs(v));
    run.meta("sums_" + tag, {{"p", p},
                             {"L", L},
                             {"max_abs_value", vmax},
                             {"max_imag_residue", t.max_imag_residue},
                             {"max_M", *std::max_element(M.begin() + 1, M.end())}});
  }
  return 0;
}

ModelDistribution run_model(const RunConfig& c) {
  ModelConfig mc;
  mc.H = c.H.front();
  mc.alpha_grid = c.alpha_grid;
  mc.trials = c.trials;
  mc.seed = c.seed;
  mc.workers = c.workers;
  mc.method = c.method;
  return simulate_M(mc);
}

json model_json(const ModelDistribution& d) {
  return {{"H", d.config.H},
          {"trials", d.config.trials},
          {"alpha_grid", d.grid},
          {"truncation_moment_bound", d.truncation_moment_bound},
          {"truncation_sd", d.truncation_sd},
          {"grid_error_bound", d.grid_error_bound},
          {"tail_slope", tail_slope(d.dist, 1e-3, 1e-1)}};
}

void write_plot_script(Run& run, const std::string& stem, bool with_model) {
  auto f = run.open(stem + ".gp");
  f << "set datafile separator ','\n"
    << "set key top right\n"
    << "set xlabel 'V'\n"
    << "set terminal pngcairo size 1000,420\n"
    << "set output '" << stem << ".png'\n"
    << "set multiplot layout 1,2\n"
    << "set logscale y\n"
    << "set ylabel 'CCDF'\n"
    << "plot '" << stem << ".csv' every ::1 using 1:2 with lines title 'arithmetic'";
  if (with_model) f << ", '' every ::1 using 1:4 with lines title 'model'";
  f << "\nunset logscale y\n"
    << "set ylabel 'log(-log CCDF)'\n"
    << "plot '" << stem << ".csv' every ::1 using 1:3 with lines title 'arithmetic'";
  if (with_model) f << ", '' every ::1 using 1:5 with lines title 'model'";
  f << "\nunset multiplot\n";
}

int cmd_dist(Run& run) {
  const auto& c = run.cfg();
  std::optional<ModelDistribution> model;
  if (!c.H.empty()) model = run_model(c);
  constexpr int grid_points = 401;
  if (c.primes.empty()) {
    if (!model) throw contract_error("dist needs --p/--primes or --model-H");
    const std::string stem = "dist_model_H" + std::to_string(c.H.front()) + "_seed" + std::to_string(c.seed);
    const double vmax = model->dist.max();
    {
      auto f = run.open(stem + ".csv");
      f << "V,model_ccdf,model_lognlog\n";
      for (int i = 0; i < grid_points; ++i) {
        const double v = vmax * i / (grid_points - 1);
        const double q = model->dist.ccdf(v);
        f << fmt(v) << ',' << fmt(q) << ',' << fmt(log_neg_log(q)) << '\n';
      }
    }
    run.meta(stem, {{"model", model_json(*model)}});
    return 0;
  }
  for (auto p : c.primes) {
    const std::uint32_t L = run.checkpoints_for(p);
    const auto m = run.matrix(p, L);
    const auto M = max_over_rows(m);
    const EmpiricalCCDF phi(std::vector<double>(M.begin() + 1, M.end()));
    std::string stem = "dist_" + family_tag(run.family()) + "_p" + std::to_string(p) + "_L" + std::to_string(L);
    if (model) stem += "_H" + std::to_string(c.H.front()) + "_seed" + std::to_string(c.seed);
    const double vmax = std::max(phi.max(), model ? model->dist.max() : 0.0);
    {
      auto f = run.open(stem + ".csv");
      f << "V,phi_ccdf,phi_lognlog";
      if (model) f << ",model_ccdf,model_lognlog";
      f << '\n';
      for (int i = 0; i < grid_points; ++i) {
        const double v = vmax * i / (grid_points - 1);
        const double q = phi.ccdf(v);
        f << fmt(v) << ',' << fmt(q) << ',' << fmt(log_neg_log(q));
        if (model) {
          const double qm = model->dist.ccdf(v);
          f << ',' << fmt(qm) << ',' << fmt(log_neg_log(qm));
        }
        f << '\n';
      }
    }
    write_plot_script(run, stem, model.has_value());
    json res = {{"p", p},
                {"L", L},
                {"phi_tail_slope", tail_slope(phi, 1e-3, 1e-1)},
                {"phi_median", phi.median()},
                {"phi_max", phi.max()}};
    if (model) res["model"] = model_json(*model);
    run.meta(stem, std::move(res));
  }
  return 0;
}

int cmd_model(Run& run) {
  const auto& c = run.cfg();
  const auto d = run_model(c);
  const std::string stem = "model_H" + std::to_string(c.H.front()) + "_seed" + std::to_string(c.seed);
  {
    auto f = run.open(stem + ".csv");
    f << "trial_rank,M,ccdf,lognlog\n";
    const auto s = d.dist.sorted();
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double q = d.dist.ccdf(s[i]);
      f << i << ',' << fmt(s[i]) << ',' << fmt(q) << ',' << fmt(log_neg_log(q)) << '\n';
    }
  }
  run.meta(stem, model_json(d));
  return 0;
}

int cmd_constants(Run& run) {
  const auto c = constants();
  {
    auto f = run.open("constants.csv");
    f << "name,value,error\n";
    f << "I," << fmt(c.I) << ',' << fmt(c.I_error) << '\n';
    f << "A0," << fmt(c.A0) << ',' << fmt(c.A0_error) << '\n';
    f << "B0," << fmt(c.B0) << ',' << fmt(c.B0_error) << '\n';
    f << "delta," << fmt(c.delta) << ",0\n";
  }
  {
    auto f = run.open("constants_tail.csv");
    f << "V,saddle_s,predicted_tail,tail_low,tail_high\n";
    for (double V = 0.5; V <= 8.0; V += 0.5) {
      const auto t = saddle_and_tail(V, c);
      f << fmt(V) << ',' << fmt(t.s) << ',' << fmt(t.predicted_tail) << ',' << fmt(t.tail_low) << ','
        << fmt(t.tail_high) << '\n';
    }
  }
  run.meta("constants", {{"I", c.I},
                         {"I_error", c.I_error},
                         {"I_stability", c.I_stability},
                         {"A0", c.A0},
                         {"A0_error", c.A0_error},
                         {"B0", c.B0},
                         {"B0_error", c.B0_error},
                         {"delta", c.delta},
                         {"A0_identity_residual", c.A0_identity_residual},
                         {"delta_identity_residual", c.delta_identity_residual}});
  return 0;
}

int cmd_gh(Run& run) {
  std::vector<long> Hs = run.cfg().H;
  if (Hs.empty()) Hs = {16, 64, 256, 1024};
  const unsigned w = run.cfg().workers;
  bool ok = true;
  json rows = json::array();
  auto f = run.open("gh.csv");
  f << "H,estimate,argmax_alpha,lower,upper_trivial,upper_sharp,lemma_bound,within\n";
  for (long H : Hs) {
    const auto est = estimate_GH(H, run.cfg().alpha_grid, 0, w);
    const double probe[] = {est.argmax_alpha};
    const auto lem = gh_lemma_bound(H, run.cfg().alpha_grid, probe, w);
    const double lh = std::log(static_cast<double>(H));
    const double lower = 4 * lh - 8, up1 = 8 * lh + 8, up2 = (2 + 8 / std::numbers::pi) * lh + 8;
    const bool in = est.value >= lower && est.value <= std::min(up1, up2) && est.value <= lem.value + 0.1;
    ok = ok && in;
    f << H << ',' << fmt(est.value) << ',' << fmt(est.argmax_alpha) << ',' << fmt(lower) << ',' << fmt(up1) << ','
      << fmt(up2) << ',' << fmt(lem.value) << ',' << (in ? 1 : 0) << '\n';
    rows.push_back({{"H", H}, {"estimate", est.value}, {"lemma_bound", lem.value}, {"within", in}});
  }
  f.close();
  run.meta("gh", {{"rows", rows}, {"all_within", ok}});
  return ok ? 0 : 1;
}

struct Check {
  std::string name;
  double value;
  double tolerance;
  bool pass;
};

int cmd_verify(Run& run) {
  bool all = true;
  for (auto p : run.cfg().primes) {
    const auto& fam = run.family();
    const auto t = run.table(p);
    const double sp = std::sqrt(static_cast<double>(p));
    std::vector<Check> checks;
    auto add = [&](std::string name, double value, double tol) {
      checks.push_back({std::move(name), value, tol, value <= tol});
    };
    double vmax = 0.0;
    CompensatedSum total;
    for (double v : t.values) {
      vmax = std::max(vmax, std::abs(v));
      total.add(v);
    }
    add("weil_excess", vmax - fam.weil_bound(), 1e-8);
    add("imag_residue", t.max_imag_residue, 1e-8 * sp);
    const double expected_total = fam.kind == FamilyKind::kloosterman ? 0.0 : sp;
    add("orthogonality", std::abs(total.value() - expected_total), 1e-8 * sp);

    SumEngine eng(fam, p, run.engine_options());
    std::mt19937_64 rng(run.cfg().seed);
    std::uniform_int_distribution<std::uint64_t> pick_a(0, p - 1), pick_x(0, p - 1);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      const auto a = pick_a(rng), x = pick_x(rng);
      worst = std::max(worst, std::abs(plancherel_reconstruct(eng.field(), t, a, x) - eng.partial_sum(a, x)));
    }
    add("plancherel", worst, 1e-9);

    if (fam.kind != FamilyKind::odd_polynomial) {
      std::uniform_int_distribution<std::int64_t> pick_h(-3, 3);
      for (unsigned k = 1; k <= 4; ++k) {
        double gap = 0.0;
        for (int i = 0; i < 20; ++i) {
          std::vector<std::int64_t> shifts(k);
          for (auto& h : shifts) h = pick_h(rng);
          gap = std::max(gap, std::abs(mixed_moment_arithmetic(t, shifts) - mixed_moment_model(shifts)));
        }
        add("mixed_moment_k" + std::to_string(k), gap, 10 * algebraic_error_term(k, p));
      }
    }
    const std::string stem = "verify_" + family_tag(fam) + "_p" + std::to_string(p);
    json res = json::array();
    {
      auto f = run.open(stem + ".csv");
      f << "check,value,tolerance,pass\n";
      for (const auto& c : checks) {
        f << c.name << ',' << fmt(c.value) << ',' << fmt(c.tolerance) << ',' << (c.pass ? 1 : 0) << '\n';
        res.push_back({{"check", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"pass", c.pass}});
        if (!c.pass) {
          all = false;
          std::cerr << "FAIL p=" << p << ' ' << c.name << ": " << fmt(c.value) << " > " << fmt(c.tolerance) << '\n';
        }
      }
    }
    run.meta(stem, {{"p", p}, {"checks", res}});
  }
  return all ? 0 : 1;
}

int cmd_search(Run& run) {
  for (auto p : run.cfg().primes) {
    SumEngine eng(run.family(), p, run.engine_options());
    const auto rep = extreme_search(eng.half_sums(), run.cfg().top_k);
    const std::string stem = "search_" + family_tag(run.family()) + "_p" + std::to_string(p);
    {
      auto f = run.open(stem + ".csv");
      f << "rank,a,modulus,ratio\n";
      for (std::size_t i = 0; i < rep.top.size(); ++i) {
        f << i + 1 << ',' << rep.top[i].a << ',' << fmt(rep.top[i].modulus) << ',' << fmt(rep.top[i].ratio) << '\n';
      }
    }
    json counts = json::array();
    for (const auto& [th, n] : rep.counts) counts.push_back({{"ratio_at_least", th}, {"count", n}});
    run.meta(stem, {{"p", p}, {"benchmark", rep.benchmark}, {"mean_modulus", rep.mean_modulus}, {"counts", counts}});
  }
  return 0;
}

int cmd_laplace(Run& run) {
  std::vector<double> ss = run.cfg().s;
  if (ss.empty()) ss = {2, 3, 4, 5};
  const double B0 = constants().B0;
  for (auto p : run.cfg().primes) {
    SumEngine eng(run.family(), p, run.engine_options());
    const auto im = imag_half_sums(eng);
    const auto coeffs = half_gamma_imag_coefficients(eng.field());
    const double th = default_exclusion_threshold(p);
    const std::string stem = "laplace_" + family_tag(run.family()) + "_p" + std::to_string(p);
    {
      auto f = run.open(stem + ".csv");
      f << "s,log_arithmetic,log_model,log_asymptotic,excluded,threshold\n";
      for (double s : ss) {
        const auto r = arithmetic_laplace(im, s, th);
        const double lm = log_model_laplace(s, coeffs);
        const double as = s > 0 ? (2 / std::numbers::pi) * s * std::log(s) + B0 * s
                                : std::numeric_limits<double>::quiet_NaN();
        f << fmt(s) << ',' << fmt(r.log_value) << ',' << fmt(lm) << ',' << fmt(as) << ',' << r.excluded << ','
          << fmt(th) << '\n';
      }
    }
    run.meta(stem, {{"p", p}, {"threshold", th}, {"B0", B0}});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maxima of complete and incomplete exponential sums over prime fields"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(library_version));

  const std::map<std::string, std::string> help = {
      {"family", "birch | kloosterman | oddpoly:<c1,c3,...>"},
      {"p", "a single odd prime"},
      {"primes", "prime ladder: a..b or a comma list"},
      {"L", "number of checkpoints"},
      {"H", "truncation length(s), comma list"},
      {"model-H", "same as --H"},
      {"alpha-grid", "alpha grid size"},
      {"trials", "Monte Carlo trials"},
      {"seed", "random seed"},
      {"workers", "worker threads"},
      {"cache-dir", "cache directory (default $CACHE_DIR, then <out>/cache)"},
      {"out", "output directory"},
      {"s", "Laplace parameters, comma list"},
      {"top-k", "entries kept by search"},
      {"method", "inverse-cdf | rejection"}};

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"sums", "complete sums and checkpoint matrices (cached)"},
      {"dist", "arithmetic and model CCDF tables"},
      {"model", "Monte Carlo law of the random model"},
      {"constants", "I, A0, B0, delta and the predicted tail"},
      {"gh", "the sup of the Fourier series of g, with its bounds"},
      {"verify", "identities and calibrated moment checks"},
      {"search", "largest half-interval sums"},
      {"laplace", "Laplace transform of the half-interval sums"}};

  std::map<std::string, std::string> flags;
  std::string config_file;
  for (const auto& [name, desc] : commands) {
    auto* sub = app.add_subcommand(name, desc);
    sub->add_option("--config", config_file, "key=value file; flags override it");
    for (const auto& key : setting_keys) sub->add_option("--" + key, flags[key], help.at(key));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    RunConfig cfg;
    for (auto* sub : app.get_subcommands()) cfg.subcommand = sub->get_name();
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw contract_error("cannot open config file " + config_file);
      for (const auto& [k, v] : parse_key_values(in)) apply_setting(cfg, k, v);
    }
    auto* sub = app.get_subcommand(cfg.subcommand);
    for (const auto& key : setting_keys) {
      if (sub->count("--" + key) > 0) apply_setting(cfg, key, flags[key]);
    }
    validate(cfg);
    Run run(cfg);
    const auto& c = cfg.subcommand;
    if (c == "sums") return cmd_sums(run);
    if (c == "dist") return cmd_dist(run);
    if (c == "model") return cmd_model(run);
    if (c == "constants") return cmd_constants(run);
    if (c == "gh") return cmd_gh(run);
    if (c == "verify") return cmd_verify(run);
    if (c == "search") return cmd_search(run);
    if (c == "laplace") return cmd_laplace(run);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
