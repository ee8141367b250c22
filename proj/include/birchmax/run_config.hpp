#pragma once

// Resolved settings for one command-line run. Settings come from an optional
// key=value file, then from flags; both go through apply_setting so the two
// sources accept exactly the same keys and value syntax.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "birchmax/errors.hpp"
#include "birchmax/field.hpp"
#include "birchmax/sato_tate.hpp"

namespace birchmax {

struct RunConfig {
  std::string subcommand;
  std::string family = "birch";
  std::vector<std::uint64_t> primes;
  std::optional<std::uint32_t> L;
  std::vector<long> H;
  std::size_t alpha_grid = 0;
  std::size_t trials = 10000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::string cache_dir;
  std::string out = ".";
  std::vector<double> s;
  std::size_t top_k = 20;
  SamplingMethod method = SamplingMethod::inverse_cdf;
};

inline std::string trim(std::string_view v) {
  const auto b = v.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = v.find_last_not_of(" \t\r");
  return std::string(v.substr(b, e - b + 1));
}

/// key=value lines; blank lines and lines starting with '#' are ignored.
inline std::vector<std::pair<std::string, std::string>> parse_key_values(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw contract_error("config line " + std::to_string(lineno) + ": expected key=value");
    }
    auto key = trim(std::string_view(t).substr(0, eq));
    auto value = trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw contract_error("config line " + std::to_string(lineno) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  T v{};
  const auto t = trim(text);
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size() || t.empty()) {
    throw contract_error(std::string(key) + ": cannot parse '" + t + "'");
  }
  return v;
}

template <class T>
std::vector<T> parse_list(std::string_view key, std::string_view text) {
  std::vector<T> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const auto piece = text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
    out.push_back(parse_number<T>(key, piece));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline void require_prime(std::uint64_t p) {
  if (!is_prime(p)) throw contract_error(std::to_string(p) + " is not prime");
  if (p == 2) throw contract_error("p must be an odd prime");
  if (p >= (std::uint64_t{1} << 31)) throw contract_error("p must be below 2^31");
}

/// "a..b" (every prime in [a, b]) or a comma list of primes.
inline std::vector<std::uint64_t> parse_primes(std::string_view text) {
  const auto t = trim(text);
  const auto dots = t.find("..");
  std::vector<std::uint64_t> out;
  if (dots != std::string::npos) {
    const auto lo = parse_number<std::uint64_t>("primes", std::string_view(t).substr(0, dots));
    const auto hi = parse_number<std::uint64_t>("primes", std::string_view(t).substr(dots + 2));
    if (lo > hi) throw contract_error("primes: empty range " + t);
    if (hi >= (std::uint64_t{1} << 31)) throw contract_error("primes: range exceeds 2^31");
    for (std::uint64_t q = std::max<std::uint64_t>(lo, 3); q <= hi; ++q) {
      if (is_prime(q)) out.push_back(q);
    }
    if (out.empty()) throw contract_error("primes: no odd prime in " + t);
    return out;
  }
  out = parse_list<std::uint64_t>("primes", t);
  for (auto q : out) require_prime(q);
  return out;
}

/// Applies one setting; keys are the long flag names without dashes.
inline void apply_setting(RunConfig& c, const std::string& key, const std::string& value) {
  if (key == "family") {
    TraceFamily::parse(value);  // validates
    c.family = value;
  } else if (key == "p") {
    const auto p = parse_number<std::uint64_t>(key, value);
    require_prime(p);
    c.primes = {p};
  } else if (key == "primes") {
    c.primes = parse_primes(value);
  } else if (key == "L") {
    const auto L = parse_number<std::uint32_t>(key, value);
    if (L < 2) throw contract_error("L must be >= 2");
    c.L = L;
  } else if (key == "H" || key == "model-H") {
    c.H = parse_list<long>(key, value);
    for (long h : c.H) {
      if (h < 1) throw contract_error("H must be >= 1");
    }
  } else if (key == "alpha-grid") {
    c.alpha_grid = parse_number<std::size_t>(key, value);
    if (c.alpha_grid < 4) throw contract_error("alpha-grid must be >= 4");
  } else if (key == "trials") {
    c.trials = parse_number<std::size_t>(key, value);
    if (c.trials < 1) throw contract_error("trials must be >= 1");
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "workers") {
    c.workers = parse_number<unsigned>(key, value);
    if (c.workers < 1) throw contract_error("workers must be >= 1");
  } else if (key == "cache-dir") {
    c.cache_dir = value;
  } else if (key == "out") {
    if (value.empty()) throw contract_error("out must not be empty");
    c.out = value;
  } else if (key == "s") {
    c.s = parse_list<double>(key, value);
    for (double s : c.s) {
      if (!std::isfinite(s)) throw contract_error("s values must be finite");
    }
  } else if (key == "top-k") {
    c.top_k = parse_number<std::size_t>(key, value);
  } else if (key == "method") {
    if (value == "inverse-cdf") {
      c.method = SamplingMethod::inverse_cdf;
    } else if (value == "rejection") {
      c.method = SamplingMethod::rejection;
    } else {
      throw contract_error("method must be inverse-cdf or rejection");
    }
  } else {
    throw contract_error("unknown setting '" + key + "'");
  }
}

/// Per-subcommand requirements, checked before any work starts.
inline void validate(const RunConfig& c) {
  static const std::vector<std::string> needs_prime = {"sums", "dist", "verify", "search", "laplace"};
  const bool prime_cmd = std::find(needs_prime.begin(), needs_prime.end(), c.subcommand) != needs_prime.end();
  if (prime_cmd && c.primes.empty()) throw contract_error(c.subcommand + " needs --p or --primes");
  if (prime_cmd) {
    for (auto p : c.primes) {
      if (p <= 7) throw contract_error(c.subcommand + " needs p > 7");
    }
  }
  const auto fam = TraceFamily::parse(c.family);
  if (fam.kind == FamilyKind::odd_polynomial) {
    for (auto p : c.primes) {
      if (p <= static_cast<std::uint64_t>(fam.degree())) throw contract_error("p must exceed the polynomial degree");
    }
  }
  if (c.L) {
    for (auto p : c.primes) {
      if (*c.L > p) throw contract_error("L must not exceed p");
    }
  }
  if (c.subcommand == "model" && c.H.size() != 1) throw contract_error("model needs exactly one --H value");
  if (c.subcommand == "dist" && c.H.size() > 1) throw contract_error("dist accepts a single --H value");
}

}  // namespace birchmax
