#pragma once

// Prime-field arithmetic and additive characters e_p(t) = exp(2 pi i t / p).

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "birchmax/errors.hpp"

namespace birchmax {

using residue = std::uint64_t;
using cplx = std::complex<double>;

inline constexpr std::uint64_t max_field_prime = (std::uint64_t{1} << 31);

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  if (n % 3 == 0) return n == 3;
  for (std::uint64_t d = 5; d * d <= n; d += 6) {
    if (n % d == 0 || n % (d + 2) == 0) return false;
  }
  return true;
}

inline std::uint64_t next_prime(std::uint64_t n) {
  while (!is_prime(n)) ++n;
  return n;
}

inline std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  std::uint64_t result = 1 % m;
  base %= m;
  while (exp > 0) {
    if (exp & 1) result = mul_mod(result, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return result;
}

/// Reduces a signed integer into [0, p).
inline residue reduce_signed(std::int64_t v, std::uint64_t p) {
  const auto sp = static_cast<std::int64_t>(p);
  std::int64_t r = v % sp;
  if (r < 0) r += sp;
  return static_cast<residue>(r);
}

/// A prime p with a precomputed table of e_p(t), t = 0..p-1.
///
/// Immutable after construction. The table removes trigonometric calls from
/// every hot loop: phases are computed exactly in modular arithmetic and then
/// looked up.
class FieldContext {
 public:
  explicit FieldContext(std::uint64_t p) : p_(p) {
    if (p < 3 || !is_prime(p)) {
      throw domain_error("p = " + std::to_string(p) + " is not an odd prime");
    }
    if (p >= max_field_prime) {
      throw domain_error("p = " + std::to_string(p) + " exceeds the supported range (< 2^31)");
    }
    unity_.resize(p);
    unity_[0] = cplx{1.0, 0.0};
    // Fill the first half and mirror by conjugation so e_p(t) e_p(p-t) = 1 holds
    // to rounding of a single sin/cos pair.
    const double step = 2.0 * std::numbers::pi / static_cast<double>(p);
    for (std::uint64_t t = 1; t <= p / 2; ++t) {
      const double angle = step * static_cast<double>(t);
      unity_[t] = cplx{std::cos(angle), std::sin(angle)};
      unity_[p - t] = std::conj(unity_[t]);
    }
  }

  std::uint64_t p() const noexcept { return p_; }
  double sqrt_p() const noexcept { return std::sqrt(static_cast<double>(p_)); }
  const std::vector<cplx>& unity_table() const noexcept { return unity_; }

  /// e_p(t) for a residue t already reduced mod p; no range check.
  cplx unit(residue t) const noexcept { return unity_[t]; }

 private:
  std::uint64_t p_;
  std::vector<cplx> unity_;
};

inline cplx additive_character(const FieldContext& ctx, residue t) {
  if (t >= ctx.p()) {
    throw contract_error("additive_character: t = " + std::to_string(t) +
                         " outside [0, " + std::to_string(ctx.p()) + ")");
  }
  return ctx.unit(t);
}

inline residue modular_inverse(const FieldContext& ctx, residue n) {
  if (n == 0 || n >= ctx.p()) {
    throw domain_error("modular_inverse: " + std::to_string(n) + " has no inverse mod " +
                       std::to_string(ctx.p()));
  }
  return pow_mod(n, ctx.p() - 2, ctx.p());
}

/// All inverses 1..p-1 in O(p) via inv[i] = -(p / i) * inv[p mod i]. Entry 0 is unused.
inline std::vector<std::uint32_t> inverse_table(const FieldContext& ctx) {
  const std::uint64_t p = ctx.p();
  std::vector<std::uint32_t> inv(p, 0);
  inv[1] = 1;
  for (std::uint64_t i = 2; i < p; ++i) {
    const std::uint64_t q = p / i;
    inv[i] = static_cast<std::uint32_t>((p - mul_mod(q, inv[p % i], p)) % p);
  }
  return inv;
}

enum class FamilyKind : std::uint32_t { birch = 0, kloosterman = 1, odd_polynomial = 2 };

/// Which trace function is summed: n^3 + an, an + inv(n), or an + f(n) for an
/// odd integer polynomial f.
struct TraceFamily {
  FamilyKind kind = FamilyKind::birch;
  /// Odd-polynomial coefficients, index = degree. Empty for the other kinds.
  std::vector<std::int64_t> coeffs;

  static TraceFamily birch() { return {FamilyKind::birch, {}}; }
  static TraceFamily kloosterman() { return {FamilyKind::kloosterman, {}}; }

  static TraceFamily odd_polynomial(std::vector<std::int64_t> c) {
    while (!c.empty() && c.back() == 0) c.pop_back();
    if (c.size() < 4) {
      throw domain_error("odd polynomial must have degree >= 3");
    }
    for (std::size_t i = 0; i < c.size(); i += 2) {
      if (c[i] != 0) {
        throw domain_error("odd polynomial has a nonzero coefficient at even degree " +
                           std::to_string(i));
      }
    }
    return {FamilyKind::odd_polynomial, std::move(c)};
  }

  int degree() const {
    switch (kind) {
      case FamilyKind::birch: return 3;
      case FamilyKind::kloosterman: return 2;
      case FamilyKind::odd_polynomial: return static_cast<int>(coeffs.size()) - 1;
    }
    return 0;
  }

  /// Degree used in the Weil estimate (3 for Birch, 2 for Kloosterman, n otherwise).
  int weil_degree() const { return degree(); }

  /// Bound on the normalized complete sums: 2 for Birch and Kloosterman, n-1 for degree n.
  double weil_bound() const {
    return kind == FamilyKind::odd_polynomial ? static_cast<double>(degree() - 1) : 2.0;
  }

  /// Degrees 7 and 9 are outside the family for which the monodromy is known.
  bool has_degree_warning() const {
    return kind == FamilyKind::odd_polynomial && (degree() == 7 || degree() == 9);
  }

  std::string name() const {
    switch (kind) {
      case FamilyKind::birch: return "birch";
      case FamilyKind::kloosterman: return "kloosterman";
      case FamilyKind::odd_polynomial: {
        std::string s = "oddpoly:";
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
          if (i) s += ',';
          s += std::to_string(coeffs[i]);
        }
        return s;
      }
    }
    return "?";
  }

  /// Parses "birch", "kloosterman" or "oddpoly:c0,c1,...,cn" (index = degree).
  static TraceFamily parse(const std::string& text) {
    if (text == "birch") return birch();
    if (text == "kloosterman" || text == "kloost") return kloosterman();
    const std::string prefix = "oddpoly:";
    if (text.rfind(prefix, 0) == 0) {
      std::vector<std::int64_t> c;
      std::string rest = text.substr(prefix.size());
      std::size_t pos = 0;
      while (pos <= rest.size()) {
        const std::size_t comma = rest.find(',', pos);
        const std::string tok =
            rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        try {
          c.push_back(std::stoll(tok));
        } catch (const std::exception&) {
          throw domain_error("bad odd-polynomial coefficient '" + tok + "'");
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      return odd_polynomial(std::move(c));
    }
    throw domain_error("unknown family '" + text + "'");
  }

  friend bool operator==(const TraceFamily&, const TraceFamily&) = default;
};

/// Phase of the n-th term at parameter a, reduced mod p.
inline residue eval_phase(const TraceFamily& family, const FieldContext& ctx, residue a,
                          residue n) {
  const std::uint64_t p = ctx.p();
  a %= p;
  n %= p;
  switch (family.kind) {
    case FamilyKind::birch: {
      const std::uint64_t n2 = mul_mod(n, n, p);
      return (mul_mod(n2, n, p) + mul_mod(a, n, p)) % p;
    }
    case FamilyKind::kloosterman: {
      if (n == 0) throw domain_error("Kloosterman phase undefined at n = 0");
      return (mul_mod(a, n, p) + modular_inverse(ctx, n)) % p;
    }
    case FamilyKind::odd_polynomial: {
      std::uint64_t acc = 0;
      for (auto it = family.coeffs.rbegin(); it != family.coeffs.rend(); ++it) {
        acc = (mul_mod(acc, n, p) + reduce_signed(*it, p)) % p;
      }
      return (acc + mul_mod(a, n, p)) % p;
    }
  }
  return 0;
}

/// The a-independent part f(n) mod p for every n in [0, p). For Kloosterman,
/// f(n) = inv(n) and entry 0 is meaningless (the n = 0 term is absent).
inline std::vector<std::uint32_t> phase_sequence(const TraceFamily& family,
                                                 const FieldContext& ctx) {
  const std::uint64_t p = ctx.p();
  if (family.kind == FamilyKind::kloosterman) {
    return inverse_table(ctx);
  }
  std::vector<std::uint32_t> f(p);
  for (std::uint64_t n = 0; n < p; ++n) {
    f[n] = static_cast<std::uint32_t>(eval_phase(family, ctx, 0, n));
  }
  return f;
}

/// First summation index of the family (1 for Kloosterman, 0 otherwise).
inline std::uint64_t first_index(const TraceFamily& family) {
  return family.kind == FamilyKind::kloosterman ? 1 : 0;
}

/// The sequence n -> e_p(f(n)) whose DFT gives every complete sum at once.
inline std::vector<cplx> base_sequence(const TraceFamily& family, const FieldContext& ctx) {
  const auto f = phase_sequence(family, ctx);
  std::vector<cplx> x(ctx.p());
  for (std::uint64_t n = first_index(family); n < ctx.p(); ++n) x[n] = ctx.unit(f[n]);
  return x;
}

}  // namespace birchmax
