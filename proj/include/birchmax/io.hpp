#pragma once

// Binary table cache and CSV export.
//
// Cache layout (little-endian):
//   char[4] magic "BMAX" | u32 version | u32 family tag | u64 p | u32 L
//   then (L == 0 ? 1 : L + 1) rows, each p f64 real parts followed by p f64
//   imaginary parts.
// L == 0 marks a complete-sum table; L > 0 a checkpoint matrix whose rows are
// the cutoffs x_0..x_L.

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "birchmax/engine.hpp"
#include "birchmax/errors.hpp"

namespace birchmax {

inline constexpr std::array<char, 4> cache_magic = {'B', 'M', 'A', 'X'};
inline constexpr std::uint32_t cache_version = 1;
inline constexpr const char* library_version = "0.1.0";

/// Shortest text that round-trips: 17 significant digits, '.' decimal, no locale.
inline std::string format_double(double v) {
  std::array<char, 40> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

namespace detail {

template <class T>
void write_le(std::ostream& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(bytes.data(), sizeof(T));
}

template <class T>
T read_le(std::istream& in) {
  std::array<char, sizeof(T)> bytes;
  if (!in.read(bytes.data(), sizeof(T))) throw cache_error("cache file truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline void write_rows(std::ostream& out, std::span<const cplx> data, std::uint64_t p) {
  for (std::size_t off = 0; off < data.size(); off += p) {
    for (std::uint64_t i = 0; i < p; ++i) write_le(out, data[off + i].real());
    for (std::uint64_t i = 0; i < p; ++i) write_le(out, data[off + i].imag());
  }
}

inline void read_rows(std::istream& in, std::span<cplx> data, std::uint64_t p) {
  std::vector<double> re(p), im(p);
  for (std::size_t off = 0; off < data.size(); off += p) {
    for (auto& v : re) v = read_le<double>(in);
    for (auto& v : im) v = read_le<double>(in);
    for (std::uint64_t i = 0; i < p; ++i) data[off + i] = {re[i], im[i]};
  }
}

}  // namespace detail

struct CacheHeader {
  std::uint32_t version = cache_version;
  FamilyKind family = FamilyKind::birch;
  std::uint64_t p = 0;
  std::uint32_t L = 0;
};

inline void write_cache_header(std::ostream& out, const CacheHeader& h) {
  out.write(cache_magic.data(), cache_magic.size());
  detail::write_le(out, h.version);
  detail::write_le(out, static_cast<std::uint32_t>(h.family));
  detail::write_le(out, h.p);
  detail::write_le(out, h.L);
}

inline CacheHeader read_cache_header(std::istream& in) {
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), magic.size())) throw cache_error("cache file truncated");
  if (magic != cache_magic) throw cache_error("bad cache magic");
  CacheHeader h;
  h.version = detail::read_le<std::uint32_t>(in);
  if (h.version != cache_version) {
    throw cache_error("cache version " + std::to_string(h.version) + " != " + std::to_string(cache_version));
  }
  const auto tag = detail::read_le<std::uint32_t>(in);
  if (tag > 2) throw cache_error("bad family tag " + std::to_string(tag));
  h.family = static_cast<FamilyKind>(tag);
  h.p = detail::read_le<std::uint64_t>(in);
  h.L = detail::read_le<std::uint32_t>(in);
  return h;
}

/// Filesystem cache keyed by (family, p, L, format version).
class TableCache {
 public:
  explicit TableCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const noexcept { return dir_; }

  /// "<family>_p<p>_L<L>_v<version>.bmax"; odd polynomials carry a coefficient hash.
  std::filesystem::path path_for(const TraceFamily& family, std::uint64_t p, std::uint32_t L) const {
    std::string fam;
    switch (family.kind) {
      case FamilyKind::birch: fam = "birch"; break;
      case FamilyKind::kloosterman: fam = "kloosterman"; break;
      case FamilyKind::odd_polynomial: {
        char hex[17];
        std::snprintf(hex, sizeof hex, "%016llx",
                      static_cast<unsigned long long>(detail::fnv1a(family.name())));
        fam = std::string("oddpoly-") + hex;
        break;
      }
    }
    return dir_ / (fam + "_p" + std::to_string(p) + "_L" + std::to_string(L) + "_v" +
                   std::to_string(cache_version) + ".bmax");
  }

  std::string key_for(const TraceFamily& family, std::uint64_t p, std::uint32_t L) const {
    return path_for(family, p, L).filename().string();
  }

  void store(const CompleteSumTable& t) const {
    write_file(path_for(t.family, t.p, 0), CacheHeader{cache_version, t.family.kind, t.p, 0}, t.complex_values);
  }

  void store(const CheckpointMatrix& m) const {
    write_file(path_for(m.family, m.p, m.L), CacheHeader{cache_version, m.family.kind, m.p, m.L}, m.data);
  }

  /// Empty when no file exists; throws cache_error when a file exists but is corrupt.
  std::optional<CompleteSumTable> load_complete(const TraceFamily& family, std::uint64_t p) const {
    std::vector<cplx> data(p);
    if (!read_file(path_for(family, p, 0), family, p, 0, data)) return std::nullopt;
    CompleteSumTable t;
    t.family = family;
    t.p = p;
    t.complex_values = std::move(data);
    t.values.resize(p);
    for (std::uint64_t a = 0; a < p; ++a) {
      t.values[a] = t.complex_values[a].real();
      t.max_imag_residue = std::max(t.max_imag_residue, std::abs(t.complex_values[a].imag()));
    }
    return t;
  }

  std::optional<CheckpointMatrix> load_matrix(const TraceFamily& family, std::uint64_t p,
                                              std::uint32_t L) const {
    CheckpointMatrix m;
    m.family = family;
    m.p = p;
    m.L = L;
    m.checkpoints = checkpoint_positions(p, L);
    m.data.resize(m.checkpoints.size() * p);
    if (!read_file(path_for(family, p, L), family, p, L, m.data)) return std::nullopt;
    return m;
  }

 private:
  void write_file(const std::filesystem::path& path, const CacheHeader& h,
                  std::span<const cplx> data) const {
    std::filesystem::create_directories(dir_);
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw cache_error("cannot write " + tmp);
      write_cache_header(out, h);
      detail::write_rows(out, data, h.p);
      if (!out) throw cache_error("write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
  }

  bool read_file(const std::filesystem::path& path, const TraceFamily& family, std::uint64_t p,
                 std::uint32_t L, std::span<cplx> data) const {
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return false;
    const auto expected = 24 + data.size() * 2 * sizeof(double);
    if (std::filesystem::file_size(path) != expected) {
      throw cache_error("cache file " + path.string() + " has the wrong size");
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw cache_error("cannot open " + path.string());
    const auto h = read_cache_header(in);
    if (h.family != family.kind || h.p != p || h.L != L) {
      throw cache_error("cache file " + path.string() + " does not match its key");
    }
    detail::read_rows(in, data, p);
    return true;
  }

  std::filesystem::path dir_;
};

/// Columns (a, value).
inline void write_complete_csv(std::ostream& out, const CompleteSumTable& t) {
  out << "a,value\n";
  for (std::uint64_t a = 0; a < t.p; ++a) out << a << ',' << format_double(t.values[a]) << '\n';
}

/// Columns (a, ell, re, im).
inline void write_matrix_csv(std::ostream& out, const CheckpointMatrix& m) {
  out << "a,ell,re,im\n";
  for (std::uint64_t a = 0; a < m.p; ++a) {
    for (std::size_t l = 0; l < m.rows(); ++l) {
      const cplx v = m.row(l)[a];
      out << a << ',' << l << ',' << format_double(v.real()) << ',' << format_double(v.imag()) << '\n';
    }
  }
}

}  // namespace birchmax
