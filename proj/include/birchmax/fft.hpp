#pragma once

// Discrete Fourier transforms of arbitrary (in particular prime) length.
//
// Radix2Fft is an iterative Cooley-Tukey transform on power-of-two sizes.
// DftPlan handles any length n: below a threshold it runs the O(n^2) sum with
// exact integer index arithmetic, above it embeds the transform into a
// power-of-two cyclic convolution (Bluestein / chirp-z):
//
//   X[k] = sum_j x[j] w^{jk},  jk = (j^2 + k^2 - (k-j)^2) / 2.
//
// The sign convention is explicit: sign = +1 computes sum_j x[j] e^{+2 pi i jk/n}.

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace birchmax {

class Radix2Fft {
 public:
  explicit Radix2Fft(std::size_t n) : n_(n) {
    if (n == 0 || !std::has_single_bit(n)) {
      throw std::invalid_argument("Radix2Fft: size must be a power of two");
    }
    twiddle_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
      twiddle_[k] = {std::cos(angle), std::sin(angle)};
    }
    const int bits = std::countr_zero(n);
    rev_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r = 0;
      for (int b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
      rev_[i] = static_cast<std::uint32_t>(r);
    }
  }

  std::size_t size() const noexcept { return n_; }

  /// In-place, unnormalized; sign = +1 uses e^{+2 pi i jk/n}.
  void transform(std::span<std::complex<double>> data, int sign) const {
    const std::size_t n = n_;
    for (std::size_t i = 0; i < n; ++i) {
      if (i < rev_[i]) std::swap(data[i], data[rev_[i]]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = n / len;
      for (std::size_t start = 0; start < n; start += len) {
        for (std::size_t k = 0; k < half; ++k) {
          std::complex<double> w = twiddle_[k * stride];
          if (sign < 0) w = std::conj(w);
          const std::complex<double> u = data[start + k];
          const std::complex<double> v = data[start + k + half] * w;
          data[start + k] = u + v;
          data[start + k + half] = u - v;
        }
      }
    }
  }

 private:
  std::size_t n_;
  std::vector<std::complex<double>> twiddle_;
  std::vector<std::uint32_t> rev_;
};

/// Per-thread scratch for DftPlan::transform.
struct DftWorkspace {
  std::vector<std::complex<double>> buffer;
};

class DftPlan {
 public:
  static constexpr std::size_t default_naive_threshold = 4096;

  explicit DftPlan(std::size_t n, std::size_t naive_threshold = default_naive_threshold)
      : n_(n), naive_(n < naive_threshold) {
    if (n == 0) throw std::invalid_argument("DftPlan: empty transform");
    // Roots e^{2 pi i t/n}, built from one half by conjugation.
    roots_.resize(n);
    roots_[0] = {1.0, 0.0};
    for (std::size_t t = 1; t <= n / 2; ++t) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(t) / static_cast<double>(n);
      roots_[t] = {std::cos(angle), std::sin(angle)};
      roots_[n - t] = std::conj(roots_[t]);
    }
    if (naive_) return;

    const std::size_t m = std::bit_ceil(2 * n - 1);
    fft_ = Radix2Fft(m);
    // chirp[j] = e^{+pi i j^2 / n}; j^2 is reduced mod 2n exactly.
    chirp_.resize(n);
    const std::uint64_t two_n = 2 * static_cast<std::uint64_t>(n);
    for (std::size_t j = 0; j < n; ++j) {
      const std::uint64_t jj = static_cast<std::uint64_t>(j) * j % two_n;
      const double angle = std::numbers::pi * static_cast<double>(jj) / static_cast<double>(n);
      chirp_[j] = {std::cos(angle), std::sin(angle)};
    }
    // Transformed kernel conj(c[d]) at cyclic offsets d in (-n, n).
    kernel_.assign(m, {0.0, 0.0});
    kernel_[0] = std::conj(chirp_[0]);
    for (std::size_t j = 1; j < n; ++j) {
      kernel_[j] = std::conj(chirp_[j]);
      kernel_[m - j] = std::conj(chirp_[j]);
    }
    fft_.transform(kernel_, -1);
  }

  std::size_t size() const noexcept { return n_; }
  bool uses_naive() const noexcept { return naive_; }

  /// out[k] = sum_j in[j] e^{sign * 2 pi i jk / n}. `in` and `out` may alias.
  void transform(std::span<const std::complex<double>> in, std::span<std::complex<double>> out,
                 int sign, DftWorkspace& ws) const {
    const std::size_t n = n_;
    // The negative sign is the conjugate of the positive transform of conj(in).
    if (naive_) {
      ws.buffer.resize(n);
      for (std::size_t j = 0; j < n; ++j) ws.buffer[j] = sign > 0 ? in[j] : std::conj(in[j]);
      std::vector<std::complex<double>> result(n);
      for (std::size_t k = 0; k < n; ++k) {
        std::complex<double> acc{0.0, 0.0};
        std::size_t idx = 0;
        for (std::size_t j = 0; j < n; ++j) {
          acc += ws.buffer[j] * roots_[idx];
          idx += k;
          if (idx >= n) idx -= n;
        }
        result[k] = sign > 0 ? acc : std::conj(acc);
      }
      std::copy(result.begin(), result.end(), out.begin());
      return;
    }

    // e^{2 pi i jk/n} = c[j] c[k] conj(c[k-j]) with c[j] = e^{pi i j^2/n}, so
    // X[k] = c[k] * (a * conj(c))[k] with a[j] = x[j] c[j]: one cyclic
    // convolution of length m >= 2n - 1.
    const std::size_t m = fft_.size();
    ws.buffer.assign(m, {0.0, 0.0});
    for (std::size_t j = 0; j < n; ++j) {
      const std::complex<double> xj = sign > 0 ? in[j] : std::conj(in[j]);
      ws.buffer[j] = xj * chirp_[j];
    }
    fft_.transform(ws.buffer, -1);
    for (std::size_t q = 0; q < m; ++q) ws.buffer[q] *= kernel_[q];
    fft_.transform(ws.buffer, +1);
    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < n; ++k) {
      const std::complex<double> v = ws.buffer[k] * scale * chirp_[k];
      out[k] = sign > 0 ? v : std::conj(v);
    }
  }

 private:
  std::size_t n_;
  bool naive_;
  std::vector<std::complex<double>> roots_;
  Radix2Fft fft_{1};
  std::vector<std::complex<double>> chirp_;
  std::vector<std::complex<double>> kernel_;
};

}  // namespace birchmax
