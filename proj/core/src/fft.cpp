#include "fft.hpp"

#include <cmath>

namespace affect::dsp::detail {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_pow2(std::size_t n) { return n && (n & (n - 1)) == 0; }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Iterative Cooley-Tukey, n must be a power of two.
void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& z : a) z *= inv;
  }
}

// Bluestein chirp-z transform for arbitrary n.
void fft_bluestein(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  const std::size_t m = next_pow2(2 * n + 1);
  const double sign = inverse ? 1.0 : -1.0;

  std::vector<std::complex<double>> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    // k^2 mod 2n keeps the phase argument small
    const double ang = kPi * static_cast<double>((k * k) % (2 * n)) /
                       static_cast<double>(n);
    chirp[k] = std::complex<double>(std::cos(ang), sign * std::sin(ang));
  }

  std::vector<std::complex<double>> p(m, {0.0, 0.0}), q(m, {0.0, 0.0});
  for (std::size_t k = 0; k < n; ++k) p[k] = a[k] * chirp[k];
  q[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) q[k] = q[m - k] = std::conj(chirp[k]);

  fft_pow2(p, false);
  fft_pow2(q, false);
  for (std::size_t k = 0; k < m; ++k) p[k] *= q[k];
  fft_pow2(p, true);

  for (std::size_t k = 0; k < n; ++k) a[k] = p[k] * chirp[k];
  if (inverse) {
    const double inv = 1.0 / static_cast<double>(n);
    for (auto& z : a) z *= inv;
  }
}

}  // namespace

void fft(std::vector<std::complex<double>>& a, bool inverse) {
  if (a.size() <= 1) return;
  if (is_pow2(a.size())) {
    fft_pow2(a, inverse);
  } else {
    fft_bluestein(a, inverse);
  }
}

std::vector<std::complex<double>> rfft(const double* x, int n) {
  std::vector<std::complex<double>> a(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] = {x[i], 0.0};
  fft(a, false);
  a.resize(static_cast<std::size_t>(n / 2 + 1));
  return a;
}

}  // namespace affect::dsp::detail
