#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace tsmotif {

// In-place iterative radix-2 FFT. n must be a power of two.
inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double pi = 3.14159265358979323846;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        std::complex<double> u = a[i + j];
        std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse) {
    for (auto& x : a) x /= static_cast<double>(n);
  }
}

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Linear convolution of two real sequences via FFT.
inline std::vector<double> fft_convolve(const std::vector<double>& x,
                                        const std::vector<double>& y) {
  const std::size_t out_n = x.size() + y.size() - 1;
  const std::size_t n = next_pow2(out_n);
  std::vector<std::complex<double>> fa(n), fb(n);
  for (std::size_t i = 0; i < x.size(); ++i) fa[i] = x[i];
  for (std::size_t i = 0; i < y.size(); ++i) fb[i] = y[i];
  fft_inplace(fa, false);
  fft_inplace(fb, false);
  for (std::size_t i = 0; i < n; ++i) fa[i] *= fb[i];
  fft_inplace(fa, true);
  std::vector<double> out(out_n);
  for (std::size_t i = 0; i < out_n; ++i) out[i] = fa[i].real();
  return out;
}

// Magnitude spectrum of a real signal, length next_pow2(n)/2 + 1.
inline std::vector<double> magnitude_spectrum(const std::vector<double>& x) {
  const std::size_t n = next_pow2(x.size());
  std::vector<std::complex<double>> a(n);
  for (std::size_t i = 0; i < x.size(); ++i) a[i] = x[i];
  fft_inplace(a, false);
  std::vector<double> mag(n / 2 + 1);
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(a[i]);
  return mag;
}

}  // namespace tsmotif
