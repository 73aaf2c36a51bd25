#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "augsearch/error.hpp"

namespace augsearch::fft {

using Complex = std::complex<double>;

// In-place iterative radix-2 transform. inverse=true applies the 1/n scale.
inline void transform(std::vector<Complex>& a, bool inverse) {
  const std::size_t n = a.size();
  require(n > 0 && (n & (n - 1)) == 0, "fft: size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    const Complex wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      Complex w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const Complex u = a[i + k];
        const Complex v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse)
    for (auto& x : a) x /= static_cast<double>(n);
}

// Row-major n x n grid.
inline void transform2d(std::vector<Complex>& grid, std::size_t n, bool inverse) {
  require(grid.size() == n * n, "fft2d: grid must be n*n");
  std::vector<Complex> line(n);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) line[x] = grid[y * n + x];
    transform(line, inverse);
    for (std::size_t x = 0; x < n; ++x) grid[y * n + x] = line[x];
  }
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) line[y] = grid[y * n + x];
    transform(line, inverse);
    for (std::size_t y = 0; y < n; ++y) grid[y * n + x] = line[y];
  }
}

}  // namespace augsearch::fft
