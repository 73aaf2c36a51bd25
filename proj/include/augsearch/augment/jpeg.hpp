#pragma once

// In-memory JPEG distortion: baseline 4:4:4 transform coding without entropy
// coding. Color conversion is JFIF full-range YCbCr; quantization uses the
// Annex K example tables scaled with the IJG quality formula. Decoded
// samples are rounded to 8-bit levels, as a real decoder would emit.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "augsearch/error.hpp"
#include "augsearch/image.hpp"

namespace augsearch {

namespace jpeg {

using Block = std::array<double, 64>;
using Table = std::array<int, 64>;

inline constexpr Table kLumaBase = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99,
};

inline constexpr Table kChromaBase = {
    17, 18, 24, 47, 99, 99, 99, 99,  //
    18, 21, 26, 66, 99, 99, 99, 99,  //
    24, 26, 56, 99, 99, 99, 99, 99,  //
    47, 66, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,  //
    99, 99, 99, 99, 99, 99, 99, 99,
};

inline Table scaled_table(const Table& base, int quality) {
  require(quality >= 1 && quality <= 100, "jpeg: quality must lie in [1, 100]");
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  Table out{};
  for (int i = 0; i < 64; ++i) out[i] = std::clamp((base[i] * scale + 50) / 100, 1, 255);
  return out;
}

// Orthonormal DCT-II basis, basis[u][x].
inline const std::array<std::array<double, 8>, 8>& dct_basis() {
  static const auto basis = [] {
    std::array<std::array<double, 8>, 8> b{};
    for (int u = 0; u < 8; ++u) {
      const double cu = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int x = 0; x < 8; ++x) b[u][x] = cu * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
    }
    return b;
  }();
  return basis;
}

inline Block forward_dct(const Block& in) {
  const auto& b = dct_basis();
  Block tmp{}, out{};
  for (int y = 0; y < 8; ++y)
    for (int u = 0; u < 8; ++u) {
      double acc = 0.0;
      for (int x = 0; x < 8; ++x) acc += b[u][x] * in[y * 8 + x];
      tmp[y * 8 + u] = acc;
    }
  for (int v = 0; v < 8; ++v)
    for (int u = 0; u < 8; ++u) {
      double acc = 0.0;
      for (int y = 0; y < 8; ++y) acc += b[v][y] * tmp[y * 8 + u];
      out[v * 8 + u] = acc;
    }
  return out;
}

inline Block inverse_dct(const Block& in) {
  const auto& b = dct_basis();
  Block tmp{}, out{};
  for (int v = 0; v < 8; ++v)
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int u = 0; u < 8; ++u) acc += b[u][x] * in[v * 8 + u];
      tmp[v * 8 + x] = acc;
    }
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int v = 0; v < 8; ++v) acc += b[v][y] * tmp[v * 8 + x];
      out[y * 8 + x] = acc;
    }
  return out;
}

// Quantize/dequantize one plane (values on the 0-255 scale, level-shifted
// internally). Edge blocks read reflect-padded samples.
inline std::vector<double> code_plane(const std::vector<double>& plane, int w, int h, const Table& table) {
  std::vector<double> out(plane.size());
  for (int by = 0; by < h; by += 8)
    for (int bx = 0; bx < w; bx += 8) {
      Block block{};
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
          const int sx = reflect_index(bx + x, w);
          const int sy = reflect_index(by + y, h);
          block[y * 8 + x] = plane[static_cast<std::size_t>(sy) * w + sx] - 128.0;
        }
      Block coef = forward_dct(block);
      for (int i = 0; i < 64; ++i) coef[i] = std::round(coef[i] / table[i]) * table[i];
      const Block rec = inverse_dct(coef);
      for (int y = 0; y < 8 && by + y < h; ++y)
        for (int x = 0; x < 8 && bx + x < w; ++x)
          out[static_cast<std::size_t>(by + y) * w + bx + x] = rec[y * 8 + x] + 128.0;
    }
  return out;
}

inline float to_level(double v255) noexcept {
  return static_cast<float>(std::clamp(std::round(v255), 0.0, 255.0) / 255.0);
}

}  // namespace jpeg

inline Image jpeg_compress(const Image& image, int quality) {
  const auto luma_table = jpeg::scaled_table(jpeg::kLumaBase, quality);
  const auto chroma_table = jpeg::scaled_table(jpeg::kChromaBase, quality);
  const int w = image.width(), h = image.height();
  const std::size_t n = image.pixel_count();
  Image out(w, h, image.channels());
  auto src = image.samples();
  auto dst = out.mutable_samples();

  if (image.channels() == 1) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = 255.0 * src[i];
    const auto ry = jpeg::code_plane(y, w, h, luma_table);
    for (std::size_t i = 0; i < n; ++i) dst[i] = jpeg::to_level(ry[i]);
    return out;
  }

  std::vector<double> yp(n), cb(n), cr(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = 255.0 * src[3 * i], g = 255.0 * src[3 * i + 1], b = 255.0 * src[3 * i + 2];
    yp[i] = 0.299 * r + 0.587 * g + 0.114 * b;
    cb[i] = -0.168736 * r - 0.331264 * g + 0.5 * b + 128.0;
    cr[i] = 0.5 * r - 0.418688 * g - 0.081312 * b + 128.0;
  }
  const auto ry = jpeg::code_plane(yp, w, h, luma_table);
  const auto rcb = jpeg::code_plane(cb, w, h, chroma_table);
  const auto rcr = jpeg::code_plane(cr, w, h, chroma_table);
  for (std::size_t i = 0; i < n; ++i) {
    const double yy = ry[i], pb = rcb[i] - 128.0, pr = rcr[i] - 128.0;
    dst[3 * i] = jpeg::to_level(yy + 1.402 * pr);
    dst[3 * i + 1] = jpeg::to_level(yy - 0.344136 * pb - 0.714136 * pr);
    dst[3 * i + 2] = jpeg::to_level(yy + 1.772 * pb);
  }
  return out;
}

}  // namespace augsearch
