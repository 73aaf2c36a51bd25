#pragma once

// Pixel-domain augmentation operators. All operators are pure functions of
// their arguments (and of the Rng state where one is taken) and return a new
// image with every sample in [0, 1].

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "augsearch/error.hpp"
#include "augsearch/image.hpp"
#include "augsearch/rng.hpp"

namespace augsearch {

// Sampled Gaussian, radius ceil(3 sigma), normalized to sum 1. Index r is the
// center tap.
inline std::vector<double> gaussian_kernel(double sigma) {
  require(sigma > 0.0, "gaussian_kernel: sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += k[i + radius];
  }
  for (auto& v : k) v /= sum;
  return k;
}

// Separable convolution with reflect padding; result is not clamped.
inline std::vector<double> convolve_separable(const Image& image, const std::vector<double>& kernel) {
  const int w = image.width(), h = image.height(), ch = image.channels();
  const int radius = static_cast<int>(kernel.size() / 2);
  auto src = image.samples();
  std::vector<double> tmp(image.sample_count());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k)
          acc += kernel[k + radius] * src[image.index(reflect_index(x + k, w), y, c)];
        tmp[image.index(x, y, c)] = acc;
      }
  std::vector<double> out(image.sample_count());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k)
          acc += kernel[k + radius] * tmp[image.index(x, reflect_index(y + k, h), c)];
        out[image.index(x, y, c)] = acc;
      }
  return out;
}

inline Image from_values(const Image& shape, const std::vector<double>& values) {
  Image out(shape.width(), shape.height(), shape.channels());
  auto dst = out.mutable_samples();
  for (std::size_t i = 0; i < values.size(); ++i) dst[i] = clamp01(values[i]);
  return out;
}

inline Image gaussian_blur(const Image& image, double sigma) {
  require(sigma >= 0.0, "gaussian_blur: sigma must be non-negative");
  if (sigma == 0.0) return image;
  return from_values(image, convolve_separable(image, gaussian_kernel(sigma)));
}

// sigma_8bit is a standard deviation on the 0-255 scale.
inline Image gaussian_noise(const Image& image, double sigma_8bit, Rng& rng) {
  require(sigma_8bit >= 0.0, "gaussian_noise: sigma must be non-negative");
  if (sigma_8bit == 0.0) return image;
  const double sigma = sigma_8bit / 255.0;
  Image out = image;
  for (auto& s : out.mutable_samples()) s = clamp01(s + sigma * rng.normal());
  return out;
}

// Unsharp mask against a sigma-1 Gaussian.
inline Image sharpen(const Image& image, double factor) {
  require(factor >= 0.0, "sharpen: factor must be non-negative");
  if (factor == 1.0) return image;
  const auto blurred = convolve_separable(image, gaussian_kernel(1.0));
  auto src = image.samples();
  std::vector<double> out(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) out[i] = src[i] + (factor - 1.0) * (src[i] - blurred[i]);
  return from_values(image, out);
}

inline Image adjust_contrast(const Image& image, double factor) {
  require(factor > 0.0, "adjust_contrast: factor must be positive");
  if (factor == 1.0) return image;
  const double m = mean_luma(image);
  Image out = image;
  for (auto& s : out.mutable_samples()) s = clamp01(m + factor * (s - m));
  return out;
}

inline Image adjust_brightness(const Image& image, double factor) {
  require(factor >= 0.0, "adjust_brightness: factor must be non-negative");
  if (factor == 1.0) return image;
  Image out = image;
  for (auto& s : out.mutable_samples()) s = clamp01(s * factor);
  return out;
}

// Lerp each pixel toward its luma; 0 is fully desaturated.
inline Image adjust_saturation(const Image& image, double factor) {
  require(factor >= 0.0, "adjust_saturation: factor must be non-negative");
  if (image.channels() != 3) fail(ErrorKind::UnsupportedChannels, "adjust_saturation: needs 3 channels");
  if (factor == 1.0) return image;
  Image out = image;
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x) {
      const double l = luma_at(image, x, y);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = clamp01(l + factor * (image.at(x, y, c) - l));
    }
  return out;
}

// Hue rotation by `turns` of a full circle: a rigid rotation of RGB about
// the gray axis (1,1,1). Equivalent to an HSV hue shift up to the usual
// hexcone distortion, and exact on grays.
inline Image rotate_hue(const Image& image, double turns) {
  if (image.channels() != 3) fail(ErrorKind::UnsupportedChannels, "rotate_hue: needs 3 channels");
  if (turns == 0.0) return image;
  const double a = 2.0 * std::numbers::pi * turns;
  const double cs = std::cos(a), sn = std::sin(a);
  const double d = (1.0 - cs) / 3.0;
  const double e = std::sqrt(1.0 / 3.0) * sn;
  const std::array<std::array<double, 3>, 3> m{{
      {cs + d, d - e, d + e},
      {d + e, cs + d, d - e},
      {d - e, d + e, cs + d},
  }};
  Image out = image;
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x) {
      const double r = image.at(x, y, 0), g = image.at(x, y, 1), b = image.at(x, y, 2);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = clamp01(m[c][0] * r + m[c][1] * g + m[c][2] * b);
    }
  return out;
}

inline Image grayscale(const Image& image) {
  if (image.channels() == 1) return image;
  Image out = image;
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x) {
      const float l = clamp01(luma_at(image, x, y));
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = l;
    }
  return out;
}

inline Image color_invert(const Image& image) {
  Image out = image;
  for (auto& s : out.mutable_samples()) s = 1.0f - s;
  return out;
}

inline Image flip_columns(const Image& image) {
  Image out = image;
  const int w = image.width();
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < image.channels(); ++c) out.at(x, y, c) = image.at(w - 1 - x, y, c);
  return out;
}

// Mirrors columns with probability 0.5.
inline Image horizontal_flip(const Image& image, Rng& rng) {
  return rng.bernoulli(0.5) ? flip_columns(image) : image;
}

inline Image crop(const Image& image, int x0, int y0, int width, int height) {
  require(x0 >= 0 && y0 >= 0 && width > 0 && height > 0 && x0 + width <= image.width() &&
              y0 + height <= image.height(),
          "crop: window outside image");
  Image out(width, height, image.channels());
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < image.channels(); ++c) out.at(x, y, c) = image.at(x0 + x, y0 + y, c);
  return out;
}

// size x size window. Offsets are drawn uniformly from the multiples of
// `align` that keep the window inside the image (x first, then y).
inline Image random_crop(const Image& image, int size, Rng& rng, int align = 1) {
  require(size > 0, "random_crop: size must be positive");
  require(align >= 1, "random_crop: align must be at least 1");
  if (size > image.width() || size > image.height())
    fail(ErrorKind::Parameter, "random_crop: crop size exceeds image");
  const int x0 = static_cast<int>(rng.integer(0, (image.width() - size) / align)) * align;
  const int y0 = static_cast<int>(rng.integer(0, (image.height() - size) / align)) * align;
  return crop(image, x0, y0, size, size);
}

inline Image center_crop(const Image& image, int size) {
  require(size <= image.width() && size <= image.height(), "center_crop: size exceeds image");
  return crop(image, (image.width() - size) / 2, (image.height() - size) / 2, size, size);
}

// Bilinear resampling with half-pixel centers and edge clamping.
inline std::vector<double> resize_bilinear_plane(const std::vector<double>& src, int sw, int sh, int channels,
                                                 int tw, int th) {
  std::vector<double> out(static_cast<std::size_t>(tw) * th * channels);
  const double sx = static_cast<double>(sw) / tw;
  const double sy = static_cast<double>(sh) / th;
  for (int y = 0; y < th; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(sh - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, sh - 1);
    const double wy = fy - y0;
    for (int x = 0; x < tw; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(sw - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, sw - 1);
      const double wx = fx - x0;
      for (int c = 0; c < channels; ++c) {
        auto at = [&](int xx, int yy) { return src[(static_cast<std::size_t>(yy) * sw + xx) * channels + c]; };
        const double top = at(x0, y0) * (1.0 - wx) + at(x1, y0) * wx;
        const double bottom = at(x0, y1) * (1.0 - wx) + at(x1, y1) * wx;
        out[(static_cast<std::size_t>(y) * tw + x) * channels + c] = top * (1.0 - wy) + bottom * wy;
      }
    }
  }
  return out;
}

inline Image resize(const Image& image, int target) {
  require(target >= 8, "resize: target must be at least 8");
  if (image.width() == target && image.height() == target) return image;
  auto s = image.samples();
  const std::vector<double> src(s.begin(), s.end());
  const auto values =
      resize_bilinear_plane(src, image.width(), image.height(), image.channels(), target, target);
  Image out(target, target, image.channels());
  auto dst = out.mutable_samples();
  for (std::size_t i = 0; i < values.size(); ++i) dst[i] = clamp01(values[i]);
  return out;
}

}  // namespace augsearch
