#pragma once

// Image samples are 32-bit floats in [0, 1], row-major, channel-interleaved.
// Model and metric code works in 64-bit; images are only read from there.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "augsearch/error.hpp"

namespace augsearch {

inline float clamp01(float v) noexcept {
  if (!(v == v)) return 0.0f;  // NaN
  return std::clamp(v, 0.0f, 1.0f);
}

inline float clamp01(double v) noexcept {
  if (!(v == v)) return 0.0f;
  return static_cast<float>(std::clamp(v, 0.0, 1.0));
}

class Image {
 public:
  Image() = default;

  Image(int width, int height, int channels) : Image(width, height, channels, 0.0f) {}

  Image(int width, int height, int channels, float fill)
      : width_(width), height_(height), channels_(channels) {
    validate_shape();
    samples_.assign(sample_count(), clamp01(fill));
  }

  Image(int width, int height, int channels, std::vector<float> samples)
      : width_(width), height_(height), channels_(channels), samples_(std::move(samples)) {
    validate_shape();
    if (samples_.size() != sample_count())
      fail(ErrorKind::Parameter, "image: sample count does not match width*height*channels");
    for (auto& s : samples_) s = clamp01(s);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
  std::size_t sample_count() const noexcept { return pixel_count() * channels_; }
  bool empty() const noexcept { return samples_.empty(); }

  std::span<const float> samples() const noexcept { return samples_; }

  // Writable view for operators assembling a fresh image. Callers are
  // responsible for leaving samples in [0, 1]; see clamp_all().
  std::span<float> mutable_samples() noexcept { return samples_; }

  float at(int x, int y, int c) const noexcept { return samples_[index(x, y, c)]; }
  float& at(int x, int y, int c) noexcept { return samples_[index(x, y, c)]; }

  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  void clamp_all() noexcept {
    for (auto& s : samples_) s = clamp01(s);
  }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  void validate_shape() const {
    if (width_ <= 0 || height_ <= 0) fail(ErrorKind::Parameter, "image: dimensions must be positive");
    if (channels_ != 1 && channels_ != 3)
      fail(ErrorKind::UnsupportedChannels, "image: channels must be 1 or 3");
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<float> samples_;
};

constexpr double kLumaR = 0.299;
constexpr double kLumaG = 0.587;
constexpr double kLumaB = 0.114;

inline double luma_at(const Image& img, int x, int y) noexcept {
  if (img.channels() == 1) return img.at(x, y, 0);
  return kLumaR * img.at(x, y, 0) + kLumaG * img.at(x, y, 1) + kLumaB * img.at(x, y, 2);
}

// Luma plane as 64-bit values, row-major.
inline std::vector<double> luma_plane(const Image& img) {
  std::vector<double> out(img.pixel_count());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) out[static_cast<std::size_t>(y) * img.width() + x] = luma_at(img, x, y);
  return out;
}

inline double mean_luma(const Image& img) {
  double sum = 0.0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) sum += luma_at(img, x, y);
  return sum / static_cast<double>(img.pixel_count());
}

inline double mean_squared_error(const Image& a, const Image& b) {
  if (!a.same_shape(b)) fail(ErrorKind::Parameter, "mse: shape mismatch");
  double sum = 0.0;
  auto sa = a.samples();
  auto sb = b.samples();
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const double d = static_cast<double>(sa[i]) - sb[i];
    sum += d * d;
  }
  return sum / static_cast<double>(sa.size());
}

// Peak signal-to-noise ratio in dB with peak 1.0; identical images give +inf.
inline double psnr(const Image& a, const Image& b) {
  const double mse = mean_squared_error(a, b);
  if (mse == 0.0) return INFINITY;
  return 10.0 * std::log10(1.0 / mse);
}

inline double max_abs_diff(const Image& a, const Image& b) {
  if (!a.same_shape(b)) fail(ErrorKind::Parameter, "max_abs_diff: shape mismatch");
  double m = 0.0;
  auto sa = a.samples();
  auto sb = b.samples();
  for (std::size_t i = 0; i < sa.size(); ++i) m = std::max(m, std::abs(static_cast<double>(sa[i]) - sb[i]));
  return m;
}

// Index into [0, n) with mirror reflection that does not repeat the edge
// sample (... 2 1 | 0 1 2 ... n-1 | n-2 ...). Works for any offset.
inline int reflect_index(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

}  // namespace augsearch
