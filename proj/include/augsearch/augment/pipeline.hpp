#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "augsearch/augment/filters.hpp"
#include "augsearch/augment/jpeg.hpp"
#include "augsearch/error.hpp"
#include "augsearch/image.hpp"
#include "augsearch/json_util.hpp"
#include "augsearch/rng.hpp"

namespace augsearch {

enum class OperatorKind : int {
  HorizontalFlip,
  RandomCrop,
  JpegCompress,
  GaussianBlur,
  GaussianNoise,
  Sharpen,
  Contrast,
  ColorJitter,
  Grayscale,
  ColorInvert,
  AutoPolicyStub,
  RandPolicyStub,
  ResizeLarge,
  ResizeSmall,
};

inline constexpr int kOperatorKindCount = 14;

inline constexpr std::array<std::string_view, kOperatorKindCount> kOperatorNames = {
    "HorizontalFlip", "RandomCrop", "JpegCompress",   "GaussianBlur",   "GaussianNoise",
    "Sharpen",        "Contrast",   "ColorJitter",    "Grayscale",      "ColorInvert",
    "AutoPolicyStub", "RandPolicyStub", "ResizeLarge", "ResizeSmall",
};

constexpr std::string_view to_string(OperatorKind kind) noexcept {
  return kOperatorNames[static_cast<int>(kind)];
}

inline std::optional<OperatorKind> parse_operator(std::string_view name) {
  for (int i = 0; i < kOperatorKindCount; ++i)
    if (kOperatorNames[i] == name) return static_cast<OperatorKind>(i);
  return std::nullopt;
}

// The searchable pool: every kind except the two always-on geometric ones.
inline constexpr int kPoolSize = 12;

constexpr OperatorKind pool_kind(int slot) noexcept { return static_cast<OperatorKind>(slot + 2); }
constexpr int pool_slot(OperatorKind kind) noexcept { return static_cast<int>(kind) - 2; }

constexpr bool is_stub(OperatorKind kind) noexcept {
  return kind == OperatorKind::AutoPolicyStub || kind == OperatorKind::RandPolicyStub;
}

// Pool slots that can actually run, in canonical order.
inline std::vector<OperatorKind> executable_pool() {
  std::vector<OperatorKind> out;
  for (int s = 0; s < kPoolSize; ++s)
    if (!is_stub(pool_kind(s))) out.push_back(pool_kind(s));
  return out;
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct IntInterval {
  int lo = 0;
  int hi = 0;
  friend bool operator==(const IntInterval&, const IntInterval&) = default;
};

struct OperatorParams {
  IntInterval jpeg_qf_range{30, 100};
  Interval blur_sigma_range{0.0, 3.0};
  Interval noise_sigma_range{0.0, 2.0};  // 8-bit units
  double sharpen_factor = 2.0;
  Interval contrast_factor_range{0.5, 1.5};
  Interval jitter_brightness{0.75, 1.25};
  Interval jitter_contrast{0.75, 1.25};
  Interval jitter_saturation{0.75, 1.25};
  Interval jitter_hue{-0.05, 0.05};  // turns
  int crop_size = 64;
  int crop_align = 1;
  int resize_large = 64;
  int resize_small = 32;
  double apply_prob = 0.5;

  void validate() const {
    auto check = [](const Interval& i, const char* name) {
      require(i.lo <= i.hi, std::string(name) + ": interval is empty");
    };
    require(jpeg_qf_range.lo <= jpeg_qf_range.hi, "jpeg_qf_range: interval is empty");
    require(jpeg_qf_range.lo >= 1 && jpeg_qf_range.hi <= 100, "jpeg_qf_range: must lie within [1, 100]");
    check(blur_sigma_range, "blur_sigma_range");
    require(blur_sigma_range.lo >= 0.0, "blur_sigma_range: must be non-negative");
    check(noise_sigma_range, "noise_sigma_range");
    require(noise_sigma_range.lo >= 0.0, "noise_sigma_range: must be non-negative");
    require(sharpen_factor >= 0.0, "sharpen_factor: must be non-negative");
    check(contrast_factor_range, "contrast_factor_range");
    require(contrast_factor_range.lo > 0.0, "contrast_factor_range: must be positive");
    check(jitter_brightness, "jitter_brightness");
    require(jitter_brightness.lo >= 0.0, "jitter_brightness: must be non-negative");
    check(jitter_contrast, "jitter_contrast");
    require(jitter_contrast.lo > 0.0, "jitter_contrast: must be positive");
    check(jitter_saturation, "jitter_saturation");
    require(jitter_saturation.lo >= 0.0, "jitter_saturation: must be non-negative");
    check(jitter_hue, "jitter_hue");
    require(crop_size > 0 && crop_align >= 1, "crop_size/crop_align: must be positive");
    require(resize_large >= 8 && resize_small >= 8, "resize targets: must be at least 8");
    require(apply_prob >= 0.0 && apply_prob <= 1.0, "apply_prob: must lie in [0, 1]");
  }

  friend bool operator==(const OperatorParams&, const OperatorParams&) = default;
};

// Inclusion bits over the searchable pool plus operator parameters.
class AugmentationSet {
 public:
  AugmentationSet() = default;
  explicit AugmentationSet(std::uint32_t bits, OperatorParams params = {}) : bits_(bits), params_(params) {
    require(bits < (1u << kPoolSize), "augmentation set: bits outside the pool");
  }

  AugmentationSet(std::initializer_list<OperatorKind> kinds, OperatorParams params = {}) : params_(params) {
    for (auto k : kinds) enable(k);
  }

  std::uint32_t bits() const noexcept { return bits_; }
  const OperatorParams& params() const noexcept { return params_; }
  OperatorParams& params() noexcept { return params_; }

  bool enabled(OperatorKind kind) const noexcept {
    const int slot = pool_slot(kind);
    return slot >= 0 && slot < kPoolSize && (bits_ >> slot) & 1u;
  }

  AugmentationSet& enable(OperatorKind kind) {
    const int slot = pool_slot(kind);
    require(slot >= 0 && slot < kPoolSize, "augmentation set: " + std::string(to_string(kind)) +
                                               " is always on and cannot be toggled");
    bits_ |= 1u << slot;
    return *this;
  }

  std::vector<OperatorKind> enabled_kinds() const {
    std::vector<OperatorKind> out;
    for (int s = 0; s < kPoolSize; ++s)
      if ((bits_ >> s) & 1u) out.push_back(pool_kind(s));
    return out;
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(std::popcount(bits_)); }

  std::string describe() const {
    std::string out = "{";
    for (auto k : enabled_kinds()) {
      if (out.size() > 1) out += ", ";
      out += to_string(k);
    }
    return out + "}";
  }

  friend bool operator==(const AugmentationSet&, const AugmentationSet&) = default;

 private:
  std::uint32_t bits_ = 0;
  OperatorParams params_{};
};

// Brightness, contrast, saturation and hue, each drawn from its interval and
// applied in an order shuffled by `rng`.
inline Image color_jitter(const Image& image, Rng& rng, const OperatorParams& params) {
  if (image.channels() != 3) fail(ErrorKind::UnsupportedChannels, "color_jitter: needs 3 channels");
  std::array<int, 4> order{0, 1, 2, 3};
  for (int i = 3; i > 0; --i) std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  const double brightness = rng.uniform(params.jitter_brightness.lo, params.jitter_brightness.hi);
  const double contrast = rng.uniform(params.jitter_contrast.lo, params.jitter_contrast.hi);
  const double saturation = rng.uniform(params.jitter_saturation.lo, params.jitter_saturation.hi);
  const double hue = rng.uniform(params.jitter_hue.lo, params.jitter_hue.hi);
  Image out = image;
  for (int step : order) {
    switch (step) {
      case 0: out = adjust_brightness(out, brightness); break;
      case 1: out = adjust_contrast(out, contrast); break;
      case 2: out = adjust_saturation(out, saturation); break;
      default: out = rotate_hue(out, hue); break;
    }
  }
  return out;
}

// Applies one pool operator with parameters drawn from `params`.
inline Image apply_operator(OperatorKind kind, const Image& image, Rng& rng, const OperatorParams& params) {
  switch (kind) {
    case OperatorKind::JpegCompress:
      return jpeg_compress(image, static_cast<int>(rng.integer(params.jpeg_qf_range.lo, params.jpeg_qf_range.hi)));
    case OperatorKind::GaussianBlur:
      return gaussian_blur(image, rng.uniform(params.blur_sigma_range.lo, params.blur_sigma_range.hi));
    case OperatorKind::GaussianNoise: {
      const double sigma = rng.uniform(params.noise_sigma_range.lo, params.noise_sigma_range.hi);
      return gaussian_noise(image, sigma, rng);
    }
    case OperatorKind::Sharpen: return sharpen(image, params.sharpen_factor);
    case OperatorKind::Contrast:
      return adjust_contrast(image, rng.uniform(params.contrast_factor_range.lo, params.contrast_factor_range.hi));
    case OperatorKind::ColorJitter:
      return image.channels() == 3 ? color_jitter(image, rng, params) : image;
    case OperatorKind::Grayscale: return grayscale(image);
    case OperatorKind::ColorInvert: return color_invert(image);
    case OperatorKind::ResizeLarge: return resize(image, params.resize_large);
    case OperatorKind::ResizeSmall: return resize(image, params.resize_small);
    case OperatorKind::HorizontalFlip: return horizontal_flip(image, rng);
    case OperatorKind::RandomCrop: return random_crop(image, params.crop_size, rng, params.crop_align);
    case OperatorKind::AutoPolicyStub:
    case OperatorKind::RandPolicyStub: break;
  }
  fail(ErrorKind::NotImplemented, std::string(to_string(kind)) + " is not implemented");
}

inline void check_executable(const AugmentationSet& set) {
  for (auto k : set.enabled_kinds())
    if (is_stub(k)) fail(ErrorKind::NotImplemented, std::string(to_string(k)) + " is not implemented");
}

// Flip (p = 0.5), crop (skipped when ResizeLarge is enabled), then every
// enabled pool operator in enumeration order, each gated by an independent
// Bernoulli(apply_prob). Resize operators run last. Every operator draws
// from its own child generator so enabling one operator never shifts the
// random stream of another.
inline Image apply_pipeline(const AugmentationSet& set, const Image& image, const Rng& rng) {
  check_executable(set);
  const auto& params = set.params();
  Rng flip_rng = rng.split("HorizontalFlip");
  Image out = horizontal_flip(image, flip_rng);
  if (!set.enabled(OperatorKind::ResizeLarge)) {
    Rng crop_rng = rng.split("RandomCrop");
    out = random_crop(out, params.crop_size, crop_rng, params.crop_align);
  }
  for (int pass = 0; pass < 2; ++pass) {
    for (auto kind : set.enabled_kinds()) {
      const bool is_resize = kind == OperatorKind::ResizeLarge || kind == OperatorKind::ResizeSmall;
      if (is_resize != (pass == 1)) continue;
      Rng op_rng = rng.split(to_string(kind));
      if (!op_rng.bernoulli(params.apply_prob)) continue;
      out = apply_operator(kind, out, op_rng, params);
    }
  }
  return out;
}

// ---- structured config -------------------------------------------------

inline nlohmann::json to_json(const Interval& i) { return nlohmann::json::array({i.lo, i.hi}); }
inline nlohmann::json to_json(const IntInterval& i) { return nlohmann::json::array({i.lo, i.hi}); }

inline nlohmann::json to_json(const OperatorParams& p) {
  return {
      {"jpeg_qf_range", to_json(p.jpeg_qf_range)},
      {"blur_sigma_range", to_json(p.blur_sigma_range)},
      {"noise_sigma_range", to_json(p.noise_sigma_range)},
      {"sharpen_factor", p.sharpen_factor},
      {"contrast_factor_range", to_json(p.contrast_factor_range)},
      {"jitter_brightness", to_json(p.jitter_brightness)},
      {"jitter_contrast", to_json(p.jitter_contrast)},
      {"jitter_saturation", to_json(p.jitter_saturation)},
      {"jitter_hue", to_json(p.jitter_hue)},
      {"crop_size", p.crop_size},
      {"crop_align", p.crop_align},
      {"resize_large", p.resize_large},
      {"resize_small", p.resize_small},
      {"apply_prob", p.apply_prob},
  };
}

inline nlohmann::json to_json(const AugmentationSet& set) {
  nlohmann::json names = nlohmann::json::array();
  for (auto k : set.enabled_kinds()) names.push_back(std::string(to_string(k)));
  return {{"enabled", names}, {"params", to_json(set.params())}};
}

namespace detail {

inline Interval interval_from(const nlohmann::json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    fail(ErrorKind::Config, key + ": expected [lo, hi]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline IntInterval int_interval_from(const nlohmann::json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer())
    fail(ErrorKind::Config, key + ": expected [lo, hi] integers");
  return {j[0].get<int>(), j[1].get<int>()};
}

}  // namespace detail

// Missing keys keep their defaults; unknown keys are an error.
inline OperatorParams operator_params_from_json(const nlohmann::json& j) {
  OperatorParams p;
  json_util::ObjectReader r(j, "params");
  r.read("jpeg_qf_range", [&](const auto& v) { p.jpeg_qf_range = detail::int_interval_from(v, "jpeg_qf_range"); });
  r.read("blur_sigma_range", [&](const auto& v) { p.blur_sigma_range = detail::interval_from(v, "blur_sigma_range"); });
  r.read("noise_sigma_range", [&](const auto& v) { p.noise_sigma_range = detail::interval_from(v, "noise_sigma_range"); });
  r.number("sharpen_factor", p.sharpen_factor);
  r.read("contrast_factor_range",
         [&](const auto& v) { p.contrast_factor_range = detail::interval_from(v, "contrast_factor_range"); });
  r.read("jitter_brightness", [&](const auto& v) { p.jitter_brightness = detail::interval_from(v, "jitter_brightness"); });
  r.read("jitter_contrast", [&](const auto& v) { p.jitter_contrast = detail::interval_from(v, "jitter_contrast"); });
  r.read("jitter_saturation", [&](const auto& v) { p.jitter_saturation = detail::interval_from(v, "jitter_saturation"); });
  r.read("jitter_hue", [&](const auto& v) { p.jitter_hue = detail::interval_from(v, "jitter_hue"); });
  r.integer("crop_size", p.crop_size);
  r.integer("crop_align", p.crop_align);
  r.integer("resize_large", p.resize_large);
  r.integer("resize_small", p.resize_small);
  r.number("apply_prob", p.apply_prob);
  r.finish();
  try {
    p.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Config, e.what());
  }
  return p;
}

inline AugmentationSet augmentation_set_from_json(const nlohmann::json& j) {
  AugmentationSet set;
  json_util::ObjectReader r(j, "augmentations");
  r.read("enabled", [&](const nlohmann::json& names) {
    if (!names.is_array()) fail(ErrorKind::Config, "augmentations.enabled: expected a list of operator names");
    for (const auto& n : names) {
      if (!n.is_string()) fail(ErrorKind::Config, "augmentations.enabled: expected operator names");
      const auto kind = parse_operator(n.get<std::string>());
      if (!kind) fail(ErrorKind::Config, "unknown operator '" + n.get<std::string>() + "'");
      if (pool_slot(*kind) < 0) fail(ErrorKind::Config, n.get<std::string>() + " is always on and cannot be listed");
      set.enable(*kind);
    }
  });
  r.read("params", [&](const nlohmann::json& p) { set.params() = operator_params_from_json(p); });
  r.finish();
  return set;
}

}  // namespace augsearch
