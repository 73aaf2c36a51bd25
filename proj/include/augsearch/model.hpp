#pragma once

// Small detector: fixed high-pass preprocessing, one tanh feature layer and a
// logit head. All model arithmetic is 64-bit.
//
//   x = preprocess(image)            1024 inputs (32 x 32 residual map)
//   h = tanh(W1 x + b1)              32 features (the feature-loss tap)
//   z = w2 . h + b2                  logit, p = sigmoid(z)

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "augsearch/augment/filters.hpp"
#include "augsearch/error.hpp"
#include "augsearch/image.hpp"
#include "augsearch/rng.hpp"

namespace augsearch {

inline constexpr int kMapSide = 32;
inline constexpr int kInputDim = kMapSide * kMapSide;
inline constexpr int kFeatureDim = 32;
// Inputs larger than this are center-cropped to it first, matching the
// training crop so the fingerprint keeps one scale at train and test time.
inline constexpr int kCanonicalSide = 64;
// Residuals of [0, 1] images are small; this fixed gain brings them to
// roughly unit spread.
inline constexpr double kInputGain = 8.0;
inline constexpr int kMinInputSide = 32;

using Vector = std::vector<double>;

// Luma minus its 3x3 box mean (zero padding), bilinearly resampled to
// 32 x 32 and scaled by kInputGain.
inline Vector preprocess(const Image& image) {
  if (image.width() < kMinInputSide || image.height() < kMinInputSide)
    fail(ErrorKind::Parameter, "model input must be at least " + std::to_string(kMinInputSide) + " pixels per side");
  const Image& view = image;
  Image cropped;
  const Image* src = &view;
  if (image.width() > kCanonicalSide && image.height() > kCanonicalSide) {
    cropped = center_crop(image, kCanonicalSide);
    src = &cropped;
  }
  const int w = src->width(), h = src->height();
  const auto luma = luma_plane(*src);
  std::vector<double> residual(luma.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = x + dx, yy = y + dy;
          if (xx >= 0 && xx < w && yy >= 0 && yy < h) sum += luma[static_cast<std::size_t>(yy) * w + xx];
        }
      residual[static_cast<std::size_t>(y) * w + x] = luma[static_cast<std::size_t>(y) * w + x] - sum / 9.0;
    }
  auto map = resize_bilinear_plane(residual, w, h, 1, kMapSide, kMapSide);
  for (auto& v : map) v *= kInputGain;
  return map;
}

struct Model {
  Vector w1 = Vector(static_cast<std::size_t>(kFeatureDim) * kInputDim, 0.0);  // row j = feature j
  Vector b1 = Vector(kFeatureDim, 0.0);
  Vector w2 = Vector(kFeatureDim, 0.0);
  double b2 = 0.0;

  static constexpr std::size_t parameter_count() noexcept {
    return static_cast<std::size_t>(kFeatureDim) * kInputDim + 2 * kFeatureDim + 1;
  }

  // Flat parameter view in the order w1, b1, w2, b2.
  template <typename Fn>
  void for_each_parameter(Fn&& fn) {
    for (auto& v : w1) fn(v);
    for (auto& v : b1) fn(v);
    for (auto& v : w2) fn(v);
    fn(b2);
  }

  template <typename Fn>
  void for_each_parameter(Fn&& fn) const {
    for (const auto& v : w1) fn(v);
    for (const auto& v : b1) fn(v);
    for (const auto& v : w2) fn(v);
    fn(b2);
  }

  bool all_finite() const {
    bool ok = true;
    for_each_parameter([&](double v) { ok = ok && std::isfinite(v); });
    return ok;
  }

  friend bool operator==(const Model&, const Model&) = default;
};

// Glorot-uniform weights, zero biases.
inline Model init_model(Rng rng) {
  Model m;
  const double a1 = std::sqrt(6.0 / (kInputDim + kFeatureDim));
  for (auto& v : m.w1) v = rng.uniform(-a1, a1);
  const double a2 = std::sqrt(6.0 / (kFeatureDim + 1));
  for (auto& v : m.w2) v = rng.uniform(-a2, a2);
  return m;
}

struct ForwardResult {
  Vector features;
  double logit = 0.0;
};

inline double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline ForwardResult forward_input(const Model& model, std::span<const double> x) {
  require(x.size() == static_cast<std::size_t>(kInputDim), "forward: input has wrong dimension");
  ForwardResult r;
  r.features.resize(kFeatureDim);
  r.logit = model.b2;
  for (int j = 0; j < kFeatureDim; ++j) {
    const double* row = model.w1.data() + static_cast<std::size_t>(j) * kInputDim;
    double a = model.b1[j];
    for (int i = 0; i < kInputDim; ++i) a += row[i] * x[i];
    r.features[j] = std::tanh(a);
    r.logit += model.w2[j] * r.features[j];
  }
  return r;
}

inline ForwardResult forward(const Model& model, const Image& image) { return forward_input(model, preprocess(image)); }

// -log p(label | logit), stable for any finite logit.
inline double bce_loss(double logit, int label) noexcept {
  return std::max(logit, 0.0) - logit * label + std::log1p(std::exp(-std::abs(logit)));
}

enum class FeatureLossKind { None, MSE, Cosine };

constexpr std::string_view to_string(FeatureLossKind k) noexcept {
  switch (k) {
    case FeatureLossKind::None: return "none";
    case FeatureLossKind::MSE: return "mse";
    case FeatureLossKind::Cosine: return "cosine";
  }
  return "none";
}

inline constexpr double kCosineNormFloor = 1e-12;

// Loss value and its gradients with respect to both arguments.
struct FeatureLossGrad {
  double value = 0.0;
  Vector d_orig;
  Vector d_pert;
};

inline FeatureLossGrad feature_loss_grad(std::span<const double> a, std::span<const double> b, FeatureLossKind kind) {
  require(a.size() == b.size(), "feature_loss: dimension mismatch");
  FeatureLossGrad g;
  const std::size_t n = a.size();
  g.d_orig.assign(n, 0.0);
  g.d_pert.assign(n, 0.0);
  if (kind == FeatureLossKind::None || n == 0) return g;
  if (kind == FeatureLossKind::MSE) {
    for (std::size_t i = 0; i < n; ++i) {
      const double d = a[i] - b[i];
      g.value += d * d;
      g.d_orig[i] = 2.0 * d / static_cast<double>(n);
      g.d_pert[i] = -g.d_orig[i];
    }
    g.value /= static_cast<double>(n);
    return g;
  }
  double dot = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dot += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  const double na = std::sqrt(aa), nb = std::sqrt(bb);
  if (na <= kCosineNormFloor && nb <= kCosineNormFloor) return g;
  const double ea = std::max(na, kCosineNormFloor), eb = std::max(nb, kCosineNormFloor);
  const double cosine = dot / (ea * eb);
  g.value = 1.0 - cosine;
  for (std::size_t i = 0; i < n; ++i) {
    const double ga = b[i] / (ea * eb) - (na > kCosineNormFloor ? cosine * a[i] / (ea * ea) : 0.0);
    const double gb = a[i] / (ea * eb) - (nb > kCosineNormFloor ? cosine * b[i] / (eb * eb) : 0.0);
    g.d_orig[i] = -ga;
    g.d_pert[i] = -gb;
  }
  return g;
}

inline double feature_loss(std::span<const double> a, std::span<const double> b, FeatureLossKind kind) {
  require(kind != FeatureLossKind::None, "feature_loss: kind must be MSE or Cosine");
  return feature_loss_grad(a, b, kind).value;
}

struct LossConfig {
  double lambda1 = 1.0;
  double lambda2 = 0.0;
  FeatureLossKind ft_kind = FeatureLossKind::None;

  // None forces lambda2 = 0. The converse is allowed: a weighted-out MSE or
  // cosine term must behave exactly like no term at all.
  void validate() const {
    require(lambda1 >= 0.0 && lambda2 >= 0.0, "loss: lambdas must be non-negative");
    require(ft_kind != FeatureLossKind::None || lambda2 == 0.0, "loss: ft_kind none requires lambda2 = 0");
  }

  bool uses_twins() const noexcept { return ft_kind != FeatureLossKind::None && lambda2 != 0.0; }
  friend bool operator==(const LossConfig&, const LossConfig&) = default;
};

inline double total_loss(double l_cls, double l_ft, const LossConfig& cfg) noexcept {
  return cfg.lambda1 * l_cls + cfg.lambda2 * l_ft;
}

// Preprocessed mini-batch. `twins` is either empty or holds one perturbed
// input per entry of `inputs`.
struct Batch {
  std::vector<Vector> inputs;
  std::vector<int> labels;
  std::vector<Vector> twins;
};

struct LossBreakdown {
  double total = 0.0;
  double cls = 0.0;
  double ft = 0.0;
};

struct BackwardResult {
  Model gradient;  // same layout as the model
  LossBreakdown loss;
};

// Mean batch loss and its exact gradient; the feature term differentiates
// through both the original and the perturbed pass.
inline BackwardResult backward(const Model& model, const Batch& batch, const LossConfig& cfg) {
  cfg.validate();
  require(!batch.inputs.empty(), "backward: empty batch");
  require(batch.labels.size() == batch.inputs.size(), "backward: labels and inputs differ in length");
  const bool twins = cfg.uses_twins();
  require(!twins || batch.twins.size() == batch.inputs.size(), "backward: feature loss needs one twin per input");

  BackwardResult out;
  auto& g = out.gradient;
  const double inv_b = 1.0 / static_cast<double>(batch.inputs.size());
  Vector d_act(kFeatureDim);

  auto accumulate_first_layer = [&](std::span<const double> x, const Vector& da) {
    for (int j = 0; j < kFeatureDim; ++j) {
      if (da[j] == 0.0) continue;
      double* row = g.w1.data() + static_cast<std::size_t>(j) * kInputDim;
      for (int i = 0; i < kInputDim; ++i) row[i] += da[j] * x[i];
      g.b1[j] += da[j];
    }
  };

  for (std::size_t s = 0; s < batch.inputs.size(); ++s) {
    const auto& x = batch.inputs[s];
    const auto fw = forward_input(model, x);
    const double l_cls = bce_loss(fw.logit, batch.labels[s]);
    double l_ft = 0.0;
    const double dz = cfg.lambda1 * (sigmoid(fw.logit) - batch.labels[s]) * inv_b;
    for (int j = 0; j < kFeatureDim; ++j) g.w2[j] += dz * fw.features[j];
    g.b2 += dz;

    Vector dh(kFeatureDim);
    for (int j = 0; j < kFeatureDim; ++j) dh[j] = dz * model.w2[j];

    if (twins) {
      const auto& xt = batch.twins[s];
      const auto ft = forward_input(model, xt);
      const auto fl = feature_loss_grad(fw.features, ft.features, cfg.ft_kind);
      l_ft = fl.value;
      for (int j = 0; j < kFeatureDim; ++j) {
        dh[j] += cfg.lambda2 * inv_b * fl.d_orig[j];
        const double dht = cfg.lambda2 * inv_b * fl.d_pert[j];
        d_act[j] = dht * (1.0 - ft.features[j] * ft.features[j]);
      }
      accumulate_first_layer(xt, d_act);
    }
    for (int j = 0; j < kFeatureDim; ++j) d_act[j] = dh[j] * (1.0 - fw.features[j] * fw.features[j]);
    accumulate_first_layer(x, d_act);

    out.loss.cls += l_cls * inv_b;
    out.loss.ft += l_ft * inv_b;
  }
  out.loss.total = total_loss(out.loss.cls, out.loss.ft, cfg);
  return out;
}

// Mean batch loss only (no gradient).
inline LossBreakdown batch_loss(const Model& model, const Batch& batch, const LossConfig& cfg) {
  const bool twins = cfg.uses_twins();
  LossBreakdown out;
  const double inv_b = 1.0 / static_cast<double>(batch.inputs.size());
  for (std::size_t s = 0; s < batch.inputs.size(); ++s) {
    const auto fw = forward_input(model, batch.inputs[s]);
    out.cls += bce_loss(fw.logit, batch.labels[s]) * inv_b;
    if (twins) {
      const auto ft = forward_input(model, batch.twins[s]);
      out.ft += feature_loss_grad(fw.features, ft.features, cfg.ft_kind).value * inv_b;
    }
  }
  out.total = total_loss(out.cls, out.ft, cfg);
  return out;
}

// ---- checkpoint ---------------------------------------------------------
//
// Layout (all integers and floats little-endian):
//   8 bytes  magic "AUGSMDL\0"
//   u32      format version (1)
//   u32      input dimension, u32 feature dimension
//   f64 x N  parameters in for_each_parameter order
//   u64      byte length L of the config echo, then L bytes of JSON text

inline constexpr char kCheckpointMagic[8] = {'A', 'U', 'G', 'S', 'M', 'D', 'L', '\0'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class ByteReader {
 public:
  explicit ByteReader(const std::string& bytes) : bytes_(bytes) {}
  std::uint64_t u64() { return read(8); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(read(4)); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string take(std::size_t n) {
    if (pos_ + n > bytes_.size()) fail(ErrorKind::MalformedHeader, "checkpoint: truncated");
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool at_end() const noexcept { return pos_ == bytes_.size(); }

 private:
  std::uint64_t read(int n) {
    if (pos_ + n > bytes_.size()) fail(ErrorKind::MalformedHeader, "checkpoint: truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += n;
    return v;
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline void save_checkpoint(const Model& model, const std::string& config_echo, const std::filesystem::path& path) {
  std::string bytes(kCheckpointMagic, sizeof kCheckpointMagic);
  detail::put_u32(bytes, kCheckpointVersion);
  detail::put_u32(bytes, kInputDim);
  detail::put_u32(bytes, kFeatureDim);
  model.for_each_parameter([&](double v) { detail::put_u64(bytes, std::bit_cast<std::uint64_t>(v)); });
  detail::put_u64(bytes, config_echo.size());
  bytes += config_echo;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write checkpoint: " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::Io, "checkpoint write failed: " + path.string());
}

struct Checkpoint {
  Model model;
  std::string config_echo;
};

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (!std::filesystem::exists(path)) fail(ErrorKind::MissingFile, "no such checkpoint: " + path.string());
    fail(ErrorKind::Io, "cannot open checkpoint: " + path.string());
  }
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  detail::ByteReader r(bytes);
  if (r.take(8) != std::string(kCheckpointMagic, 8)) fail(ErrorKind::MalformedHeader, "checkpoint: bad magic");
  const auto version = r.u32();
  if (version != kCheckpointVersion)
    fail(ErrorKind::Schema, "checkpoint: unsupported version " + std::to_string(version));
  if (r.u32() != static_cast<std::uint32_t>(kInputDim) || r.u32() != static_cast<std::uint32_t>(kFeatureDim))
    fail(ErrorKind::Schema, "checkpoint: dimension mismatch");
  Checkpoint ck;
  ck.model.for_each_parameter([&](double& v) { v = r.f64(); });
  const auto n = r.u64();
  ck.config_echo = r.take(static_cast<std::size_t>(n));
  if (!r.at_end()) fail(ErrorKind::MalformedHeader, "checkpoint: trailing bytes");
  return ck;
}

}  // namespace augsearch
