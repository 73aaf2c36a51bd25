#pragma once

// Procedural real-vs-synthetic corpus. "Real" images are band-limited 1/f
// textures with per-family color statistics; "synthetic" images are drawn
// from the same texture process and then carry a planted periodic grid
// (an upsampling-style fingerprint) with a small random sub-pixel phase.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "augsearch/error.hpp"
#include "augsearch/fft.hpp"
#include "augsearch/image.hpp"
#include "augsearch/json_util.hpp"
#include "augsearch/parallel.hpp"
#include "augsearch/rng.hpp"

namespace augsearch {

struct CorpusConfig {
  int n_train_per_class = 2000;
  int n_val_per_class = 200;
  int n_eval_per_class = 500;
  int image_size = 96;
  double artifact_amplitude = 0.08;
  int artifact_period = 4;
  double artifact_phase_jitter = 2.0;   // pixels, uniform in [-j, j] per axis
  int n_eval_datasets = 4;
  std::uint64_t seed = 1;

  void validate() const;
  friend bool operator==(const CorpusConfig&, const CorpusConfig&) = default;
};

struct TextureFamily {
  std::string name;
  double slope;      // amplitude spectrum ~ f^-slope
  double cutoff;     // Gaussian band limit, cycles per pixel
  double contrast;   // luma standard deviation
  std::array<double, 3> base;   // mean color
  std::array<double, 3> gain;   // per-channel texture gain
};

inline const std::vector<TextureFamily>& texture_families() {
  // Index 0 trains; the rest are evaluation families with distinct spectra
  // and color statistics.
  static const std::vector<TextureFamily> families = {
      {"train", 1.00, 0.30, 0.10, {0.50, 0.48, 0.45}, {1.00, 1.00, 1.00}},
      {"foliage", 0.80, 0.35, 0.09, {0.35, 0.50, 0.30}, {0.80, 1.10, 0.70}},
      {"stone", 1.30, 0.25, 0.12, {0.55, 0.54, 0.52}, {1.00, 1.00, 1.05}},
      {"skin", 1.10, 0.22, 0.08, {0.70, 0.55, 0.48}, {1.10, 0.95, 0.90}},
      {"water", 0.90, 0.40, 0.10, {0.30, 0.42, 0.60}, {0.85, 0.95, 1.15}},
      {"dusk", 1.20, 0.28, 0.11, {0.45, 0.35, 0.45}, {1.05, 0.80, 1.00}},
      {"sand", 0.70, 0.32, 0.07, {0.72, 0.65, 0.48}, {1.00, 0.95, 0.85}},
  };
  return families;
}

inline void CorpusConfig::validate() const {
  require(n_train_per_class > 0 && n_val_per_class > 0 && n_eval_per_class > 0, "corpus: counts must be positive");
  require(image_size >= 16, "corpus: image_size must be at least 16");
  require(artifact_amplitude >= 0.0 && artifact_amplitude <= 1.0, "corpus: artifact_amplitude must lie in [0, 1]");
  require(artifact_period >= 2, "corpus: artifact_period must be at least 2");
  require(artifact_phase_jitter >= 0.0, "corpus: artifact_phase_jitter must be non-negative");
  require(n_eval_datasets >= 1 && n_eval_datasets < static_cast<int>(texture_families().size()),
          "corpus: n_eval_datasets out of range");
}

enum class Label : int { Real = 0, Synthetic = 1 };

struct LabeledDataset {
  std::string name;
  std::vector<Image> images;
  std::vector<int> labels;

  std::size_t size() const noexcept { return images.size(); }

  void validate() const {
    require(images.size() == labels.size(), "dataset " + name + ": images and labels differ in length");
    bool pos = false, neg = false;
    for (int l : labels) {
      require(l == 0 || l == 1, "dataset " + name + ": labels must be 0 or 1");
      (l ? pos : neg) = true;
    }
    require(pos && neg, "dataset " + name + ": both classes must be present");
  }
};

struct Corpus {
  LabeledDataset train;
  LabeledDataset validation;
  std::vector<LabeledDataset> eval_sets;
};

namespace corpus_detail {

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Zero-mean, unit-variance band-limited 1/f texture of size n x n.
inline std::vector<double> texture(int n, const TextureFamily& family, Rng& rng) {
  const std::size_t m = next_pow2(static_cast<std::size_t>(n) + 16);
  std::vector<fft::Complex> grid(m * m);
  for (auto& g : grid) g = {rng.normal(), 0.0};
  fft::transform2d(grid, m, false);
  for (std::size_t v = 0; v < m; ++v)
    for (std::size_t u = 0; u < m; ++u) {
      const double fu = (u <= m / 2 ? static_cast<double>(u) : static_cast<double>(u) - m) / m;
      const double fv = (v <= m / 2 ? static_cast<double>(v) : static_cast<double>(v) - m) / m;
      const double f = std::sqrt(fu * fu + fv * fv);
      double gain = 0.0;
      if (f > 0.0)
        gain = std::pow(f, -family.slope) * std::exp(-(f * f) / (2.0 * family.cutoff * family.cutoff));
      grid[v * m + u] *= gain;
    }
  fft::transform2d(grid, m, true);
  std::vector<double> out(static_cast<std::size_t>(n) * n);
  double mean = 0.0;
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      out[static_cast<std::size_t>(y) * n + x] = grid[static_cast<std::size_t>(y + 8) * m + x + 8].real();
      mean += out[static_cast<std::size_t>(y) * n + x];
    }
  mean /= static_cast<double>(out.size());
  double var = 0.0;
  for (auto& v : out) {
    v -= mean;
    var += v * v;
  }
  const double sd = std::sqrt(var / static_cast<double>(out.size()));
  if (sd > 0.0)
    for (auto& v : out) v /= sd;
  return out;
}

}  // namespace corpus_detail

// Planted fingerprint value at (x, y): a separable period-P cosine grid,
// shifted by (px, py). All of its energy sits in the diagonal bin (N/P, N/P).
inline double artifact_pattern(double x, double y, int period, double px, double py) {
  const double w = 2.0 * std::numbers::pi / period;
  return std::cos(w * (x + px)) * std::cos(w * (y + py));
}

inline Image generate_image(const CorpusConfig& cfg, const TextureFamily& family, Label label, Rng rng) {
  const int n = cfg.image_size;
  Rng tex_rng = rng.split("texture");
  const auto tex = corpus_detail::texture(n, family, tex_rng);
  Rng color_rng = rng.split("color");
  // Small per-image variation of brightness and contrast around the family.
  const double contrast = family.contrast * color_rng.uniform(0.8, 1.25);
  const double shift = color_rng.uniform(-0.05, 0.05);
  double px = 0.0, py = 0.0;
  if (label == Label::Synthetic) {
    Rng phase_rng = rng.split("phase");
    px = phase_rng.uniform(-cfg.artifact_phase_jitter, cfg.artifact_phase_jitter);
    py = phase_rng.uniform(-cfg.artifact_phase_jitter, cfg.artifact_phase_jitter);
  }
  Image img(n, n, 3);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const double t = tex[static_cast<std::size_t>(y) * n + x];
      double art = 0.0;
      if (label == Label::Synthetic)
        art = cfg.artifact_amplitude * artifact_pattern(x, y, cfg.artifact_period, px, py);
      for (int c = 0; c < 3; ++c) img.at(x, y, c) = clamp01(family.base[c] + shift + contrast * family.gain[c] * t + art);
    }
  return img;
}

// Labels alternate 0, 1, 0, 1, ... so every even-length prefix is balanced.
// Image i draws only from rng.split(i), so `jobs` never changes the result.
inline LabeledDataset generate_dataset(const CorpusConfig& cfg, const TextureFamily& family, const std::string& name,
                                       int per_class, const Rng& rng, std::size_t jobs = 1) {
  LabeledDataset ds;
  ds.name = name;
  const auto n = static_cast<std::size_t>(per_class) * 2;
  ds.images.assign(n, Image(1, 1, 1));
  ds.labels.resize(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    const int label = static_cast<int>(i % 2);
    ds.images[i] = generate_image(cfg, family, static_cast<Label>(label), rng.split(static_cast<std::uint64_t>(i)));
    ds.labels[i] = label;
  });
  return ds;
}

inline std::vector<LabeledDataset> generate_eval_sets(const CorpusConfig& cfg, std::size_t jobs = 1) {
  cfg.validate();
  const Rng root(cfg.seed);
  const auto& families = texture_families();
  std::vector<LabeledDataset> out;
  for (int d = 0; d < cfg.n_eval_datasets; ++d) {
    const auto& fam = families[static_cast<std::size_t>(d) + 1];
    out.push_back(generate_dataset(cfg, fam, fam.name, cfg.n_eval_per_class, root.split("eval:" + fam.name), jobs));
  }
  return out;
}

inline Corpus generate_corpus(const CorpusConfig& cfg, std::size_t jobs = 1) {
  cfg.validate();
  const Rng root(cfg.seed);
  const auto& families = texture_families();
  Corpus corpus;
  corpus.train = generate_dataset(cfg, families[0], "train", cfg.n_train_per_class, root.split("train"), jobs);
  corpus.validation =
      generate_dataset(cfg, families[0], "validation", cfg.n_val_per_class, root.split("validation"), jobs);
  corpus.eval_sets = generate_eval_sets(cfg, jobs);
  return corpus;
}

// Power of the luma plane at the 2-D DFT bin (k, k), k = size / period.
// Direct single-bin DFT; used to verify the planted fingerprint.
inline double artifact_bin_power(const Image& image, int period) {
  const auto luma = luma_plane(image);
  const int w = image.width(), h = image.height();
  const double fx = 1.0 / period, fy = 1.0 / period;
  double mean = 0.0;
  for (double v : luma) mean += v;
  mean /= static_cast<double>(luma.size());
  fft::Complex acc(0.0, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double ang = -2.0 * std::numbers::pi * (fx * x + fy * y);
      acc += (luma[static_cast<std::size_t>(y) * w + x] - mean) * fft::Complex(std::cos(ang), std::sin(ang));
    }
  return std::norm(acc) / (static_cast<double>(w) * h);
}

inline nlohmann::json to_json(const CorpusConfig& c) {
  return {{"n_train_per_class", c.n_train_per_class}, {"n_val_per_class", c.n_val_per_class},
          {"n_eval_per_class", c.n_eval_per_class},   {"image_size", c.image_size},
          {"artifact_amplitude", c.artifact_amplitude}, {"artifact_period", c.artifact_period},
          {"artifact_phase_jitter", c.artifact_phase_jitter}, {"n_eval_datasets", c.n_eval_datasets},
          {"seed", c.seed}};
}

inline CorpusConfig corpus_config_from_json(const nlohmann::json& j) {
  CorpusConfig c;
  json_util::ObjectReader r(j, "corpus");
  r.integer("n_train_per_class", c.n_train_per_class);
  r.integer("n_val_per_class", c.n_val_per_class);
  r.integer("n_eval_per_class", c.n_eval_per_class);
  r.integer("image_size", c.image_size);
  r.number("artifact_amplitude", c.artifact_amplitude);
  r.integer("artifact_period", c.artifact_period);
  r.number("artifact_phase_jitter", c.artifact_phase_jitter);
  r.integer("n_eval_datasets", c.n_eval_datasets);
  r.integer("seed", c.seed);
  r.finish();
  try {
    c.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Config, e.what());
  }
  return c;
}

}  // namespace augsearch
