#pragma once

// Shared helpers for the unit tests: scratch directories and random inputs.

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "augsearch/image.hpp"
#include "augsearch/rng.hpp"

namespace test {

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("augsearch-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline augsearch::Image random_image(augsearch::Rng& rng, int w, int h, int channels) {
  augsearch::Image img(w, h, channels);
  for (auto& s : img.mutable_samples()) s = static_cast<float>(rng.uniform01());
  return img;
}

// Smooth gradient plus random texture: a natural-ish test image.
inline augsearch::Image textured_image(augsearch::Rng& rng, int w, int h, int channels) {
  augsearch::Image img(w, h, channels);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < channels; ++c)
        img.at(x, y, c) = augsearch::clamp01(0.2 + 0.5 * (x + y) / (w + h) + 0.1 * c + 0.15 * rng.uniform01());
  return img;
}

inline augsearch::Image constant_image(int w, int h, int channels, float v) {
  return augsearch::Image(w, h, channels, v);
}

}  // namespace test
