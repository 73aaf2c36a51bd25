#pragma once

// Evaluation-time perturbation recipes.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "augsearch/augment/filters.hpp"
#include "augsearch/augment/jpeg.hpp"
#include "augsearch/error.hpp"
#include "augsearch/image.hpp"
#include "augsearch/json_util.hpp"
#include "augsearch/rng.hpp"

namespace augsearch {

struct JpegStep {
  int quality = 65;
  friend bool operator==(const JpegStep&, const JpegStep&) = default;
};
struct BlurStep {
  double sigma = 1.0;
  friend bool operator==(const BlurStep&, const BlurStep&) = default;
};
struct NoiseStep {
  double sigma = 1.0;  // 8-bit units
  friend bool operator==(const NoiseStep&, const NoiseStep&) = default;
};
struct ResizeStep {
  int target = 64;
  friend bool operator==(const ResizeStep&, const ResizeStep&) = default;
};

using ScenarioStep = std::variant<JpegStep, BlurStep, NoiseStep, ResizeStep>;

struct Scenario {
  std::string name;
  std::vector<ScenarioStep> steps;
  std::uint64_t seed_salt = 0;

  void validate() const {
    require(!name.empty(), "scenario: name must not be empty");
    for (const auto& step : steps) {
      if (auto* j = std::get_if<JpegStep>(&step)) require(j->quality >= 1 && j->quality <= 100, "scenario " + name + ": qf out of range");
      if (auto* b = std::get_if<BlurStep>(&step)) require(b->sigma >= 0.0, "scenario " + name + ": blur sigma must be non-negative");
      if (auto* n = std::get_if<NoiseStep>(&step)) require(n->sigma >= 0.0, "scenario " + name + ": noise sigma must be non-negative");
      if (auto* r = std::get_if<ResizeStep>(&step)) require(r->target >= 8, "scenario " + name + ": resize target must be at least 8");
    }
  }

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

inline std::vector<Scenario> builtin_scenarios() {
  return {
      {"clean", {}, 0x11},
      {"jpeg", {JpegStep{65}}, 0x12},
      {"blur", {BlurStep{1.0}}, 0x13},
      {"noise", {NoiseStep{1.0}}, 0x14},
      {"combined", {BlurStep{1.0}, NoiseStep{1.0}, JpegStep{65}}, 0x15},
      {"resize", {ResizeStep{64}}, 0x16},
  };
}

inline Scenario builtin_scenario(const std::string& name) {
  for (auto& s : builtin_scenarios())
    if (s.name == name) return s;
  fail(ErrorKind::Parameter, "unknown scenario '" + name + "'");
}

// Noise draws come from (seed_salt, image_index) only, so every image is
// perturbed the same way regardless of evaluation order.
inline Image apply_scenario(const Scenario& s, const Image& image, std::uint64_t image_index) {
  Rng rng = Rng(s.seed_salt).split(image_index);
  Image out = image;
  for (const auto& step : s.steps) {
    std::visit(
        [&](const auto& st) {
          using T = std::decay_t<decltype(st)>;
          if constexpr (std::is_same_v<T, JpegStep>) out = jpeg_compress(out, st.quality);
          else if constexpr (std::is_same_v<T, BlurStep>) out = gaussian_blur(out, st.sigma);
          else if constexpr (std::is_same_v<T, NoiseStep>) out = gaussian_noise(out, st.sigma, rng);
          else out = resize(out, st.target);
        },
        step);
  }
  return out;
}

inline nlohmann::json to_json(const Scenario& s) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& step : s.steps) {
    std::visit(
        [&](const auto& st) {
          using T = std::decay_t<decltype(st)>;
          if constexpr (std::is_same_v<T, JpegStep>) steps.push_back({{"op", "JpegCompress"}, {"qf", st.quality}});
          else if constexpr (std::is_same_v<T, BlurStep>) steps.push_back({{"op", "GaussianBlur"}, {"sigma", st.sigma}});
          else if constexpr (std::is_same_v<T, NoiseStep>) steps.push_back({{"op", "GaussianNoise"}, {"sigma", st.sigma}});
          else steps.push_back({{"op", "Resize"}, {"target", st.target}});
        },
        step);
  }
  return {{"name", s.name}, {"steps", steps}, {"seed_salt", s.seed_salt}};
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  json_util::ObjectReader r(j, "scenario");
  r.string("name", s.name);
  r.integer("seed_salt", s.seed_salt);
  r.read("steps", [&](const nlohmann::json& steps) {
    if (!steps.is_array()) fail(ErrorKind::Config, "scenario.steps: expected a list");
    for (const auto& st : steps) {
      json_util::ObjectReader sr(st, "scenario.steps[]");
      std::string op;
      sr.string("op", op);
      if (op == "JpegCompress") {
        JpegStep v;
        sr.integer("qf", v.quality);
        s.steps.emplace_back(v);
      } else if (op == "GaussianBlur") {
        BlurStep v;
        sr.number("sigma", v.sigma);
        s.steps.emplace_back(v);
      } else if (op == "GaussianNoise") {
        NoiseStep v;
        sr.number("sigma", v.sigma);
        s.steps.emplace_back(v);
      } else if (op == "Resize") {
        ResizeStep v;
        sr.integer("target", v.target);
        s.steps.emplace_back(v);
      } else {
        fail(ErrorKind::Config, "scenario.steps: unknown op '" + op + "'");
      }
      sr.finish();
    }
  });
  r.finish();
  try {
    s.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Config, e.what());
  }
  return s;
}

}  // namespace augsearch
