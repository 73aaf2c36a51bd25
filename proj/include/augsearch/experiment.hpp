#pragma once

// Experiment configuration: one JSON document with nested sections. Every
// seed in the effective configuration is the master seed, so a single
// `--seed` override re-seeds the whole run.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "augsearch/augment/pipeline.hpp"
#include "augsearch/corpus.hpp"
#include "augsearch/error.hpp"
#include "augsearch/json_util.hpp"
#include "augsearch/model.hpp"
#include "augsearch/scenarios.hpp"
#include "augsearch/search.hpp"
#include "augsearch/train.hpp"

namespace augsearch {

struct SearchSettings {
  GaConfig ga{};
  int greedy_max_rounds = kPoolSize;
  int fitness_epochs = 12;
  std::vector<OperatorKind> pool = executable_pool();
};

struct ExperimentConfig {
  CorpusConfig corpus{};
  TrainConfig train{};
  LossConfig loss{};
  std::vector<Scenario> scenario_overrides;
  SearchSettings search{};
  std::string output_dir = "run";
  std::uint64_t master_seed = 1;

  // Built-in scenarios with overrides applied by name; new names append.
  std::vector<Scenario> scenarios() const {
    auto out = builtin_scenarios();
    for (const auto& o : scenario_overrides) {
      bool replaced = false;
      for (auto& s : out)
        if (s.name == o.name) {
          s = o;
          replaced = true;
        }
      if (!replaced) out.push_back(o);
    }
    return out;
  }

  void apply_master_seed(std::uint64_t seed) {
    master_seed = seed;
    corpus.seed = seed;
    train.seed = seed;
    search.ga.seed = seed;
  }
};

inline nlohmann::json to_json(const SearchSettings& s) {
  nlohmann::json pool = nlohmann::json::array();
  for (auto k : s.pool) pool.push_back(std::string(to_string(k)));
  return {{"ga", to_json(s.ga)},
          {"greedy_max_rounds", s.greedy_max_rounds},
          {"fitness_epochs", s.fitness_epochs},
          {"pool", pool}};
}

inline nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json scenarios = nlohmann::json::array();
  for (const auto& s : c.scenario_overrides) scenarios.push_back(to_json(s));
  return {{"master_seed", c.master_seed}, {"output_dir", c.output_dir}, {"corpus", to_json(c.corpus)},
          {"train", to_json(c.train)},    {"loss", to_json(c.loss)},    {"scenarios", scenarios},
          {"search", to_json(c.search)}};
}

inline SearchSettings search_settings_from_json(const nlohmann::json& j) {
  SearchSettings s;
  json_util::ObjectReader r(j, "search");
  r.read("ga", [&](const nlohmann::json& v) { s.ga = ga_config_from_json(v); });
  r.integer("greedy_max_rounds", s.greedy_max_rounds);
  r.integer("fitness_epochs", s.fitness_epochs);
  r.read("pool", [&](const nlohmann::json& v) {
    if (!v.is_array()) fail(ErrorKind::Config, "search.pool: expected a list of operator names");
    s.pool.clear();
    for (const auto& name : v) {
      if (!name.is_string()) fail(ErrorKind::Config, "search.pool: expected operator names");
      const auto kind = parse_operator(name.get<std::string>());
      if (!kind || pool_slot(*kind) < 0) fail(ErrorKind::Config, "search.pool: unknown operator '" + name.get<std::string>() + "'");
      s.pool.push_back(*kind);
    }
  });
  r.finish();
  if (s.greedy_max_rounds < 1) fail(ErrorKind::Config, "search.greedy_max_rounds must be at least 1");
  if (s.fitness_epochs < 1) fail(ErrorKind::Config, "search.fitness_epochs must be at least 1");
  if (s.pool.empty() || s.pool.size() > static_cast<std::size_t>(kMaxPoolSize))
    fail(ErrorKind::Config, "search.pool: size out of range");
  try {
    s.ga.validate(static_cast<int>(s.pool.size()));
  } catch (const Error& e) {
    fail(ErrorKind::Config, e.what());
  }
  return s;
}

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  json_util::ObjectReader r(j, "config");
  r.integer("master_seed", c.master_seed);
  r.string("output_dir", c.output_dir);
  r.read("corpus", [&](const nlohmann::json& v) { c.corpus = corpus_config_from_json(v); });
  r.read("train", [&](const nlohmann::json& v) { c.train = train_config_from_json(v); });
  r.read("loss", [&](const nlohmann::json& v) { c.loss = loss_config_from_json(v); });
  r.read("scenarios", [&](const nlohmann::json& v) {
    if (!v.is_array()) fail(ErrorKind::Config, "config.scenarios: expected a list");
    for (const auto& s : v) {
      auto sc = scenario_from_json(s);
      try {
        sc.validate();
      } catch (const Error& e) {
        fail(ErrorKind::Config, e.what());
      }
      c.scenario_overrides.push_back(std::move(sc));
    }
  });
  r.read("search", [&](const nlohmann::json& v) { c.search = search_settings_from_json(v); });
  r.finish();
  c.apply_master_seed(c.master_seed);
  return c;
}

inline ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    if (!std::filesystem::exists(path)) fail(ErrorKind::MissingFile, "no such config file: " + path.string());
    fail(ErrorKind::Io, "cannot read config file: " + path.string());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::Config, std::string("config parse error: ") + e.what());
  }
  return experiment_config_from_json(j);
}

inline std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return out;
}

// The effective config minus output_dir, so reruns into a fresh directory
// produce identical files.
inline nlohmann::json canonical_json(const ExperimentConfig& c) {
  auto j = to_json(c);
  j.erase("output_dir");
  return j;
}

// Hash of the canonical (sorted-key, compact) dump.
inline std::string config_hash(const ExperimentConfig& c) { return hex64(fnv1a64(canonical_json(c).dump())); }

// Shortest round-trip decimal form; locale independent.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace augsearch
