#pragma once

// Experiment commands behind the `augsearch` executable. Every output file
// carries the schema version, config hash and master seed; no output
// depends on the worker count or the output directory name.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "augsearch/corpus.hpp"
#include "augsearch/error.hpp"
#include "augsearch/evaluation.hpp"
#include "augsearch/experiment.hpp"
#include "augsearch/image_io.hpp"
#include "augsearch/metrics.hpp"
#include "augsearch/model.hpp"
#include "augsearch/search.hpp"
#include "augsearch/train.hpp"

namespace augsearch::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kCsvColumns = "run_id,scenario,dataset,ap,accuracy,map,map_gain_percent";

namespace fs = std::filesystem;

struct RunContext {
  ExperimentConfig config;
  fs::path out;
  std::size_t jobs = 1;

  std::string hash() const { return config_hash(config); }

  std::string header(const std::string& kind) const {
    return "# augsearch kind=" + kind + " schema=" + std::to_string(kSchemaVersion) + " config_hash=" + hash() +
           " master_seed=" + std::to_string(config.master_seed) + "\n";
  }

  nlohmann::json stamp() const {
    return {{"schema", kSchemaVersion}, {"config_hash", hash()}, {"master_seed", config.master_seed}};
  }
};

inline void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (!fs::exists(path)) fail(ErrorKind::MissingFile, "no such file: " + path.string());
    fail(ErrorKind::Io, "cannot read " + path.string());
  }
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

struct CsvRow {
  std::string run_id, scenario, dataset;
  std::optional<double> ap, accuracy, map, gain;
};

inline std::string csv_line(const CsvRow& r) {
  auto num = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  return r.run_id + "," + r.scenario + "," + r.dataset + "," + num(r.ap) + "," + num(r.accuracy) + "," + num(r.map) +
         "," + num(r.gain) + "\n";
}

inline std::string run_id(const std::string& command, const RunContext& ctx, const std::string& extra = {}) {
  return command + "-" + hex64(fnv1a64(ctx.hash() + "|" + extra)).substr(0, 12);
}

// ---- gen-corpus ----------------------------------------------------------

inline fs::path cmd_gen_corpus(const RunContext& ctx) {
  const Corpus corpus = generate_corpus(ctx.config.corpus, ctx.jobs);
  std::vector<const LabeledDataset*> sets{&corpus.train, &corpus.validation};
  for (const auto& e : corpus.eval_sets) sets.push_back(&e);
  std::string manifest = ctx.header("manifest") + "# path label dataset\n";
  for (const auto* ds : sets) {
    std::vector<std::string> names(ds->size());
    for (std::size_t i = 0; i < ds->size(); ++i) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%06zu.ppm", i);
      names[i] = "corpus/" + ds->name + "/" + buf;
    }
    fs::create_directories(ctx.out / "corpus" / ds->name);
    parallel_for(ds->size(), ctx.jobs, [&](std::size_t i) { save_image(ds->images[i], ctx.out / names[i]); });
    for (std::size_t i = 0; i < ds->size(); ++i)
      manifest += names[i] + " " + std::to_string(ds->labels[i]) + " " + ds->name + "\n";
  }
  const fs::path path = ctx.out / "manifest.txt";
  write_file(path, manifest);
  return path;
}

// ---- train -----------------------------------------------------------------

inline nlohmann::json to_json(const TrainHistory& h) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : h.epochs)
    epochs.push_back({{"epoch", e.epoch},
                      {"learning_rate", e.learning_rate},
                      {"mean_total", e.mean_total},
                      {"mean_cls", e.mean_cls},
                      {"mean_ft", e.mean_ft},
                      {"val_accuracy", e.val_accuracy}});
  return {{"best_epoch", h.best_epoch}, {"stop_reason", std::string(to_string(h.stop_reason))}, {"epochs", epochs}};
}

inline fs::path cmd_train(const RunContext& ctx) {
  const auto& cfg = ctx.config;
  const Corpus corpus = generate_corpus(cfg.corpus, ctx.jobs);
  const auto result = train(corpus.train, corpus.validation, cfg.train, cfg.loss, ctx.jobs);
  nlohmann::json echo = ctx.stamp();
  echo["config"] = canonical_json(cfg);
  const fs::path ckpt = ctx.out / "model.ckpt";
  fs::create_directories(ctx.out);
  save_checkpoint(result.model, echo.dump(), ckpt);
  nlohmann::json history = ctx.stamp();
  history["history"] = to_json(result.history);
  write_file(ctx.out / "history.json", history.dump(2) + "\n");
  return ckpt;
}

// ---- evaluate --------------------------------------------------------------

inline fs::path cmd_evaluate(const RunContext& ctx, const fs::path& checkpoint,
                             const std::optional<fs::path>& baseline = std::nullopt) {
  const auto model = load_checkpoint(checkpoint).model;
  std::optional<Model> base;
  if (baseline) base = load_checkpoint(*baseline).model;
  const auto eval_sets = generate_eval_sets(ctx.config.corpus, ctx.jobs);
  const std::string id =
      run_id("evaluate", ctx, read_file(checkpoint) + "|" + (baseline ? read_file(*baseline) : std::string()));

  std::string csv = ctx.header("metrics") + kCsvColumns + "\n";
  nlohmann::json json = ctx.stamp();
  json["run_id"] = id;
  json["scenarios"] = nlohmann::json::array();
  for (const auto& scenario : ctx.config.scenarios()) {
    const auto report = evaluate_model(model, eval_sets, scenario, ctx.jobs);
    std::optional<GainReport> gain;
    if (base) {
      const auto b = evaluate_model(*base, eval_sets, scenario, ctx.jobs);
      if (b.map > 0.0) gain = make_gain_report(report.map, b.map);
    }
    const std::optional<double> g = gain ? std::optional<double>(gain->gain_percent) : std::nullopt;
    nlohmann::json per_dataset = nlohmann::json::object();
    for (const auto& [name, ap] : report.per_dataset_ap) {
      const double acc = report.accuracy_per_dataset.at(name);
      csv += csv_line({id, scenario.name, name, ap, acc, report.map, g});
      per_dataset[name] = {{"ap", ap}, {"accuracy", acc}};
    }
    csv += csv_line({id, scenario.name, "mean", report.map, report.mean_accuracy(), report.map, g});
    nlohmann::json entry = {{"name", scenario.name},
                            {"map", report.map},
                            {"mean_accuracy", report.mean_accuracy()},
                            {"per_dataset", per_dataset}};
    if (gain) entry["gain"] = {{"map_baseline", gain->map_baseline}, {"map_gain_percent", gain->gain_percent}};
    json["scenarios"].push_back(entry);
  }
  const fs::path path = ctx.out / "metrics.csv";
  write_file(path, csv);
  write_file(ctx.out / "metrics.json", json.dump(2) + "\n");
  return path;
}

// ---- search ----------------------------------------------------------------

enum class Strategy { Greedy, Ga };
enum class TestFitness { None, Additive, OneMax };

// Weights of the additive test fitness; its optimum is {0, 2, 4}.
inline const std::vector<double>& additive_test_weights() {
  static const std::vector<double> w = {3, -1, 2, -2, 1, -5};
  return w;
}
inline constexpr int kOneMaxPool = 16;

inline fs::path cmd_search(const RunContext& ctx, Strategy strategy, TestFitness test = TestFitness::None) {
  const auto& cfg = ctx.config;
  int pool_size = static_cast<int>(cfg.search.pool.size());
  std::optional<Corpus> corpus;
  FitnessFn fitness;
  std::vector<std::string> gene_names;
  std::string scenario_name = "combined";
  TrainConfig base_train = cfg.train;

  switch (test) {
    case TestFitness::Additive:
      pool_size = static_cast<int>(additive_test_weights().size());
      fitness = [](Chromosome c) {
        double s = 0.0;
        for (std::size_t i = 0; i < additive_test_weights().size(); ++i)
          if ((c >> i) & 1u) s += additive_test_weights()[i];
        return s;
      };
      scenario_name = "test:additive";
      break;
    case TestFitness::OneMax:
      pool_size = kOneMaxPool;
      fitness = [](Chromosome c) { return static_cast<double>(std::popcount(c)); };
      scenario_name = "test:onemax";
      break;
    case TestFitness::None: {
      corpus = generate_corpus(fitness_corpus_config(cfg.corpus), ctx.jobs);
      SubsetFitnessConfig fc;
      fc.epochs = cfg.search.fitness_epochs;
      fc.master_seed = cfg.master_seed;
      const Scenario* s = nullptr;
      const auto scenarios = cfg.scenarios();
      for (const auto& sc : scenarios)
        if (sc.name == "combined") s = &sc;
      if (s) fc.scenario = *s;
      fitness = make_subset_fitness(*corpus, base_train, fc, cfg.search.pool);
      for (auto k : cfg.search.pool) gene_names.emplace_back(to_string(k));
      break;
    }
  }
  if (gene_names.empty())
    for (int i = 0; i < pool_size; ++i) gene_names.push_back(std::to_string(i));

  auto members = [&](Chromosome c) {
    nlohmann::json out = nlohmann::json::array();
    for (int i = 0; i < pool_size; ++i)
      if ((c >> i) & 1u) out.push_back(gene_names[static_cast<std::size_t>(i)]);
    return out;
  };

  SearchResult result;
  std::string strategy_name;
  if (strategy == Strategy::Greedy) {
    strategy_name = "greedy";
    result = greedy_search(pool_size, fitness, cfg.search.greedy_max_rounds, ctx.jobs);
  } else {
    strategy_name = "ga";
    GaConfig ga = cfg.search.ga;
    ga.validate(pool_size);
    result = ga_search(pool_size, fitness, ga, ctx.jobs);
  }

  std::string trace;
  {
    nlohmann::json head = ctx.stamp();
    head["strategy"] = strategy_name;
    head["fitness"] = scenario_name;
    head["genes"] = gene_names;
    trace += head.dump() + "\n";
  }
  for (const auto& r : result.trace.records) {
    auto line = to_json(r);
    line["set"] = members(r.chromosome);
    trace += line.dump() + "\n";
  }
  write_file(ctx.out / "trace.jsonl", trace);

  // The empty set is the baseline of the gain column; greedy always scores
  // it, the GA may not.
  std::optional<double> empty_fitness;
  for (const auto& r : result.trace.records)
    if (r.chromosome == 0) empty_fitness = r.fitness;
  if (!empty_fitness) empty_fitness = fitness(0);

  nlohmann::json best = ctx.stamp();
  best["strategy"] = strategy_name;
  best["fitness"] = result.trace.best_fitness;
  best["chromosome"] = result.best;
  best["members"] = members(result.best);
  best["fitness_calls"] = result.trace.fitness_calls;
  best["empty_set_fitness"] = *empty_fitness;
  if (test == TestFitness::None)
    best["augmentation_set"] = to_json(to_augmentation_set(result.best, cfg.search.pool, base_train.train_augmentations.params()));
  write_file(ctx.out / "best_set.json", best.dump(2) + "\n");

  const std::string id = run_id("search-" + strategy_name, ctx, scenario_name);
  std::optional<double> gain;
  if (*empty_fitness > 0.0) gain = map_gain(result.trace.best_fitness, *empty_fitness);
  const fs::path path = ctx.out / "search.csv";
  write_file(path, ctx.header("metrics") + kCsvColumns + "\n" +
                       csv_line({id, scenario_name, "mean", std::nullopt, std::nullopt, result.trace.best_fitness, gain}));
  return path;
}

// ---- report ----------------------------------------------------------------

struct CsvHeader {
  std::string kind;
  int schema = -1;
  std::string config_hash;
  std::string master_seed;
};

inline std::optional<CsvHeader> parse_header(const std::string& line) {
  if (line.rfind("# augsearch ", 0) != 0) return std::nullopt;
  CsvHeader h;
  std::istringstream in(line.substr(2));
  std::string tok;
  while (in >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const auto key = tok.substr(0, eq), value = tok.substr(eq + 1);
    if (key == "kind") {
      h.kind = value;
    } else if (key == "schema") {
      try {
        h.schema = std::stoi(value);
      } catch (const std::exception&) {
        fail(ErrorKind::Schema, "unreadable schema version '" + value + "'");
      }
    } else if (key == "config_hash") {
      h.config_hash = value;
    } else if (key == "master_seed") {
      h.master_seed = value;
    }
  }
  return h;
}

// Merges every metrics CSV under `run_dir` (sorted by relative path) into
// one file. Files whose schema differs from this build are refused.
inline fs::path cmd_report(const fs::path& run_dir, const fs::path& out) {
  if (!fs::is_directory(run_dir)) fail(ErrorKind::MissingFile, "no such run directory: " + run_dir.string());
  const fs::path target = out / "report.csv";
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(run_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv" &&
        fs::weakly_canonical(entry.path()) != fs::weakly_canonical(target))
      files.push_back(fs::relative(entry.path(), run_dir));
  std::sort(files.begin(), files.end());

  std::string sources, rows;
  std::string hashes;
  std::set<std::string> seeds;
  std::size_t merged = 0;
  for (const auto& rel : files) {
    std::istringstream in(read_file(run_dir / rel));
    std::string first, columns;
    std::getline(in, first);
    const auto header = parse_header(first);
    if (!header || header->kind != "metrics") continue;
    if (header->schema != kSchemaVersion)
      fail(ErrorKind::Schema, rel.generic_string() + ": schema " + std::to_string(header->schema) + " does not match " +
                                  std::to_string(kSchemaVersion));
    std::getline(in, columns);
    if (columns != kCsvColumns) fail(ErrorKind::Schema, rel.generic_string() + ": unexpected columns");
    sources += "# source=" + rel.generic_string() + " config_hash=" + header->config_hash +
               " master_seed=" + header->master_seed + "\n";
    hashes += header->config_hash + ";";
    seeds.insert(header->master_seed);
    for (std::string line; std::getline(in, line);)
      if (!line.empty() && line[0] != '#') rows += line + "\n";
    ++merged;
  }
  if (merged == 0) fail(ErrorKind::MissingFile, "no metrics files under " + run_dir.string());
  const std::string head = "# augsearch kind=report schema=" + std::to_string(kSchemaVersion) +
                           " config_hash=" + hex64(fnv1a64(hashes)) + " master_seed=" + (seeds.size() == 1 ? *seeds.begin() : std::string("mixed")) + " sources=" +
                           std::to_string(merged) + "\n";
  write_file(target, head + sources + kCsvColumns + "\n" + rows);
  return target;
}

}  // namespace augsearch::cli
