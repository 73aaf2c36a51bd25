#pragma once

// Augmentation-subset search: greedy forward selection and a generational
// genetic algorithm over binary chromosomes. Both use a memoized fitness so
// a chromosome is never evaluated twice, and both are independent of how
// many worker threads evaluate candidates.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "augsearch/augment/pipeline.hpp"
#include "augsearch/corpus.hpp"
#include "augsearch/error.hpp"
#include "augsearch/evaluation.hpp"
#include "augsearch/json_util.hpp"
#include "augsearch/parallel.hpp"
#include "augsearch/rng.hpp"
#include "augsearch/scenarios.hpp"
#include "augsearch/train.hpp"

namespace augsearch {

// Bit i set = pool entry i enabled.
using Chromosome = std::uint32_t;
inline constexpr int kMaxPoolSize = 31;

// Higher is better. Must be a pure function of the chromosome.
using FitnessFn = std::function<double(Chromosome)>;

class MemoFitness {
 public:
  explicit MemoFitness(FitnessFn fn) : fn_(std::move(fn)) {}

  // Evaluates every chromosome not yet cached (concurrently, in input
  // order) and returns the fitness of each entry of `batch`.
  std::vector<double> evaluate(const std::vector<Chromosome>& batch, std::size_t jobs) {
    std::vector<Chromosome> pending;
    for (auto c : batch)
      if (!cache_.count(c) && std::find(pending.begin(), pending.end(), c) == pending.end()) pending.push_back(c);
    std::vector<double> values(pending.size());
    parallel_for(pending.size(), jobs, [&](std::size_t i) { values[i] = fn_(pending[i]); });
    for (std::size_t i = 0; i < pending.size(); ++i) cache_.emplace(pending[i], values[i]);
    calls_ += pending.size();
    std::vector<double> out;
    out.reserve(batch.size());
    for (auto c : batch) out.push_back(cache_.at(c));
    return out;
  }

  double evaluate(Chromosome c) { return evaluate(std::vector<Chromosome>{c}, 1).front(); }

  std::size_t calls() const noexcept { return calls_; }

 private:
  FitnessFn fn_;
  std::map<Chromosome, double> cache_;
  std::size_t calls_ = 0;
};

struct SearchRecord {
  int step = 0;  // greedy round or GA generation
  int slot = 0;  // candidate position within the step
  Chromosome chromosome = 0;
  double fitness = 0.0;
  std::string decision;
  double best_so_far = 0.0;
};

struct SearchTrace {
  std::vector<SearchRecord> records;
  std::vector<std::vector<Chromosome>> populations;  // GA only, one per generation
  Chromosome best = 0;
  double best_fitness = 0.0;
  std::size_t fitness_calls = 0;
};

struct SearchResult {
  Chromosome best = 0;
  SearchTrace trace;
};

// Closed-form evaluation count for a greedy run that executed rounds
// 0..last_round.
constexpr std::size_t greedy_call_count(int pool_size, int last_round) noexcept {
  std::size_t n = 1 + static_cast<std::size_t>(pool_size);
  for (int r = 1; r <= last_round; ++r) n += static_cast<std::size_t>(pool_size - r);
  return n;
}

// Round 0 scores the empty set and every singleton; the best singleton
// becomes the incumbent only if it beats the empty set. Each later round
// tries every one-element extension and accepts the best strictly
// improving one. Ties go to the lowest pool index. max_rounds counts
// round 0.
inline SearchResult greedy_search(int pool_size, const FitnessFn& fitness, int max_rounds, std::size_t jobs = 1) {
  require(pool_size >= 1 && pool_size <= kMaxPoolSize, "greedy_search: pool_size out of range");
  require(max_rounds >= 1, "greedy_search: max_rounds must be at least 1");
  MemoFitness memo(fitness);
  SearchResult result;
  auto& trace = result.trace;

  double best = 0.0;
  auto add_record = [&](int round, int slot, Chromosome c, double f, const char* decision) {
    trace.records.push_back({round, slot, c, f, decision, 0.0});
  };

  std::vector<Chromosome> round0{0};
  for (int i = 0; i < pool_size; ++i) round0.push_back(Chromosome{1} << i);
  const auto f0 = memo.evaluate(round0, jobs);
  Chromosome incumbent = 0;
  double incumbent_fitness = f0[0];
  int chosen = -1;
  for (int i = 0; i < pool_size; ++i)
    if (f0[i + 1] > incumbent_fitness) {
      incumbent_fitness = f0[i + 1];
      chosen = i;
    }
  if (chosen >= 0) incumbent = Chromosome{1} << chosen;
  add_record(0, 0, 0, f0[0], chosen < 0 ? "selected" : "baseline");
  for (int i = 0; i < pool_size; ++i) add_record(0, i + 1, round0[i + 1], f0[i + 1], i == chosen ? "selected" : "rejected");

  for (int round = 1; round < max_rounds && chosen >= 0 && std::popcount(incumbent) == round && round < pool_size;
       ++round) {
    std::vector<Chromosome> candidates;
    for (int i = 0; i < pool_size; ++i)
      if (!((incumbent >> i) & 1u)) candidates.push_back(incumbent | (Chromosome{1} << i));
    const auto f = memo.evaluate(candidates, jobs);
    int pick = -1;
    double pick_fitness = incumbent_fitness;
    for (std::size_t k = 0; k < candidates.size(); ++k)
      if (f[k] > pick_fitness) {
        pick_fitness = f[k];
        pick = static_cast<int>(k);
      }
    for (std::size_t k = 0; k < candidates.size(); ++k)
      add_record(round, static_cast<int>(k), candidates[k], f[k], static_cast<int>(k) == pick ? "selected" : "rejected");
    if (pick < 0) break;
    incumbent = candidates[static_cast<std::size_t>(pick)];
    incumbent_fitness = pick_fitness;
  }

  best = -INFINITY;
  for (auto& r : trace.records) {
    best = std::max(best, r.fitness);
    r.best_so_far = best;
  }
  trace.best = incumbent;
  trace.best_fitness = incumbent_fitness;
  trace.fitness_calls = memo.calls();
  result.best = incumbent;
  return result;
}

struct GaConfig {
  int population_size = 5;
  int generations = 8;
  double mutation_prob_per_gene = 0.10;
  double init_prob_per_gene = 0.5;
  int tournament_size = 3;
  int elitism = 1;
  std::uint64_t seed = 1;
  // When set, replaces the random first generation.
  std::optional<std::vector<Chromosome>> initial_population;

  void validate(int pool_size) const {
    require(population_size >= 2, "ga: population_size must be at least 2");
    require(generations >= 1, "ga: generations must be at least 1");
    require(tournament_size >= 1 && tournament_size <= population_size, "ga: tournament_size out of range");
    require(elitism >= 0 && elitism < population_size, "ga: elitism out of range");
    require(mutation_prob_per_gene >= 0.0 && mutation_prob_per_gene <= 1.0, "ga: mutation probability out of range");
    require(init_prob_per_gene >= 0.0 && init_prob_per_gene <= 1.0, "ga: init probability out of range");
    if (initial_population) {
      require(static_cast<int>(initial_population->size()) == population_size,
              "ga: initial population size mismatch");
      for (auto c : *initial_population)
        require(pool_size >= 32 || c < (Chromosome{1} << pool_size), "ga: initial chromosome outside pool");
    }
  }
};

// Generational GA: elitism, tournament selection, single-point crossover
// (cut uniform in [1, pool_size - 1]) and per-gene bit-flip mutation. All
// random draws happen on the calling thread in a fixed order.
inline SearchResult ga_search(int pool_size, const FitnessFn& fitness, const GaConfig& cfg, std::size_t jobs = 1) {
  require(pool_size >= 1 && pool_size <= kMaxPoolSize, "ga_search: pool_size out of range");
  cfg.validate(pool_size);
  Rng rng(cfg.seed);
  MemoFitness memo(fitness);
  SearchResult result;
  auto& trace = result.trace;
  const auto pop_n = static_cast<std::size_t>(cfg.population_size);

  std::vector<Chromosome> population;
  if (cfg.initial_population) {
    population = *cfg.initial_population;
  } else {
    for (std::size_t i = 0; i < pop_n; ++i) {
      Chromosome c = 0;
      for (int g = 0; g < pool_size; ++g)
        if (rng.bernoulli(cfg.init_prob_per_gene)) c |= Chromosome{1} << g;
      population.push_back(c);
    }
  }

  double best = -INFINITY;
  Chromosome best_chromosome = 0;
  std::vector<std::string> origin(pop_n, "initial");

  for (int gen = 0; gen < cfg.generations; ++gen) {
    trace.populations.push_back(population);
    const auto scores = memo.evaluate(population, jobs);
    for (std::size_t i = 0; i < pop_n; ++i) {
      if (scores[i] > best) {
        best = scores[i];
        best_chromosome = population[i];
      }
      trace.records.push_back({gen, static_cast<int>(i), population[i], scores[i], origin[i], best});
    }
    if (gen + 1 == cfg.generations) break;

    std::vector<std::size_t> ranking(pop_n);
    for (std::size_t i = 0; i < pop_n; ++i) ranking[i] = i;
    std::stable_sort(ranking.begin(), ranking.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    auto tournament = [&]() {
      std::size_t winner = rng.below(pop_n);
      for (int k = 1; k < cfg.tournament_size; ++k) {
        const std::size_t challenger = rng.below(pop_n);
        if (scores[challenger] > scores[winner] || (scores[challenger] == scores[winner] && challenger < winner))
          winner = challenger;
      }
      return population[winner];
    };
    auto mutate = [&](Chromosome c) {
      for (int g = 0; g < pool_size; ++g)
        if (rng.bernoulli(cfg.mutation_prob_per_gene)) c ^= Chromosome{1} << g;
      return c;
    };

    std::vector<Chromosome> next;
    std::vector<std::string> next_origin;
    for (int e = 0; e < cfg.elitism; ++e) {
      next.push_back(population[ranking[static_cast<std::size_t>(e)]]);
      next_origin.emplace_back("elite");
    }
    while (next.size() < pop_n) {
      Chromosome a = tournament();
      Chromosome b = tournament();
      if (pool_size >= 2) {
        const int cut = static_cast<int>(rng.integer(1, pool_size - 1));
        const Chromosome low = (Chromosome{1} << cut) - 1;
        const Chromosome ca = (a & low) | (b & ~low);
        const Chromosome cb = (b & low) | (a & ~low);
        a = ca;
        b = cb;
      }
      next.push_back(mutate(a));
      next_origin.emplace_back("offspring");
      if (next.size() < pop_n) {
        next.push_back(mutate(b));
        next_origin.emplace_back("offspring");
      }
    }
    population = std::move(next);
    origin = std::move(next_origin);
  }

  trace.best = best_chromosome;
  trace.best_fitness = best;
  trace.fitness_calls = memo.calls();
  result.best = best_chromosome;
  return result;
}

// ---- production fitness ------------------------------------------------

// Maps chromosome bit i to pool[i].
inline AugmentationSet to_augmentation_set(Chromosome c, const std::vector<OperatorKind>& pool,
                                           const OperatorParams& params = {}) {
  AugmentationSet set({}, params);
  for (std::size_t i = 0; i < pool.size(); ++i)
    if ((c >> i) & 1u) set.enable(pool[i]);
  return set;
}

inline Chromosome to_chromosome(const AugmentationSet& set, const std::vector<OperatorKind>& pool) {
  Chromosome c = 0;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (set.enabled(pool[i])) c |= Chromosome{1} << i;
  return c;
}

struct SubsetFitnessConfig {
  int epochs = 12;
  std::uint64_t master_seed = 1;
  Scenario scenario = builtin_scenario("combined");
};

// Trains a single-criterion model with `set` as the training augmentations
// and returns its mAP under the fitness scenario. The training seed is
// derived from (master seed, enabled bits), never from scheduling order.
inline double subset_fitness_map(const AugmentationSet& set, const Corpus& corpus, const TrainConfig& base,
                                 const SubsetFitnessConfig& cfg) {
  check_executable(set);
  TrainConfig tc = base;
  tc.train_augmentations = AugmentationSet(set.bits(), base.train_augmentations.params());
  tc.epochs = cfg.epochs;
  tc.seed = mix64(cfg.master_seed, set.bits());
  const auto trained = train(corpus.train, corpus.validation, tc, LossConfig{});
  return evaluate_model(trained.model, corpus.eval_sets, cfg.scenario).map;
}

// Half-size corpus used by the fitness: every count halved (at least 1).
inline CorpusConfig fitness_corpus_config(CorpusConfig c) {
  c.n_train_per_class = std::max(1, c.n_train_per_class / 2);
  c.n_val_per_class = std::max(1, c.n_val_per_class / 2);
  c.n_eval_per_class = std::max(1, c.n_eval_per_class / 2);
  return c;
}

inline FitnessFn make_subset_fitness(const Corpus& corpus, const TrainConfig& base, const SubsetFitnessConfig& cfg,
                                     const std::vector<OperatorKind>& pool) {
  return [&corpus, base, cfg, pool](Chromosome c) {
    return subset_fitness_map(to_augmentation_set(c, pool, base.train_augmentations.params()), corpus, base, cfg);
  };
}

inline nlohmann::json to_json(const SearchRecord& r) {
  return {{"step", r.step},         {"slot", r.slot},         {"chromosome", r.chromosome},
          {"fitness", r.fitness},   {"decision", r.decision}, {"best_so_far", r.best_so_far}};
}

inline nlohmann::json to_json(const GaConfig& c) {
  return {{"population_size", c.population_size},
          {"generations", c.generations},
          {"mutation_prob_per_gene", c.mutation_prob_per_gene},
          {"init_prob_per_gene", c.init_prob_per_gene},
          {"tournament_size", c.tournament_size},
          {"elitism", c.elitism},
          {"seed", c.seed}};
}

inline GaConfig ga_config_from_json(const nlohmann::json& j) {
  GaConfig c;
  json_util::ObjectReader r(j, "search.ga");
  r.integer("population_size", c.population_size);
  r.integer("generations", c.generations);
  r.number("mutation_prob_per_gene", c.mutation_prob_per_gene);
  r.number("init_prob_per_gene", c.init_prob_per_gene);
  r.integer("tournament_size", c.tournament_size);
  r.integer("elitism", c.elitism);
  r.integer("seed", c.seed);
  r.finish();
  return c;
}

}  // namespace augsearch
