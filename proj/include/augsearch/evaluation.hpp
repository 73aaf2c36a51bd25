#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "augsearch/corpus.hpp"
#include "augsearch/metrics.hpp"
#include "augsearch/model.hpp"
#include "augsearch/parallel.hpp"
#include "augsearch/scenarios.hpp"

namespace augsearch {

// Maps a (perturbed) image to a logit. `dataset` and `index` locate the
// image in the evaluation sets, which lets tests inject label-aware scorers.
using Scorer = std::function<double(const Image& image, std::size_t dataset, std::size_t index)>;

inline Scorer model_scorer(const Model& model) {
  return [&model](const Image& image, std::size_t, std::size_t) { return forward(model, image).logit; };
}

inline MetricsReport evaluate_scorer(const Scorer& scorer, std::span<const LabeledDataset> eval_sets,
                                     const Scenario& scenario, std::size_t jobs = 1) {
  scenario.validate();
  std::map<std::string, double> aps, accs;
  for (std::size_t d = 0; d < eval_sets.size(); ++d) {
    const auto& ds = eval_sets[d];
    ds.validate();
    std::vector<double> logits(ds.size());
    parallel_for(ds.size(), jobs, [&](std::size_t i) {
      logits[i] = scorer(apply_scenario(scenario, ds.images[i], i), d, i);
    });
    ScoredSet ranked{logits, ds.labels, ds.name};
    ScoredSet probs{{}, ds.labels, ds.name};
    probs.scores.reserve(logits.size());
    for (double z : logits) probs.scores.push_back(sigmoid(z));
    aps[ds.name] = average_precision(ranked);
    accs[ds.name] = accuracy(probs);
  }
  return make_report(scenario.name, aps, accs);
}

// AP is computed on logits (no saturation ties); accuracy thresholds the
// sigmoid probability at 0.5.
inline MetricsReport evaluate_model(const Model& model, std::span<const LabeledDataset> eval_sets,
                                    const Scenario& scenario, std::size_t jobs = 1) {
  return evaluate_scorer(model_scorer(model), eval_sets, scenario, jobs);
}

// Mean feature loss between each evaluation image and its perturbed version.
inline double mean_feature_shift(const Model& model, std::span<const LabeledDataset> eval_sets,
                                 const Scenario& scenario, FeatureLossKind kind, std::size_t jobs = 1) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& ds : eval_sets) {
    std::vector<double> losses(ds.size());
    parallel_for(ds.size(), jobs, [&](std::size_t i) {
      const auto a = forward(model, ds.images[i]);
      const auto b = forward(model, apply_scenario(scenario, ds.images[i], i));
      losses[i] = feature_loss(a.features, b.features, kind);
    });
    for (double l : losses) sum += l;
    count += losses.size();
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

}  // namespace augsearch
