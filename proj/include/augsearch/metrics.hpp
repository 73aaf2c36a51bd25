#pragma once

// Ranking metrics: AP per dataset, mAP across datasets, relative mAP gain
// against a baseline, and thresholded accuracy.

#include <algorithm>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "augsearch/error.hpp"

namespace augsearch {

struct ScoredSet {
  std::vector<double> scores;  // higher = more likely synthetic
  std::vector<int> labels;     // 1 = synthetic
  std::string dataset_name;
};

// Mean, over positives in descending-score order, of the precision at each
// positive's rank. Equal scores keep their original relative order.
inline double average_precision(const ScoredSet& set) {
  require(set.scores.size() == set.labels.size(), "average_precision: scores and labels differ in length");
  std::vector<std::size_t> order(set.scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return set.scores[a] > set.scores[b]; });
  // Extended-precision sum so short rational cases round exactly.
  long double sum = 0.0L;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (set.labels[order[rank]] == 1) {
      ++hits;
      sum += static_cast<long double>(hits) / static_cast<long double>(rank + 1);
    }
  }
  if (hits == 0) fail(ErrorKind::UndefinedMetric, "average_precision: no positive labels in " + set.dataset_name);
  return static_cast<double>(sum / static_cast<long double>(hits));
}

inline double mean_average_precision(std::span<const double> aps) {
  require(!aps.empty(), "mean_average_precision: no datasets");
  return std::accumulate(aps.begin(), aps.end(), 0.0) / static_cast<double>(aps.size());
}

// Relative gain in percent.
inline double map_gain(double map, double map_baseline) {
  require(map_baseline > 0.0, "map_gain: baseline mAP must be positive");
  return (map - map_baseline) / map_baseline * 100.0;
}

// Scores are probabilities. A probability exactly at the threshold counts
// as a negative decision.
inline double accuracy(const ScoredSet& set, double threshold = 0.5) {
  require(!set.scores.empty(), "accuracy: empty set");
  require(set.scores.size() == set.labels.size(), "accuracy: scores and labels differ in length");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < set.scores.size(); ++i) {
    const int predicted = set.scores[i] > threshold ? 1 : 0;
    correct += predicted == set.labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(set.scores.size());
}

struct MetricsReport {
  std::string scenario_name;
  std::map<std::string, double> per_dataset_ap;
  std::map<std::string, double> accuracy_per_dataset;
  double map = 0.0;

  double mean_accuracy() const {
    double s = 0.0;
    for (const auto& [_, a] : accuracy_per_dataset) s += a;
    return accuracy_per_dataset.empty() ? 0.0 : s / static_cast<double>(accuracy_per_dataset.size());
  }
};

inline MetricsReport make_report(const std::string& scenario, const std::map<std::string, double>& aps,
                                 const std::map<std::string, double>& accs) {
  MetricsReport r;
  r.scenario_name = scenario;
  r.per_dataset_ap = aps;
  r.accuracy_per_dataset = accs;
  std::vector<double> values;
  for (const auto& [_, ap] : aps) values.push_back(ap);
  r.map = mean_average_precision(values);
  return r;
}

struct GainReport {
  double map = 0.0;
  double map_baseline = 0.0;
  double gain_percent = 0.0;
};

inline GainReport make_gain_report(double map, double map_baseline) {
  return {map, map_baseline, map_gain(map, map_baseline)};
}

}  // namespace augsearch
