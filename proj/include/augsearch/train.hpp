#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "augsearch/augment/pipeline.hpp"
#include "augsearch/corpus.hpp"
#include "augsearch/error.hpp"
#include "augsearch/json_util.hpp"
#include "augsearch/model.hpp"
#include "augsearch/parallel.hpp"
#include "augsearch/rng.hpp"
#include "augsearch/scenarios.hpp"

namespace augsearch {

struct TrainConfig {
  int epochs = 25;
  int batch_size = 64;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double lr0 = 0.001;
  double lr_decay_factor = 0.1;
  int lr_decay_every = 10;
  int early_stop_patience = 7;
  double lr_floor = 1e-6;
  AugmentationSet train_augmentations{};
  Scenario perturbation_for_ft = builtin_scenario("combined");
  std::uint64_t seed = 1;

  void validate() const {
    require(epochs > 0 && batch_size > 0 && lr_decay_every > 0, "train: counts must be positive");
    require(early_stop_patience >= 1, "train: patience must be at least 1");
    require(adam_beta1 > 0.0 && adam_beta1 < 1.0 && adam_beta2 > 0.0 && adam_beta2 < 1.0,
            "train: Adam betas must lie in (0, 1)");
    require(adam_eps > 0.0 && lr0 > 0.0 && lr_floor > 0.0, "train: eps, lr0 and lr_floor must be positive");
    require(lr_decay_factor > 0.0 && lr_decay_factor <= 1.0, "train: lr_decay_factor must lie in (0, 1]");
    train_augmentations.params().validate();
    perturbation_for_ft.validate();
  }
};

// Step decay: lr0 * factor^floor(epoch / every), epochs counted from 0.
inline double learning_rate(const TrainConfig& cfg, int epoch) {
  return cfg.lr0 * std::pow(cfg.lr_decay_factor, epoch / cfg.lr_decay_every);
}

enum class StopReason { EpochsExhausted, NoImprovement, LearningRateFloor };

constexpr std::string_view to_string(StopReason r) noexcept {
  switch (r) {
    case StopReason::EpochsExhausted: return "epochs_exhausted";
    case StopReason::NoImprovement: return "no_improvement";
    case StopReason::LearningRateFloor: return "lr_floor";
  }
  return "unknown";
}

struct EpochRecord {
  int epoch = 0;
  double learning_rate = 0.0;
  double mean_total = 0.0;
  double mean_cls = 0.0;
  double mean_ft = 0.0;
  double val_accuracy = 0.0;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  StopReason stop_reason = StopReason::EpochsExhausted;
  int best_epoch = -1;
  friend bool operator==(const TrainHistory&, const TrainHistory&) = default;
};

struct TrainResult {
  Model model;
  TrainHistory history;
};

class Adam {
 public:
  Adam(double beta1, double beta2, double eps) : beta1_(beta1), beta2_(beta2), eps_(eps) {
    m_.assign(Model::parameter_count(), 0.0);
    v_.assign(Model::parameter_count(), 0.0);
  }

  void step(Model& model, const Model& gradient, double lr) {
    ++t_;
    std::vector<double> g;
    g.reserve(Model::parameter_count());
    gradient.for_each_parameter([&](double v) { g.push_back(v); });
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    std::size_t k = 0;
    model.for_each_parameter([&](double& p) {
      m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * g[k];
      v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * g[k] * g[k];
      p -= lr * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + eps_);
      ++k;
    });
  }

 private:
  double beta1_, beta2_, eps_;
  long t_ = 0;
  std::vector<double> m_, v_;
};

inline double accuracy_on_inputs(const Model& model, const std::vector<Vector>& inputs, const std::vector<int>& labels) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const int predicted = forward_input(model, inputs[i]).logit > 0.0 ? 1 : 0;
    correct += predicted == labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(inputs.size());
}

// Trains from a seeded initialization and returns the weights of the epoch
// with the best validation accuracy (latest on ties). Patience counts
// epochs without a strict improvement.
inline TrainResult train(const LabeledDataset& train_set, const LabeledDataset& val_set, const TrainConfig& cfg,
                         const LossConfig& loss_cfg, std::size_t jobs = 1) {
  cfg.validate();
  loss_cfg.validate();
  if (train_set.size() == 0 || val_set.size() == 0) fail(ErrorKind::Parameter, "train: empty dataset");
  require(train_set.images.size() == train_set.labels.size(), "train: images and labels differ in length");
  require(val_set.images.size() == val_set.labels.size(), "train: validation images and labels differ in length");
  check_executable(cfg.train_augmentations);

  const Rng root(cfg.seed);
  Model model = init_model(root.split("init"));
  Adam adam(cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
  const bool twins = loss_cfg.uses_twins();

  std::vector<Vector> val_inputs(val_set.size());
  parallel_for(val_set.size(), jobs, [&](std::size_t i) { val_inputs[i] = preprocess(val_set.images[i]); });

  TrainResult result;
  result.model = model;
  double best_acc = -1.0;
  int since_best = 0;
  const std::size_t n = train_set.size();
  std::vector<std::size_t> order(n);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = learning_rate(cfg, epoch);
    if (lr <= cfg.lr_floor) {
      result.history.stop_reason = StopReason::LearningRateFloor;
      break;
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = root.split("shuffle").split(static_cast<std::uint64_t>(epoch));
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[shuffle_rng.below(i + 1)]);

    const Rng aug_root = root.split("augment").split(static_cast<std::uint64_t>(epoch));
    Scenario twin_scenario = cfg.perturbation_for_ft;
    twin_scenario.seed_salt = mix64(cfg.perturbation_for_ft.seed_salt, mix64(cfg.seed, static_cast<std::uint64_t>(epoch)));

    EpochRecord rec;
    rec.epoch = epoch;
    rec.learning_rate = lr;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.batch_size));
      Batch batch;
      batch.inputs.resize(end - start);
      batch.labels.resize(end - start);
      if (twins) batch.twins.resize(end - start);
      parallel_for(end - start, jobs, [&](std::size_t k) {
        const std::size_t idx = order[start + k];
        const Image augmented = apply_pipeline(cfg.train_augmentations, train_set.images[idx], aug_root.split(idx));
        batch.inputs[k] = preprocess(augmented);
        batch.labels[k] = train_set.labels[idx];
        if (twins) batch.twins[k] = preprocess(apply_scenario(twin_scenario, augmented, idx));
      });
      const auto bw = backward(model, batch, loss_cfg);
      adam.step(model, bw.gradient, lr);
      rec.mean_total += bw.loss.total;
      rec.mean_cls += bw.loss.cls;
      rec.mean_ft += bw.loss.ft;
      ++batches;
    }
    rec.mean_total /= static_cast<double>(batches);
    rec.mean_cls /= static_cast<double>(batches);
    rec.mean_ft /= static_cast<double>(batches);
    rec.val_accuracy = accuracy_on_inputs(model, val_inputs, val_set.labels);
    result.history.epochs.push_back(rec);

    if (rec.val_accuracy >= best_acc) {
      result.model = model;
      result.history.best_epoch = epoch;
    }
    if (rec.val_accuracy > best_acc) {
      best_acc = rec.val_accuracy;
      since_best = 0;
    } else if (++since_best >= cfg.early_stop_patience) {
      result.history.stop_reason = StopReason::NoImprovement;
      break;
    }
  }
  return result;
}

inline nlohmann::json to_json(const LossConfig& c) {
  return {{"lambda1", c.lambda1}, {"lambda2", c.lambda2}, {"ft_kind", std::string(to_string(c.ft_kind))}};
}

inline LossConfig loss_config_from_json(const nlohmann::json& j) {
  LossConfig c;
  json_util::ObjectReader r(j, "loss");
  r.number("lambda1", c.lambda1);
  r.number("lambda2", c.lambda2);
  std::string kind = "none";
  r.string("ft_kind", kind);
  if (kind == "none") c.ft_kind = FeatureLossKind::None;
  else if (kind == "mse") c.ft_kind = FeatureLossKind::MSE;
  else if (kind == "cosine") c.ft_kind = FeatureLossKind::Cosine;
  else fail(ErrorKind::Config, "loss.ft_kind: expected none, mse or cosine");
  r.finish();
  try {
    c.validate();
  } catch (const Error& e) {
    fail(ErrorKind::Config, e.what());
  }
  return c;
}

inline nlohmann::json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},
          {"adam_eps", c.adam_eps},
          {"lr0", c.lr0},
          {"lr_decay_factor", c.lr_decay_factor},
          {"lr_decay_every", c.lr_decay_every},
          {"early_stop_patience", c.early_stop_patience},
          {"lr_floor", c.lr_floor},
          {"train_augmentations", to_json(c.train_augmentations)},
          {"perturbation_for_ft", to_json(c.perturbation_for_ft)},
          {"seed", c.seed}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  json_util::ObjectReader r(j, "train");
  r.integer("epochs", c.epochs);
  r.integer("batch_size", c.batch_size);
  r.number("adam_beta1", c.adam_beta1);
  r.number("adam_beta2", c.adam_beta2);
  r.number("adam_eps", c.adam_eps);
  r.number("lr0", c.lr0);
  r.number("lr_decay_factor", c.lr_decay_factor);
  r.integer("lr_decay_every", c.lr_decay_every);
  r.integer("early_stop_patience", c.early_stop_patience);
  r.number("lr_floor", c.lr_floor);
  r.read("train_augmentations", [&](const nlohmann::json& v) { c.train_augmentations = augmentation_set_from_json(v); });
  r.read("perturbation_for_ft", [&](const nlohmann::json& v) { c.perturbation_for_ft = scenario_from_json(v); });
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
