// Acceptance run: one PASS/FAIL line per criterion, with the measured
// numbers. Criteria marked as known gaps are reported but do not fail the
// process; every other failure makes the exit status non-zero.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "augsearch/augment/filters.hpp"
#include "augsearch/augment/jpeg.hpp"
#include "augsearch/corpus.hpp"
#include "augsearch/evaluation.hpp"
#include "augsearch/search.hpp"
#include "augsearch/train.hpp"
#include "gradient_oracle.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace augsearch;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeeds[] = {1, 2, 3};
const std::size_t kJobs = std::max(1u, std::thread::hardware_concurrency());

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  bool known_gap;  // documented as unattainable at desk scale
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- full-scale training runs, shared by criteria 1, 2 and 8 -------------

struct TrainedRun {
  std::map<std::string, MetricsReport> reports;  // by scenario
  double train_seconds = 0.0;
  double feature_shift = 0.0;  // cosine, original vs combined
};

struct SeedRuns {
  TrainedRun baseline, best, dual;
};

TrainedRun train_and_evaluate(const Corpus& corpus, const AugmentationSet& set, const LossConfig& loss,
                              std::uint64_t seed) {
  TrainConfig tc;
  tc.train_augmentations = set;
  tc.seed = seed;
  TrainedRun run;
  const auto t0 = std::chrono::steady_clock::now();
  // Training is single-threaded so the budget check is honest.
  const auto trained = train(corpus.train, corpus.validation, tc, loss, 1);
  run.train_seconds = seconds_since(t0);
  for (const auto& s : builtin_scenarios()) run.reports[s.name] = evaluate_model(trained.model, corpus.eval_sets, s, kJobs);
  run.feature_shift =
      mean_feature_shift(trained.model, corpus.eval_sets, builtin_scenario("combined"), FeatureLossKind::Cosine, kJobs);
  return run;
}

const std::map<std::uint64_t, SeedRuns>& full_scale_runs() {
  static const std::map<std::uint64_t, SeedRuns> runs = [] {
    std::map<std::uint64_t, SeedRuns> out;
    for (auto seed : kSeeds) {
      CorpusConfig cc;  // default: 2000 train / 4 x 500 eval per class
      cc.seed = seed;
      const auto corpus = generate_corpus(cc, kJobs);
      SeedRuns r;
      r.baseline = train_and_evaluate(corpus, AugmentationSet{}, LossConfig{1.0, 0.0, FeatureLossKind::None}, seed);
      r.best = train_and_evaluate(
          corpus, AugmentationSet{OperatorKind::JpegCompress, OperatorKind::GaussianBlur, OperatorKind::ColorInvert},
          LossConfig{1.0, 0.0, FeatureLossKind::None}, seed);
      r.dual = train_and_evaluate(corpus, AugmentationSet{}, LossConfig{1.0, 0.2, FeatureLossKind::Cosine}, seed);
      std::fprintf(stderr, "seed %llu: baseline %.1fs, best set %.1fs, dual %.1fs\n",
                   static_cast<unsigned long long>(seed), r.baseline.train_seconds, r.best.train_seconds,
                   r.dual.train_seconds);
      out.emplace(seed, std::move(r));
    }
    return out;
  }();
  return runs;
}

Outcome robustness_gain() {
  Outcome o{true, ""};
  for (const auto& [seed, r] : full_scale_runs()) {
    const double base = r.baseline.reports.at("combined").map, best = r.best.reports.at("combined").map;
    const double delta = (best - base) * 100.0;
    const bool ok = delta >= 10.0 && r.best.train_seconds < 600.0 && r.baseline.train_seconds < 600.0;
    o.pass = o.pass && ok;
    o.detail += "seed " + std::to_string(seed) + ": combined mAP " + fmt("%.4f", base) + " -> " + fmt("%.4f", best) +
                " (" + fmt("%+.2f", delta) + " pts, need >= +10); ";
  }
  return o;
}

Outcome degradation() {
  Outcome o{true, ""};
  for (const auto& [seed, r] : full_scale_runs()) {
    const auto& rep = r.baseline.reports;
    const double drop = (rep.at("clean").map - rep.at("combined").map) * 100.0;
    std::string lowest;
    double low = INFINITY;
    for (const auto& [name, m] : rep)
      if (m.map < low) {
        low = m.map;
        lowest = name;
      }
    const bool ok = drop >= 5.0 && lowest == "resize";
    o.pass = o.pass && ok;
    o.detail += "seed " + std::to_string(seed) + ": clean-combined drop " + fmt("%.2f", drop) + " pts, lowest " +
                lowest + " (" + fmt("%.4f", low) + "); ";
  }
  return o;
}

Outcome dual_criteria() {
  Outcome o{true, ""};
  for (const auto& [seed, r] : full_scale_runs()) {
    const double acc0 = r.baseline.reports.at("combined").mean_accuracy();
    const double acc2 = r.dual.reports.at("combined").mean_accuracy();
    const bool ok = acc2 >= acc0 - 0.005 && r.dual.feature_shift < r.baseline.feature_shift;
    o.pass = o.pass && ok;
    o.detail += "seed " + std::to_string(seed) + ": combined acc " + fmt("%.4f", acc0) + " -> " + fmt("%.4f", acc2) +
                ", feature loss " + fmt("%.5f", r.baseline.feature_shift) + " -> " + fmt("%.5f", r.dual.feature_shift) +
                "; ";
  }
  return o;
}

// ---- search ---------------------------------------------------------------

Outcome greedy_correctness() {
  Rng rng(2025);
  int exact = 0, counts = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> w(6);
    for (auto& v : w) v = rng.uniform(-1.0, 1.0);
    const FitnessFn f = [w](Chromosome c) {
      double s = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i)
        if ((c >> i) & 1u) s += w[i];
      return s;
    };
    const auto r = greedy_search(6, f, 7);
    exact += r.best == oracle::exhaustive_argmax(6, f);
    counts += r.trace.fitness_calls == greedy_call_count(6, std::min(std::popcount(r.best), 5));
  }
  return {exact == 100 && counts == 100,
          std::to_string(exact) + "/100 equal to exhaustive, " + std::to_string(counts) + "/100 call counts match"};
}

Outcome ga_correctness() {
  const FitnessFn onemax = [](Chromosome c) { return static_cast<double>(std::popcount(c)); };
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    GaConfig cfg;
    cfg.population_size = 20;
    cfg.generations = 50;
    cfg.seed = seed;
    hits += ga_search(16, onemax, cfg).trace.best_fitness == 16.0;
  }
  bool invariant = true;
  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    GaConfig cfg;
    cfg.mutation_prob_per_gene = 0.0;
    cfg.generations = 20;
    cfg.seed = static_cast<std::uint64_t>(t);
    cfg.initial_population =
        std::vector<Chromosome>(static_cast<std::size_t>(cfg.population_size), static_cast<Chromosome>(rng.below(1u << 16)));
    for (const auto& pop : ga_search(16, onemax, cfg).trace.populations) invariant = invariant && pop == *cfg.initial_population;
  }
  return {hits >= 9 && invariant, "OneMax-16 optimum in " + std::to_string(hits) + "/10 seeds; zero-mutation population " +
                                       (invariant ? "invariant" : "changed")};
}

// ---- metrics, gradients, operators ---------------------------------------

Outcome ap_oracle() {
  Rng rng(4242);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const auto n = static_cast<std::size_t>(rng.integer(1, 200));
    ScoredSet s;
    for (std::size_t i = 0; i < n; ++i) {
      s.scores.push_back(t % 3 == 0 ? static_cast<double>(rng.below(6)) : rng.normal());
      s.labels.push_back(rng.bernoulli(0.4) ? 1 : 0);
    }
    s.labels[rng.below(n)] = 1;
    worst = std::max(worst, std::abs(average_precision(s) - oracle::average_precision(s.scores, s.labels)));
  }
  const bool example = average_precision({{0.9, 0.8, 0.7, 0.6}, {1, 0, 1, 0}, "example"}) == 5.0 / 6.0;
  return {worst < 1e-9 && example,
          "max |delta| " + fmt("%.3g", worst) + " over 1000 sets; worked example " + (example ? "exact" : "wrong")};
}

Outcome gradient_fidelity() {
  CorpusConfig cc;
  const auto& fam = texture_families()[0];
  const auto combined = builtin_scenario("combined");
  double worst = 0.0;
  for (auto kind : {FeatureLossKind::None, FeatureLossKind::MSE, FeatureLossKind::Cosine}) {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      Batch b;
      Rng data = Rng(seed).split("batch");
      for (int i = 0; i < 4; ++i) {
        const auto img = generate_image(cc, fam, static_cast<Label>(i % 2), data.split(static_cast<std::uint64_t>(i)));
        b.inputs.push_back(preprocess(img));
        b.labels.push_back(i % 2);
        if (kind != FeatureLossKind::None) b.twins.push_back(preprocess(apply_scenario(combined, img, seed * 4 + i)));
      }
      Model m = init_model(Rng(seed));
      Rng r = Rng(seed).split("biases");
      for (auto& v : m.b1) v = r.uniform(-0.5, 0.5);
      m.b2 = r.uniform(-0.5, 0.5);
      const LossConfig cfg{1.0, kind == FeatureLossKind::None ? 0.0 : 0.5, kind};
      worst = std::max(worst, oracle::check_gradient(m, b, cfg, 1e-5).max_relative_error);
    }
  }
  return {worst < 1e-4, "max relative error " + fmt("%.3g", worst) + " over 3 losses x 20 initializations"};
}

Outcome operator_statistics() {
  double kernel_err = 0.0;
  for (double sigma : {0.3, 0.5, 1.0, 1.5, 2.0, 3.0}) {
    double s = 0.0;
    for (double v : gaussian_kernel(sigma)) s += v;
    kernel_err = std::max(kernel_err, std::abs(s - 1.0));
  }
  double noise_dev = 0.0;
  const Image gray(256, 256, 1, 0.5f);
  for (double sigma : {1.0, 2.0}) {
    Rng rng(static_cast<std::uint64_t>(sigma * 10));
    const auto out = gaussian_noise(gray, sigma, rng);
    double ss = 0.0;
    for (std::size_t i = 0; i < out.samples().size(); ++i) {
      const double d = (out.samples()[i] - 0.5) * 255.0;
      ss += d * d;
    }
    noise_dev = std::max(noise_dev, std::abs(std::sqrt(ss / static_cast<double>(out.samples().size())) / sigma - 1.0));
  }
  CorpusConfig cc;
  cc.n_eval_per_class = 5;
  const auto images = generate_eval_sets(cc)[0].images;
  bool monotone = true;
  double min_psnr = INFINITY;
  for (const auto& img : images) {
    auto mse = [&](const Image& o) {
      double s = 0.0;
      for (std::size_t i = 0; i < img.samples().size(); ++i) {
        const double d = (img.samples()[i] - o.samples()[i]) * 255.0;
        s += d * d;
      }
      return s / static_cast<double>(img.samples().size());
    };
    double prev = INFINITY;
    for (int q : {30, 50, 70, 90}) {
      const double m = mse(jpeg_compress(img, q));
      monotone = monotone && m <= prev;
      prev = m;
    }
    min_psnr = std::min(min_psnr, 10.0 * std::log10(255.0 * 255.0 / mse(jpeg_compress(img, 100))));
  }
  const bool ok = kernel_err < 1e-12 && noise_dev <= 0.03 && monotone && min_psnr > 45.0;
  return {ok, "kernel sum error " + fmt("%.2g", kernel_err) + ", noise std deviation " + fmt("%.2f%%", noise_dev * 100) +
                  ", jpeg distortion " + (monotone ? "monotone" : "NOT monotone") + " on " +
                  std::to_string(images.size()) + " images, min PSNR@100 " + fmt("%.2f dB", min_psnr)};
}

// ---- CLI determinism --------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_determinism() {
  test::TempDir tmp;
  const auto cfg = tmp.path() / "config.json";
  std::ofstream(cfg) << R"({"master_seed": 5,
    "corpus": {"n_train_per_class": 40, "n_val_per_class": 10, "n_eval_per_class": 20},
    "train": {"epochs": 3, "batch_size": 16},
    "search": {"fitness_epochs": 1, "greedy_max_rounds": 2, "ga": {"population_size": 4, "generations": 2}}})";
  auto pipeline = [&](const std::string& tag, int jobs) {
    const auto dir = tmp.path() / tag;
    const std::string common = " --config \"" + cfg.string() + "\" --jobs " + std::to_string(jobs);
    const std::vector<std::string> cmds = {
        "gen-corpus" + common + " --out \"" + (dir / "gen").string() + "\"",
        "train" + common + " --out \"" + (dir / "train").string() + "\"",
        "evaluate" + common + " --checkpoint \"" + (dir / "train" / "model.ckpt").string() + "\" --baseline \"" +
            (dir / "train" / "model.ckpt").string() + "\" --out \"" + (dir / "eval").string() + "\"",
        "search --strategy greedy" + common + " --out \"" + (dir / "greedy").string() + "\"",
        "search --strategy ga" + common + " --out \"" + (dir / "ga").string() + "\"",
        "search --strategy ga --test-fitness onemax" + common + " --out \"" + (dir / "onemax").string() + "\"",
        "report \"" + dir.string() + "\"",
    };
    for (const auto& c : cmds) {
      const std::string line = std::string("\"") + AUGSEARCH_CLI + "\" " + c + " >/dev/null";
      if (std::system(line.c_str()) != 0) fail(ErrorKind::Io, "command failed: " + c);
    }
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
      if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
    return files;
  };
  const auto a1 = pipeline("a1", 1), b1 = pipeline("b1", 1), a8 = pipeline("a8", 8), b8 = pipeline("b8", 8);
  const bool ok = a1 == b1 && a8 == b8 && a1 == a8;
  return {ok, std::to_string(a1.size()) + " files from 7 commands; reruns " + (a1 == b1 && a8 == b8 ? "identical" : "DIFFER") +
                  ", --jobs 1 vs 8 " + (a1 == a8 ? "identical" : "DIFFER")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "robustness gain of the best augmentation set", true, robustness_gain},
      {2, "baseline degradation under perturbation", false, degradation},
      {3, "greedy search correctness", false, greedy_correctness},
      {4, "genetic algorithm correctness", false, ga_correctness},
      {5, "average precision oracle equivalence", false, ap_oracle},
      {6, "gradient fidelity", false, gradient_fidelity},
      {7, "operator statistics", false, operator_statistics},
      {8, "dual-criteria stability", false, dual_criteria},
      {9, "CLI determinism", false, cli_determinism},
  };
  int unexpected = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const char* verdict = o.pass ? "PASS" : c.known_gap ? "FAIL (known gap)" : "FAIL";
    std::printf("criterion %d %s: %s -- %s [%.1fs]\n", c.id, verdict, c.name.c_str(), o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
    if (!o.pass && !c.known_gap) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
