// augsearch: corpus generation, training, evaluation, subset search and
// report merging. Errors print one line: `error category=<kind> message=<text>`.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "augsearch/cli.hpp"

namespace {

using namespace augsearch;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  std::string out;
  std::string checkpoint;
  std::string baseline;
  std::string strategy = "greedy";
  std::string test_fitness = "none";
  std::string run_dir;
};

cli::RunContext make_context(const Options& o) {
  cli::RunContext ctx;
  if (!o.config_path.empty()) ctx.config = load_experiment_config(o.config_path);
  if (o.seed) ctx.config.apply_master_seed(*o.seed);
  ctx.out = o.out.empty() ? std::filesystem::path(ctx.config.output_dir) : std::filesystem::path(o.out);
  ctx.jobs = o.jobs;
  return ctx;
}

int report_error(const std::string& category, const std::string& message) {
  std::string flat = message;
  for (auto& c : flat)
    if (c == '\n' || c == '\r') c = ' ';
  std::cerr << "error category=" << category << " message=" << flat << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Augmentation-subset search for synthetic-image detection robustness"};
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "Experiment config (JSON)");
    sub->add_option("--seed", o.seed, "Master seed override");
    sub->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "Output directory (default: config output_dir)");
  };

  auto* gen = app.add_subcommand("gen-corpus", "Write the procedural corpus as PPM files plus a manifest");
  common(gen);
  auto* tr = app.add_subcommand("train", "Train a model; writes model.ckpt and history.json");
  common(tr);
  auto* ev = app.add_subcommand("evaluate", "Evaluate a checkpoint under every scenario");
  common(ev);
  ev->add_option("--checkpoint", o.checkpoint, "Checkpoint to evaluate")->required();
  ev->add_option("--baseline", o.baseline, "Baseline checkpoint for mAP gain");
  auto* se = app.add_subcommand("search", "Search augmentation subsets");
  common(se);
  se->add_option("--strategy", o.strategy, "greedy or ga")->check(CLI::IsMember({"greedy", "ga"}));
  se->add_option("--test-fitness", o.test_fitness, "Synthetic fitness instead of training: none, additive, onemax")
      ->check(CLI::IsMember({"none", "additive", "onemax"}));
  auto* rep = app.add_subcommand("report", "Merge metrics CSVs under a run directory");
  rep->add_option("run_dir", o.run_dir, "Directory to scan")->required();
  rep->add_option("--out", o.out, "Output directory (default: run_dir)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what());
  }

  try {
    std::filesystem::path written;
    if (gen->parsed()) {
      written = cli::cmd_gen_corpus(make_context(o));
    } else if (tr->parsed()) {
      written = cli::cmd_train(make_context(o));
    } else if (ev->parsed()) {
      std::optional<std::filesystem::path> baseline;
      if (!o.baseline.empty()) baseline = o.baseline;
      written = cli::cmd_evaluate(make_context(o), o.checkpoint, baseline);
    } else if (se->parsed()) {
      const auto strategy = o.strategy == "ga" ? cli::Strategy::Ga : cli::Strategy::Greedy;
      const auto test = o.test_fitness == "additive" ? cli::TestFitness::Additive
                        : o.test_fitness == "onemax" ? cli::TestFitness::OneMax
                                                     : cli::TestFitness::None;
      written = cli::cmd_search(make_context(o), strategy, test);
    } else if (rep->parsed()) {
      written = cli::cmd_report(o.run_dir, o.out.empty() ? o.run_dir : o.out);
    }
    std::cout << written.string() << "\n";
    return 0;
  } catch (const Error& e) {
    return report_error(std::string(to_string(e.kind())), e.what());
  } catch (const nlohmann::json::exception& e) {
    return report_error("config", e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return report_error("io", e.what());
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
}
