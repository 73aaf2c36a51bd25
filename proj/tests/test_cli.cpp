#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "augsearch/cli.hpp"
#include "support.hpp"

using namespace augsearch;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = 0;
  std::string out, err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunResult run(const std::string& args, const fs::path& scratch) {
  const auto out = scratch / "stdout.txt", err = scratch / "stderr.txt";
  const std::string cmd = std::string("\"") + AUGSEARCH_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                          err.string() + "\"";
  const int status = std::system(cmd.c_str());
  return {WEXITSTATUS(status), slurp(out), slurp(err)};
}

// Tiny experiment: a few images per class and short training.
fs::path write_config(const fs::path& dir, const std::string& extra = {}) {
  const auto path = dir / "config.json";
  std::ofstream(path) << R"({
  // small run for the CLI tests
  "master_seed": 3,
  "corpus": {"n_train_per_class": 12, "n_val_per_class": 4, "n_eval_per_class": 6, "n_eval_datasets": 2},
  "train": {"epochs": 2, "batch_size": 8},
  "search": {"fitness_epochs": 1, "greedy_max_rounds": 2,
             "ga": {"population_size": 3, "generations": 2}})"
                      << extra << "\n}\n";
  return path;
}

std::vector<std::string> data_lines(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#' && line.rfind("run_id", 0) != 0) out.push_back(line);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return files;
}

}  // namespace

TEST(Cli, AdditiveGreedyFindsKnownOptimum) {
  test::TempDir tmp;
  const auto r = run("search --strategy greedy --test-fitness additive --out \"" + (tmp.path() / "s").string() + "\"",
                     tmp.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto best = nlohmann::json::parse(slurp(tmp.path() / "s" / "best_set.json"));
  EXPECT_EQ(best["members"], nlohmann::json::parse(R"(["0","2","4"])"));
  EXPECT_EQ(best["fitness"].get<double>(), 6.0);
  EXPECT_EQ(best["fitness_calls"].get<int>(), 19);
  const auto trace = slurp(tmp.path() / "s" / "trace.jsonl");
  EXPECT_EQ(static_cast<int>(std::count(trace.begin(), trace.end(), '\n')), 1 + 19);
}

TEST(Cli, ZeroModelEvaluationFillsEveryColumn) {
  test::TempDir tmp;
  const auto cfg = write_config(tmp.path());
  const auto ckpt = tmp.path() / "zero.ckpt";
  save_checkpoint(Model{}, "{}", ckpt);
  const auto out = tmp.path() / "eval";
  const auto r = run("evaluate --config \"" + cfg.string() + "\" --checkpoint \"" + ckpt.string() + "\" --baseline \"" +
                         ckpt.string() + "\" --out \"" + out.string() + "\"",
                     tmp.path());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto csv = slurp(out / "metrics.csv");
  EXPECT_EQ(csv.rfind("# augsearch kind=metrics schema=1 config_hash=", 0), 0u);
  const auto rows = data_lines(csv);
  // 6 scenarios x (2 datasets + mean).
  ASSERT_EQ(rows.size(), 18u);
  std::map<std::string, std::pair<double, int>> ap_sum;
  for (const auto& row : rows) {
    const auto cells = split(row);
    ASSERT_EQ(cells.size(), 7u) << row;
    for (const auto& c : cells) EXPECT_FALSE(c.empty()) << row;
    EXPECT_EQ(std::stod(cells[6]), 0.0);
    if (cells[2] != "mean") {
      ap_sum[cells[1]].first += std::stod(cells[3]);
      ap_sum[cells[1]].second += 1;
      EXPECT_EQ(std::stod(cells[4]), 0.5);
    } else {
      EXPECT_NEAR(std::stod(cells[5]), ap_sum[cells[1]].first / ap_sum[cells[1]].second, 1e-12);
    }
  }
}

TEST(Cli, RerunsAreByteIdenticalAcrossJobs) {
  test::TempDir tmp;
  const auto cfg = write_config(tmp.path());
  auto pipeline = [&](const std::string& tag, int jobs) {
    const auto dir = tmp.path() / tag;
    const std::string common = " --config \"" + cfg.string() + "\" --jobs " + std::to_string(jobs);
    EXPECT_EQ(run("gen-corpus" + common + " --out \"" + (dir / "gen").string() + "\"", tmp.path()).exit_code, 0);
    EXPECT_EQ(run("train" + common + " --out \"" + (dir / "train").string() + "\"", tmp.path()).exit_code, 0);
    EXPECT_EQ(run("evaluate" + common + " --checkpoint \"" + (dir / "train" / "model.ckpt").string() + "\" --out \"" +
                      (dir / "eval").string() + "\"",
                  tmp.path())
                  .exit_code,
              0);
    EXPECT_EQ(run("search --strategy ga" + common + " --out \"" + (dir / "ga").string() + "\"", tmp.path()).exit_code, 0);
    EXPECT_EQ(run("report \"" + dir.string() + "\"", tmp.path()).exit_code, 0);
    return snapshot(dir);
  };
  const auto a = pipeline("a", 1);
  const auto b = pipeline("b", 1);
  const auto c = pipeline("c", 8);
  EXPECT_GT(a.size(), 10u);
  // Paths inside the files are relative to the run directory, so whole
  // trees compare equal.
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(Cli, ReportRefusesSchemaMismatch) {
  test::TempDir tmp;
  const std::string cols = std::string(cli::kCsvColumns) + "\n";
  std::ofstream(tmp.path() / "a.csv") << "# augsearch kind=metrics schema=1 config_hash=00 master_seed=1\n"
                                      << cols << "x,clean,d,0.5,0.5,0.5,\n";
  ASSERT_EQ(run("report \"" + tmp.path().string() + "\"", tmp.path()).exit_code, 0);
  std::ofstream(tmp.path() / "b.csv") << "# augsearch kind=metrics schema=2 config_hash=00 master_seed=1\n"
                                      << cols << "y,clean,d,0.5,0.5,0.5,\n";
  const auto r = run("report \"" + tmp.path().string() + "\"", tmp.path());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(r.err.rfind("error category=schema message=", 0), 0u) << r.err;
}

TEST(Cli, ErrorsAreSingleCategorizedLines) {
  test::TempDir tmp;
  auto r = run("train --config \"" + (tmp.path() / "missing.json").string() + "\"", tmp.path());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(r.err.rfind("error category=missing_file message=", 0), 0u) << r.err;
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);

  const auto cfg = write_config(tmp.path(), R"(, "colour": 1)");
  r = run("train --config \"" + cfg.string() + "\" --out \"" + tmp.path().string() + "\"", tmp.path());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(r.err.rfind("error category=config message=", 0), 0u) << r.err;

  r = run("frobnicate", tmp.path());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(r.err.rfind("error category=usage message=", 0), 0u) << r.err;
}

TEST(Cli, SeedOverrideChangesHashButNotLayout) {
  test::TempDir tmp;
  const auto cfg = write_config(tmp.path());
  cli::RunContext a, b;
  a.config = load_experiment_config(cfg);
  b.config = a.config;
  b.config.apply_master_seed(9);
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_EQ(b.config.corpus.seed, 9u);
  EXPECT_EQ(b.config.train.seed, 9u);
  EXPECT_EQ(b.config.search.ga.seed, 9u);
  b.config = a.config;
  b.config.output_dir = "elsewhere";
  EXPECT_EQ(a.hash(), b.hash());
}

TEST(Cli, ShippedConfigMatchesBuiltInDefaults) {
  const auto shipped = load_experiment_config(fs::path(AUGSEARCH_TEST_DIR) / ".." / "configs" / "default.json");
  EXPECT_EQ(canonical_json(shipped), canonical_json(ExperimentConfig{}));
}
