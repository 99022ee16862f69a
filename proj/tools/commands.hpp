#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <halomnl/estimation.hpp>
#include <halomnl/evaluation.hpp>
#include <halomnl/synthetic.hpp>

// Command implementations behind the CLI, callable in-process so tests can
// drive them without spawning the binary. Each command writes files with
// fixed names under out_dir, logs a short human summary to `log`, and throws
// on any error; main() turns exceptions into exit code 1.
namespace halomnl::tools {

struct GenerateOptions {
  SyntheticSpec spec;
  std::string name = "synthetic";
  std::filesystem::path out_dir;
};

/// Writes <name>.jsonl and <name>.truth.json under out_dir.
void cmd_generate(const GenerateOptions& options, std::ostream& log);

struct FitOptions {
  std::filesystem::path dataset;
  ModelFamily family = ModelFamily::mnl;
  FitConfig config;
  std::filesystem::path out_dir;
};

/// Writes params.json, trace.csv, and fit_config.txt under out_dir.
void cmd_fit(const FitOptions& options, std::ostream& log);

struct BenchmarkOptions {
  std::filesystem::path manifest;  // CSV: category_name,dataset_path
  std::vector<std::string> models = {"mnl", "halo", "lowrank"};
  double train_fraction = 0.7;
  int seeds = 3;            // uses seed values 0..seeds-1
  std::string reference;    // empty -> first entry of models
  std::filesystem::path sidecar;  // optional CSV: category_name,model_name,test_ce
  std::filesystem::path out_dir;
  FitConfig config;         // seed is overridden per run
  RelativeLossMode loss_mode = RelativeLossMode::ratio_of_means;
};

/// Fits every (category, model, seed) cell on a 70/30-style split, then
/// writes reports.csv (fitted cells only) and summary.json (fitted plus
/// sidecar baselines) under out_dir.
void cmd_benchmark(const BenchmarkOptions& options, std::ostream& log);

struct ScalingOptions {
  std::vector<int> m_list = {10};
  int rank = 2;
  std::vector<int> n_list = {1000};
  int seeds = 3;
  double inclusion_prob = 0.5;
  std::int64_t seed_base = 0;
  int eval_assortments = 100;  // fresh assortments for the KL metric
  std::filesystem::path out_dir;
  FitConfig config;  // rank/diag_mode/seed are overridden per run
};

/// Sample-complexity sweep: for each (m, n, seed) fits the full halo matrix
/// and the rank-r factorization against the same synthetic truth, and
/// writes scaling.csv (long format: m,n,r,seed,model,metric,value).
void cmd_scaling(const ScalingOptions& options, std::ostream& log);

}  // namespace halomnl::tools
