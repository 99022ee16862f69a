#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

using halomnl::FitConfig;

// String holders for enum-valued flags; converted after parsing.
struct FitFlagHolders {
  std::string diag_mode = "additive";
  std::string penalty_sign = "penalize";
};

void add_fit_flags(CLI::App* cmd, FitConfig& config, FitFlagHolders& holders,
                   bool include_seed) {
  cmd->add_option("--lambda", config.lambda, "squared-norm penalty weight");
  cmd->add_option("--rank", config.rank, "factor rank (lowrank family)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--mixture-k", config.mixture_k, "component count (mixture family)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--diag-mode", holders.diag_mode,
                  "how the factored matrix treats its diagonal (lowrank family)")
      ->check(CLI::IsMember({"additive", "replace"}));
  cmd->add_option("--step-size", config.step_size, "optimizer step size");
  cmd->add_option("--beta1", config.beta1, "first-moment decay");
  cmd->add_option("--beta2", config.beta2, "second-moment decay");
  cmd->add_option("--eps", config.eps, "denominator floor");
  cmd->add_option("--epochs", config.epochs, "epoch budget")->check(CLI::PositiveNumber);
  cmd->add_option("--batch-size", config.batch_size, "minibatch size")
      ->check(CLI::PositiveNumber);
  if (include_seed) cmd->add_option("--seed", config.seed, "optimizer seed");
  cmd->add_option("--init-scale", config.init_scale, "std of the random parameter init");
  cmd->add_option("--patience", config.patience,
                  "non-improving validation epochs tolerated before stopping");
  cmd->add_option("--val-fraction", config.val_fraction,
                  "fraction held out for early stopping (0 disables)");
  cmd->add_option("--penalty-sign", holders.penalty_sign,
                  "add or subtract the squared-norm term")
      ->check(CLI::IsMember({"penalize", "reward"}));
}

void apply_fit_flags(FitConfig& config, const FitFlagHolders& holders) {
  config.diag_mode = halomnl::diag_mode_from_string(holders.diag_mode);
  config.penalty_sign = halomnl::penalty_sign_from_string(holders.penalty_sign);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"halo-effect choice models: synthetic data, fitting, benchmarking"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "halomnl 0.1.0");

  using namespace halomnl::tools;

  GenerateOptions gen;
  auto* generate = app.add_subcommand(
      "generate", "sample a synthetic instance; writes <name>.jsonl and <name>.truth.json");
  generate->add_option("--m", gen.spec.m, "product count")->required()
      ->check(CLI::PositiveNumber);
  generate->add_option("--r", gen.spec.rank, "true halo rank")->check(CLI::PositiveNumber);
  generate->add_option("--q", gen.spec.inclusion_prob,
                       "per-product assortment inclusion probability, in (0,1)");
  generate->add_option("--n", gen.spec.n, "transaction count")->required()
      ->check(CLI::PositiveNumber);
  generate->add_option("--seed", gen.spec.seed, "generator seed");
  generate->add_option("--alpha-min", gen.spec.alpha_min, "base utility lower bound");
  generate->add_option("--alpha-max", gen.spec.alpha_max, "base utility upper bound");
  generate->add_option("--factor-scale", gen.spec.factor_scale,
                       "std of factor entries; negative means 1/sqrt(r)");
  generate->add_option("--name", gen.name, "output file stem");
  generate->add_option("--out", gen.out_dir, "output directory")->required();
  generate->callback([&] { cmd_generate(gen, std::cout); });

  FitOptions fit_opts;
  std::string fit_family = "mnl";
  FitFlagHolders fit_holders;
  auto* fit_cmd = app.add_subcommand(
      "fit", "fit one model; writes params.json, trace.csv, fit_config.txt");
  fit_cmd->add_option("dataset", fit_opts.dataset, "transaction file (JSON Lines)")
      ->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--family", fit_family, "model family")->required()
      ->check(CLI::IsMember({"mnl", "mixture", "halo", "lowrank"}));
  fit_cmd->add_option("--out", fit_opts.out_dir, "output directory")->required();
  add_fit_flags(fit_cmd, fit_opts.config, fit_holders, /*include_seed=*/true);
  fit_cmd->callback([&] {
    fit_opts.family = halomnl::family_from_string(fit_family);
    apply_fit_flags(fit_opts.config, fit_holders);
    cmd_fit(fit_opts, std::cout);
  });

  BenchmarkOptions bench;
  std::string bench_loss_mode = "ratio_of_means";
  FitFlagHolders bench_holders;
  auto* benchmark = app.add_subcommand(
      "benchmark", "fit model x category x seed cells; writes reports.csv and summary.json");
  benchmark->add_option("--manifest", bench.manifest,
                        "CSV of category_name,dataset_path rows")
      ->required()->check(CLI::ExistingFile);
  benchmark->add_option("--models", bench.models, "model families to fit")
      ->delimiter(',');
  benchmark->add_option("--train-fraction", bench.train_fraction,
                        "train share of each split");
  benchmark->add_option("--seeds", bench.seeds, "number of split/fit seeds (0..seeds-1)")
      ->check(CLI::PositiveNumber);
  benchmark->add_option("--reference", bench.reference,
                        "model whose relative loss is pinned to 0 (default: first of --models)");
  benchmark->add_option("--sidecar", bench.sidecar,
                        "CSV of category_name,model_name,test_ce baseline rows")
      ->check(CLI::ExistingFile);
  benchmark->add_option("--relative-loss", bench_loss_mode,
                        "how relative loss averages across categories")
      ->check(CLI::IsMember({"ratio_of_means", "mean_of_ratios"}));
  benchmark->add_option("--out", bench.out_dir, "output directory")->required();
  add_fit_flags(benchmark, bench.config, bench_holders, /*include_seed=*/false);
  benchmark->callback([&] {
    apply_fit_flags(bench.config, bench_holders);
    bench.loss_mode = bench_loss_mode == "mean_of_ratios"
                          ? halomnl::RelativeLossMode::mean_of_ratios
                          : halomnl::RelativeLossMode::ratio_of_means;
    cmd_benchmark(bench, std::cout);
  });

  ScalingOptions scaling;
  FitFlagHolders scaling_holders;
  auto* scale = app.add_subcommand(
      "scaling", "recovery error vs sample size sweep; writes scaling.csv");
  scale->add_option("--m", scaling.m_list, "product counts to sweep")->required()
      ->delimiter(',');
  scale->add_option("--r", scaling.rank, "true (and fitted) halo rank")
      ->check(CLI::PositiveNumber);
  scale->add_option("--n", scaling.n_list, "transaction counts to sweep")->required()
      ->delimiter(',');
  scale->add_option("--seeds", scaling.seeds, "replications per (m, n) point")
      ->check(CLI::PositiveNumber);
  scale->add_option("--q", scaling.inclusion_prob, "assortment inclusion probability");
  scale->add_option("--seed-base", scaling.seed_base, "first replication seed");
  scale->add_option("--eval-assortments", scaling.eval_assortments,
                    "fresh assortments for the KL metric")
      ->check(CLI::PositiveNumber);
  scale->add_option("--out", scaling.out_dir, "output directory")->required();
  add_fit_flags(scale, scaling.config, scaling_holders, /*include_seed=*/false);
  scale->callback([&] {
    apply_fit_flags(scaling.config, scaling_holders);
    cmd_scaling(scaling, std::cout);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
