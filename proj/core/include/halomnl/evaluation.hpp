#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "halomnl/estimation.hpp"
#include "halomnl/models.hpp"
#include "halomnl/types.hpp"

namespace halomnl {

/// One fitted model evaluated on one dataset/seed. The truth-dependent
/// metrics are only available for synthetic data.
struct EvalReport {
  std::string model_name;
  std::string dataset_name;
  std::int64_t seed = 0;
  double train_ce = 0.0;  // nats per transaction
  double test_ce = 0.0;
  std::optional<double> kl_to_truth;
  std::optional<double> param_error_f2;  // (1/m^2) ||H_hat - H*||_F^2, canonicalized
  std::optional<double> param_error_l1;  // (1/m^2) ||H_hat - H*||_1, canonicalized
};

/// Mean negative log-likelihood; identical to estimation's nll, re-exported
/// under the reporting name.
double cross_entropy(const ModelParams& params, const ChoiceDataset& dataset);

/// Subtracts each column's mean. Choice probabilities are unchanged under
/// H -> H + 1 c^T for any c, so only the column-centered part of a halo
/// matrix is identified; all recovery metrics compare centered matrices.
Eigen::MatrixXd canonicalize_halo(const Eigen::MatrixXd& h);

/// (1/m^2) * squared Frobenius distance between the canonicalized matrices.
double param_recovery_error_f2(const Eigen::MatrixXd& fitted_h,
                               const Eigen::MatrixXd& truth_h);

/// (1/m^2) * entrywise L1 distance between the canonicalized matrices.
double param_recovery_error_l1(const Eigen::MatrixXd& fitted_h,
                               const Eigen::MatrixXd& truth_h);

/// Materializes both low-rank models and compares the full halo matrices.
double param_recovery_error(const LowRankHaloParams& fitted, const LowRankHaloParams& truth);
double param_recovery_error_l1(const LowRankHaloParams& fitted,
                               const LowRankHaloParams& truth);

/// Mean over assortments of KL(p_truth(a) || p_fitted(a)), restricted to
/// offered items. +inf when the fitted model assigns probability 0 where the
/// truth does not.
double kl_to_truth(const ModelParams& fitted, const ModelParams& truth,
                   const std::vector<Assortment>& assortments);

/// How "normalized against the mean loss" aggregates across categories.
enum class RelativeLossMode {
  ratio_of_means,  // 100 * (mean CE / reference mean CE - 1)
  mean_of_ratios,  // 100 * (mean over categories of per-category CE ratio - 1)
};

struct ModelSummary {
  std::string model;
  int wins = 0;
  double relative_loss_pct = 0.0;
  std::map<std::string, double> category_ce;  // mean test CE per category
};

struct BenchmarkSummary {
  std::string reference;
  std::vector<std::string> categories;  // sorted
  std::vector<ModelSummary> models;     // sorted by model name
};

/// Aggregates per-seed reports into the wins / relative-loss table.
/// Test CE is first averaged over seeds per (model, category) cell; every
/// category must have a cell for every model. A category's win goes to every
/// model within 1e-9 of the smallest cell mean. The reference model's
/// relative loss is exactly 0.
BenchmarkSummary summarize_benchmark(const std::vector<EvalReport>& reports,
                                     const std::string& reference_model,
                                     RelativeLossMode mode = RelativeLossMode::ratio_of_means);

/// CSV with header model,dataset,seed,train_ce,test_ce,kl_to_truth,
/// param_error_f2,param_error_l1; absent optionals serialize as empty fields.
void write_reports_csv(const std::vector<EvalReport>& reports,
                       const std::filesystem::path& path);
std::vector<EvalReport> read_reports_csv(const std::filesystem::path& path);

/// JSON mirror of BenchmarkSummary (objects keyed by model / category name).
void write_summary_json(const BenchmarkSummary& summary, const std::filesystem::path& path);

}  // namespace halomnl
