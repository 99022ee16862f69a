#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "halomnl/models.hpp"
#include "halomnl/types.hpp"

namespace halomnl {

enum class ModelFamily { mnl, mixture, halo, lowrank };

std::string to_string(ModelFamily family);
ModelFamily family_from_string(const std::string& name);

/// Whether the squared-norm term is added to the minimized loss (the usual
/// ridge penalty) or subtracted (the sign-flipped variant).
enum class PenaltySign { penalize, reward };

std::string to_string(PenaltySign sign);
PenaltySign penalty_sign_from_string(const std::string& name);

/// Estimator hyperparameters. `rank` applies to the lowrank family,
/// `mixture_k` to the mixture family; the rest apply everywhere.
struct FitConfig {
  double lambda = 1e-4;       // regularization weight
  int rank = 1;               // lowrank factor rank
  DiagMode diag_mode = DiagMode::additive;
  int mixture_k = 1;          // mixture component count
  double step_size = 1e-2;    // adaptive-moment step
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int epochs = 100;
  int batch_size = 256;
  std::int64_t seed = 0;
  double init_scale = 0.01;   // std of factor / perturbation init
  int patience = 10;          // early stopping: tolerated non-improving epochs
  double val_fraction = 0.1;  // held out for early stopping; 0 disables
  PenaltySign penalty_sign = PenaltySign::penalize;

  void validate() const;
};

/// Flat key=value round-trip (keys exactly as the field names above).
void save_fit_config(const FitConfig& config, const std::filesystem::path& path);
FitConfig load_fit_config(const std::filesystem::path& path);

struct EpochRecord {
  double train_objective;
  double val_ce;  // NaN when no validation split is held out
};

struct FitResult {
  ModelParams params;
  std::vector<EpochRecord> trace;
  int epochs_run = 0;
  bool converged = false;  // early stopping triggered before the epoch budget
};

/// Trace CSV: header epoch,train_objective,val_ce; one row per epoch run.
void save_trace_csv(const FitResult& result, const std::filesystem::path& path);

/// Mean negative log-likelihood in nats per transaction. Returns +inf when
/// some chosen item has probability 0; throws only on an empty dataset.
double nll(const ModelParams& params, const ChoiceDataset& dataset);

/// Squared-norm penalty: ||alpha||^2 (mnl), ||H||_F^2 (halo),
/// ||alpha||^2 + ||U||_F^2 + ||V||_F^2 (lowrank), sum_k ||alpha_k||^2 with
/// weights unpenalized (mixture).
double penalty(const ModelParams& params);

/// nll + lambda * penalty (or minus, under PenaltySign::reward). The penalty
/// is not divided by the transaction count.
double objective(const ModelParams& params, const ChoiceDataset& dataset, double lambda,
                 PenaltySign sign = PenaltySign::penalize);

/// Gradient of one transaction's negative log-likelihood with respect to the
/// halo matrix: (p - y) a^T, where y is the one-hot choice and p the choice
/// probabilities. Rows and columns of unoffered products are zero.
Eigen::MatrixXd grad_halo(const Eigen::MatrixXd& h, const Transaction& transaction);

Eigen::VectorXd grad_mnl(const MnlParams& params, const Transaction& transaction);

struct LowRankGrad {
  Eigen::VectorXd dalpha;
  Eigen::MatrixXd du;
  Eigen::MatrixXd dv;
};

/// Chain rule through the low-rank decomposition: with G = (p - y) a^T,
/// dalpha = diag(G), du = G V, dv = G^T U. Under DiagMode::replace the
/// diagonal of G is zeroed before forming du and dv.
LowRankGrad grad_lowrank(const LowRankHaloParams& params, const Transaction& transaction);

struct MixtureGrad {
  Eigen::VectorXd dweights;
  std::vector<Eigen::VectorXd> dalphas;
};

/// Posterior-responsibility gradient: gamma_k = pi_k p_k(y) / sum_j pi_j
/// p_j(y), dalpha_k = gamma_k (p_k - y), dweights_k = pi_k - gamma_k.
MixtureGrad grad_mixture(const MixtureMnlParams& params, const Transaction& transaction);

/// Shape descriptor pairing a flat parameter vector with its model family.
struct ParamShape {
  ModelFamily family = ModelFamily::mnl;
  int num_products = 0;
  int rank = 1;             // lowrank
  int mixture_k = 1;        // mixture
  DiagMode diag_mode = DiagMode::additive;

  int flat_size() const;
};

ParamShape shape_of(const ModelParams& params);

/// Flat layout: mnl -> alpha; halo -> H row-major; lowrank -> alpha, U
/// row-major, V row-major; mixture -> weights_logits, then each alpha_k.
Eigen::VectorXd pack_params(const ModelParams& params);
ModelParams unpack_params(const ParamShape& shape, const Eigen::VectorXd& flat);

/// Seeded mini-batch gradient descent with adaptive moment estimation on
/// objective(). Deterministic given (config, dataset). When val_fraction > 0
/// a validation split is held out for early stopping and the best-validation
/// parameters are returned.
FitResult fit(ModelFamily family, const ChoiceDataset& dataset, const FitConfig& config);

}  // namespace halomnl
