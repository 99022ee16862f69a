#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "halomnl/types.hpp"

namespace halomnl {

/// How the diagonal of the halo matrix is combined with the low-rank factors:
/// `additive` builds diag(alpha) + U V^T; `replace` builds U V^T and then
/// overwrites the diagonal with alpha.
enum class DiagMode { additive, replace };

std::string to_string(DiagMode mode);
DiagMode diag_mode_from_string(const std::string& name);

/// Plain multinomial logit: one log-utility per product.
class MnlParams {
 public:
  explicit MnlParams(Eigen::VectorXd alpha);

  const Eigen::VectorXd& alpha() const { return alpha_; }
  int num_products() const { return static_cast<int>(alpha_.size()); }

 private:
  Eigen::VectorXd alpha_;
};

/// Finite mixture of MNL components with softmax-parameterized weights.
class MixtureMnlParams {
 public:
  MixtureMnlParams(Eigen::VectorXd weights_logits, std::vector<MnlParams> components);

  const Eigen::VectorXd& weights_logits() const { return weights_logits_; }
  const std::vector<MnlParams>& components() const { return components_; }
  int num_components() const { return static_cast<int>(components_.size()); }
  int num_products() const { return components_.front().num_products(); }

  /// Mixture weights pi = softmax(weights_logits).
  Eigen::VectorXd weights() const;

 private:
  Eigen::VectorXd weights_logits_;
  std::vector<MnlParams> components_;
};

/// Halo MNL: a dense m-by-m matrix of per-product utilities (diagonal) and
/// pairwise presence effects (off-diagonal).
class HaloParams {
 public:
  explicit HaloParams(Eigen::MatrixXd h);

  const Eigen::MatrixXd& h() const { return h_; }
  int num_products() const { return static_cast<int>(h_.rows()); }

 private:
  Eigen::MatrixXd h_;
};

/// Low-rank Halo MNL: halo matrix built from a diagonal vector alpha and
/// rank-r factors U, V (m-by-r each). Equivalent to a single self-attention
/// head; see attention_forward.
class LowRankHaloParams {
 public:
  LowRankHaloParams(Eigen::VectorXd alpha, Eigen::MatrixXd u, Eigen::MatrixXd v,
                    DiagMode diag_mode = DiagMode::additive);

  const Eigen::VectorXd& alpha() const { return alpha_; }
  const Eigen::MatrixXd& u() const { return u_; }
  const Eigen::MatrixXd& v() const { return v_; }
  DiagMode diag_mode() const { return diag_mode_; }
  int num_products() const { return static_cast<int>(alpha_.size()); }
  int rank() const { return static_cast<int>(u_.cols()); }

 private:
  Eigen::VectorXd alpha_;
  Eigen::MatrixXd u_;
  Eigen::MatrixXd v_;
  DiagMode diag_mode_;
};

using ModelParams =
    std::variant<MnlParams, MixtureMnlParams, HaloParams, LowRankHaloParams>;

/// "mnl", "mixture", "halo" or "lowrank".
std::string model_name(const ModelParams& params);
int num_products(const ModelParams& params);

/// Softmax of `logits` restricted to the offered products; unoffered entries
/// are exactly zero. Stable under logit magnitudes up to at least 500
/// (max-subtraction before exponentiation).
Eigen::VectorXd masked_softmax(const Eigen::VectorXd& logits, const Assortment& assortment);

ChoiceProbabilities mnl_probs(const MnlParams& params, const Assortment& assortment);

/// Halo logits H a, computed for every product; masking happens in the
/// softmax step.
Eigen::VectorXd halo_logits(const Eigen::MatrixXd& h, const Assortment& assortment);

ChoiceProbabilities halo_probs(const HaloParams& params, const Assortment& assortment);

/// Convex combination of the component MNLs under softmax weights.
ChoiceProbabilities mixture_probs(const MixtureMnlParams& params, const Assortment& assortment);

/// The dense halo matrix encoded by low-rank parameters (per diag_mode).
Eigen::MatrixXd lowrank_materialize(const LowRankHaloParams& params);

/// Halo probabilities of the materialized matrix, computed factor-form in
/// O(m r) without building the m-by-m matrix.
ChoiceProbabilities lowrank_probs(const LowRankHaloParams& params, const Assortment& assortment);

/// Single-head self-attention forward pass: scores S = Q K^T / sqrt(d_k) with
/// Q = U, K = sqrt(r) V, d_k = r (so S = U V^T when normalize is false),
/// optionally row-softmaxed over offered columns, diagonal merged per
/// diag_mode, then multiplied by the assortment and fed through the masked
/// output softmax. With normalize=false and additive diagonal this equals
/// lowrank_probs.
ChoiceProbabilities attention_forward(const LowRankHaloParams& params,
                                      const Assortment& assortment, bool normalize);

/// Probabilities under any of the four model families.
ChoiceProbabilities choice_probs(const ModelParams& params, const Assortment& assortment);

/// JSON (de)serialization of model parameters. Numeric arrays round-trip
/// exactly. Layout: {"model": "...", family-specific arrays}; matrices are
/// flat row-major.
std::string params_to_json(const ModelParams& params);
ModelParams params_from_json(const std::string& text);
void save_params(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_params(const std::filesystem::path& path);

}  // namespace halomnl
