#include "halomnl/models.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace halomnl {

namespace {

void require_finite(const Eigen::Ref<const Eigen::MatrixXd>& values, const char* what) {
  if (!values.allFinite()) {
    throw std::invalid_argument(std::string(what) + " contains non-finite entries");
  }
}

}  // namespace

std::string to_string(DiagMode mode) {
  return mode == DiagMode::additive ? "additive" : "replace";
}

DiagMode diag_mode_from_string(const std::string& name) {
  if (name == "additive") return DiagMode::additive;
  if (name == "replace") return DiagMode::replace;
  throw std::invalid_argument("unknown diag_mode \"" + name + "\"");
}

MnlParams::MnlParams(Eigen::VectorXd alpha) : alpha_(std::move(alpha)) {
  if (alpha_.size() == 0) {
    throw std::invalid_argument("alpha must be nonempty");
  }
  require_finite(alpha_, "alpha");
}

MixtureMnlParams::MixtureMnlParams(Eigen::VectorXd weights_logits,
                                   std::vector<MnlParams> components)
    : weights_logits_(std::move(weights_logits)), components_(std::move(components)) {
  if (components_.empty()) {
    throw std::invalid_argument("mixture needs at least one component");
  }
  if (weights_logits_.size() != static_cast<Eigen::Index>(components_.size())) {
    throw std::invalid_argument("weights_logits length must equal component count");
  }
  require_finite(weights_logits_, "weights_logits");
  const int m = components_.front().num_products();
  for (const MnlParams& c : components_) {
    if (c.num_products() != m) {
      throw std::invalid_argument("mixture components disagree on product count");
    }
  }
}

Eigen::VectorXd MixtureMnlParams::weights() const {
  const double max = weights_logits_.maxCoeff();
  Eigen::VectorXd w = (weights_logits_.array() - max).exp();
  return w / w.sum();
}

HaloParams::HaloParams(Eigen::MatrixXd h) : h_(std::move(h)) {
  if (h_.rows() == 0 || h_.rows() != h_.cols()) {
    throw std::invalid_argument("halo matrix must be square and nonempty");
  }
  require_finite(h_, "halo matrix");
}

LowRankHaloParams::LowRankHaloParams(Eigen::VectorXd alpha, Eigen::MatrixXd u,
                                     Eigen::MatrixXd v, DiagMode diag_mode)
    : alpha_(std::move(alpha)), u_(std::move(u)), v_(std::move(v)), diag_mode_(diag_mode) {
  if (alpha_.size() == 0) {
    throw std::invalid_argument("alpha must be nonempty");
  }
  if (u_.rows() != alpha_.size() || v_.rows() != alpha_.size() || u_.cols() != v_.cols()) {
    throw std::invalid_argument("factor shapes must be m-by-r with matching r");
  }
  if (u_.cols() < 1 || u_.cols() > alpha_.size()) {
    throw std::invalid_argument("rank must lie in [1, m]");
  }
  require_finite(alpha_, "alpha");
  require_finite(u_, "u");
  require_finite(v_, "v");
}

std::string model_name(const ModelParams& params) {
  struct Visitor {
    std::string operator()(const MnlParams&) const { return "mnl"; }
    std::string operator()(const MixtureMnlParams&) const { return "mixture"; }
    std::string operator()(const HaloParams&) const { return "halo"; }
    std::string operator()(const LowRankHaloParams&) const { return "lowrank"; }
  };
  return std::visit(Visitor{}, params);
}

int num_products(const ModelParams& params) {
  return std::visit([](const auto& p) { return p.num_products(); }, params);
}

Eigen::VectorXd masked_softmax(const Eigen::VectorXd& logits, const Assortment& assortment) {
  if (logits.size() != assortment.size()) {
    throw std::invalid_argument("logit length does not match assortment");
  }
  double max = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < logits.size(); ++i) {
    if (assortment.offered(i) && logits[i] > max) max = logits[i];
  }
  Eigen::VectorXd probs = Eigen::VectorXd::Zero(logits.size());
  double sum = 0.0;
  for (int i = 0; i < logits.size(); ++i) {
    if (assortment.offered(i)) {
      probs[i] = std::exp(logits[i] - max);
      sum += probs[i];
    }
  }
  probs /= sum;
  return probs;
}

ChoiceProbabilities mnl_probs(const MnlParams& params, const Assortment& assortment) {
  return {masked_softmax(params.alpha(), assortment), assortment};
}

Eigen::VectorXd halo_logits(const Eigen::MatrixXd& h, const Assortment& assortment) {
  if (h.rows() != h.cols() || h.rows() != assortment.size()) {
    throw std::invalid_argument("halo matrix shape does not match assortment");
  }
  return h * assortment.indicator();
}

ChoiceProbabilities halo_probs(const HaloParams& params, const Assortment& assortment) {
  return {masked_softmax(halo_logits(params.h(), assortment), assortment), assortment};
}

ChoiceProbabilities mixture_probs(const MixtureMnlParams& params, const Assortment& assortment) {
  const Eigen::VectorXd pi = params.weights();
  Eigen::VectorXd probs = Eigen::VectorXd::Zero(assortment.size());
  for (int k = 0; k < params.num_components(); ++k) {
    probs += pi[k] * masked_softmax(params.components()[k].alpha(), assortment);
  }
  // The convex combination sums to 1 only up to accumulated rounding, which
  // can leave an entry at 1 + ulp; dividing by the actual sum removes the
  // drift without changing the distribution.
  probs /= probs.sum();
  return {probs, assortment};
}

Eigen::MatrixXd lowrank_materialize(const LowRankHaloParams& params) {
  Eigen::MatrixXd h = params.u() * params.v().transpose();
  if (params.diag_mode() == DiagMode::additive) {
    h.diagonal() += params.alpha();
  } else {
    h.diagonal() = params.alpha();
  }
  return h;
}

ChoiceProbabilities lowrank_probs(const LowRankHaloParams& params, const Assortment& assortment) {
  const Eigen::VectorXd a = assortment.indicator();
  // (U V^T) a in factor form.
  Eigen::VectorXd logits = params.u() * (params.v().transpose() * a);
  if (params.diag_mode() == DiagMode::additive) {
    logits += params.alpha().cwiseProduct(a);
  } else {
    // Swap the factored diagonal u_i . v_i for alpha_i.
    const Eigen::VectorXd factored_diag = params.u().cwiseProduct(params.v()).rowwise().sum();
    logits += (params.alpha() - factored_diag).cwiseProduct(a);
  }
  return {masked_softmax(logits, assortment), assortment};
}

ChoiceProbabilities attention_forward(const LowRankHaloParams& params,
                                      const Assortment& assortment, bool normalize) {
  const int m = params.num_products();
  const double sqrt_rank = std::sqrt(static_cast<double>(params.rank()));
  const Eigen::MatrixXd& query = params.u();
  const Eigen::MatrixXd key = sqrt_rank * params.v();
  Eigen::MatrixXd scores = (query * key.transpose()) / sqrt_rank;

  if (normalize) {
    // Row-wise softmax over offered columns; unoffered columns zeroed.
    for (int i = 0; i < m; ++i) {
      double max = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < m; ++j) {
        if (assortment.offered(j) && scores(i, j) > max) max = scores(i, j);
      }
      double sum = 0.0;
      for (int j = 0; j < m; ++j) {
        if (assortment.offered(j)) {
          scores(i, j) = std::exp(scores(i, j) - max);
          sum += scores(i, j);
        } else {
          scores(i, j) = 0.0;
        }
      }
      for (int j = 0; j < m; ++j) scores(i, j) /= sum;
    }
  }

  if (params.diag_mode() == DiagMode::additive) {
    scores.diagonal() += params.alpha();
  } else {
    scores.diagonal() = params.alpha();
  }

  const Eigen::VectorXd logits = scores * assortment.indicator();
  return {masked_softmax(logits, assortment), assortment};
}

ChoiceProbabilities choice_probs(const ModelParams& params, const Assortment& assortment) {
  struct Visitor {
    const Assortment& a;
    ChoiceProbabilities operator()(const MnlParams& p) const { return mnl_probs(p, a); }
    ChoiceProbabilities operator()(const MixtureMnlParams& p) const { return mixture_probs(p, a); }
    ChoiceProbabilities operator()(const HaloParams& p) const { return halo_probs(p, a); }
    ChoiceProbabilities operator()(const LowRankHaloParams& p) const { return lowrank_probs(p, a); }
  };
  return std::visit(Visitor{assortment}, params);
}

}  // namespace halomnl
