#include "halomnl/estimation.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace halomnl {

std::string to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::mnl: return "mnl";
    case ModelFamily::mixture: return "mixture";
    case ModelFamily::halo: return "halo";
    case ModelFamily::lowrank: return "lowrank";
  }
  throw std::logic_error("unreachable");
}

ModelFamily family_from_string(const std::string& name) {
  if (name == "mnl") return ModelFamily::mnl;
  if (name == "mixture") return ModelFamily::mixture;
  if (name == "halo") return ModelFamily::halo;
  if (name == "lowrank") return ModelFamily::lowrank;
  throw std::invalid_argument("unknown model family \"" + name + "\"");
}

std::string to_string(PenaltySign sign) {
  return sign == PenaltySign::penalize ? "penalize" : "reward";
}

PenaltySign penalty_sign_from_string(const std::string& name) {
  if (name == "penalize") return PenaltySign::penalize;
  if (name == "reward") return PenaltySign::reward;
  throw std::invalid_argument("unknown penalty_sign \"" + name + "\"");
}

void FitConfig::validate() const {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  if (rank < 1) throw std::invalid_argument("rank must be at least 1");
  if (mixture_k < 1) throw std::invalid_argument("mixture_k must be at least 1");
  if (step_size <= 0.0) throw std::invalid_argument("step_size must be positive");
  if (epochs < 1) throw std::invalid_argument("epochs must be positive");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");
  if (init_scale < 0.0) throw std::invalid_argument("init_scale must be nonnegative");
  if (patience < 0) throw std::invalid_argument("patience must be nonnegative");
  if (val_fraction < 0.0 || val_fraction >= 1.0) {
    throw std::invalid_argument("val_fraction must lie in [0, 1)");
  }
}

namespace {

// Per-transaction negative log-likelihood via log-sum-exp over the offered
// logits. -inf logit gaps of 750+ underflow to probability 0 and yield +inf.
double transaction_nll_from_logits(const Eigen::VectorXd& logits, const Transaction& t) {
  const Assortment& a = t.assortment();
  double max = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < logits.size(); ++i) {
    if (a.offered(i) && logits[i] > max) max = logits[i];
  }
  double sum = 0.0;
  for (int i = 0; i < logits.size(); ++i) {
    if (a.offered(i)) sum += std::exp(logits[i] - max);
  }
  return std::log(sum) - (logits[t.choice()] - max);
}

double transaction_nll(const ModelParams& params, const Transaction& t) {
  struct Visitor {
    const Transaction& t;
    double operator()(const MnlParams& p) const {
      return transaction_nll_from_logits(p.alpha(), t);
    }
    double operator()(const HaloParams& p) const {
      return transaction_nll_from_logits(halo_logits(p.h(), t.assortment()), t);
    }
    double operator()(const LowRankHaloParams& p) const {
      const Eigen::VectorXd a = t.assortment().indicator();
      Eigen::VectorXd logits = p.u() * (p.v().transpose() * a);
      if (p.diag_mode() == DiagMode::additive) {
        logits += p.alpha().cwiseProduct(a);
      } else {
        const Eigen::VectorXd factored_diag = p.u().cwiseProduct(p.v()).rowwise().sum();
        logits += (p.alpha() - factored_diag).cwiseProduct(a);
      }
      return transaction_nll_from_logits(logits, t);
    }
    double operator()(const MixtureMnlParams& p) const {
      const double prob = mixture_probs(p, t.assortment())[t.choice()];
      return -std::log(prob);
    }
  };
  return std::visit(Visitor{t}, params);
}

}  // namespace

double nll(const ModelParams& params, const ChoiceDataset& dataset) {
  if (dataset.empty()) {
    throw std::invalid_argument("nll of an empty dataset");
  }
  if (num_products(params) != dataset.num_products()) {
    throw std::invalid_argument("model and dataset disagree on product count");
  }
  double total = 0.0;
  for (const Transaction& t : dataset.transactions()) {
    total += transaction_nll(params, t);
  }
  return total / static_cast<double>(dataset.size());
}

double penalty(const ModelParams& params) {
  struct Visitor {
    double operator()(const MnlParams& p) const { return p.alpha().squaredNorm(); }
    double operator()(const HaloParams& p) const { return p.h().squaredNorm(); }
    double operator()(const LowRankHaloParams& p) const {
      return p.alpha().squaredNorm() + p.u().squaredNorm() + p.v().squaredNorm();
    }
    double operator()(const MixtureMnlParams& p) const {
      double total = 0.0;  // weights stay unpenalized
      for (const MnlParams& c : p.components()) total += c.alpha().squaredNorm();
      return total;
    }
  };
  return std::visit(Visitor{}, params);
}

double objective(const ModelParams& params, const ChoiceDataset& dataset, double lambda,
                 PenaltySign sign) {
  if (lambda < 0.0) {
    throw std::invalid_argument("lambda must be nonnegative");
  }
  const double signed_lambda = sign == PenaltySign::penalize ? lambda : -lambda;
  return nll(params, dataset) + signed_lambda * penalty(params);
}

Eigen::MatrixXd grad_halo(const Eigen::MatrixXd& h, const Transaction& transaction) {
  const Assortment& assortment = transaction.assortment();
  const HaloParams params(h);
  Eigen::VectorXd residual = halo_probs(params, assortment).values();  // p - y
  residual[transaction.choice()] -= 1.0;
  return residual * assortment.indicator().transpose();
}

Eigen::VectorXd grad_mnl(const MnlParams& params, const Transaction& transaction) {
  Eigen::VectorXd residual = mnl_probs(params, transaction.assortment()).values();
  residual[transaction.choice()] -= 1.0;
  return residual;
}

LowRankGrad grad_lowrank(const LowRankHaloParams& params, const Transaction& transaction) {
  const Assortment& assortment = transaction.assortment();
  const Eigen::VectorXd a = assortment.indicator();
  Eigen::VectorXd residual = lowrank_probs(params, assortment).values();  // p - y
  residual[transaction.choice()] -= 1.0;

  LowRankGrad g;
  // G = residual a^T is rank one; diag(G) = residual .* a.
  g.dalpha = residual.cwiseProduct(a);
  if (params.diag_mode() == DiagMode::additive) {
    g.du = residual * (a.transpose() * params.v());
    g.dv = a * (residual.transpose() * params.u());
  } else {
    // The diagonal of H no longer depends on U, V: drop diag(G) first.
    g.du = residual * (a.transpose() * params.v()) -
           g.dalpha.asDiagonal() * params.v();
    g.dv = a * (residual.transpose() * params.u()) -
           g.dalpha.asDiagonal() * params.u();
  }
  return g;
}

MixtureGrad grad_mixture(const MixtureMnlParams& params, const Transaction& transaction) {
  const int k = params.num_components();
  const Eigen::VectorXd pi = params.weights();

  std::vector<Eigen::VectorXd> component_probs(k);
  Eigen::VectorXd chosen(k);
  for (int j = 0; j < k; ++j) {
    component_probs[j] =
        masked_softmax(params.components()[j].alpha(), transaction.assortment());
    chosen[j] = component_probs[j][transaction.choice()];
  }
  const double mix_prob = pi.dot(chosen);

  MixtureGrad g;
  g.dweights.resize(k);
  g.dalphas.resize(k);
  for (int j = 0; j < k; ++j) {
    const double responsibility = pi[j] * chosen[j] / mix_prob;
    g.dweights[j] = pi[j] - responsibility;
    Eigen::VectorXd residual = component_probs[j];
    residual[transaction.choice()] -= 1.0;
    g.dalphas[j] = responsibility * residual;
  }
  return g;
}

int ParamShape::flat_size() const {
  switch (family) {
    case ModelFamily::mnl: return num_products;
    case ModelFamily::halo: return num_products * num_products;
    case ModelFamily::lowrank: return num_products + 2 * num_products * rank;
    case ModelFamily::mixture: return mixture_k + mixture_k * num_products;
  }
  throw std::logic_error("unreachable");
}

ParamShape shape_of(const ModelParams& params) {
  ParamShape s;
  s.num_products = num_products(params);
  struct Visitor {
    ParamShape& s;
    void operator()(const MnlParams&) const { s.family = ModelFamily::mnl; }
    void operator()(const HaloParams&) const { s.family = ModelFamily::halo; }
    void operator()(const LowRankHaloParams& p) const {
      s.family = ModelFamily::lowrank;
      s.rank = p.rank();
      s.diag_mode = p.diag_mode();
    }
    void operator()(const MixtureMnlParams& p) const {
      s.family = ModelFamily::mixture;
      s.mixture_k = p.num_components();
    }
  };
  std::visit(Visitor{s}, params);
  return s;
}

Eigen::VectorXd pack_params(const ModelParams& params) {
  const ParamShape shape = shape_of(params);
  Eigen::VectorXd flat(shape.flat_size());
  struct Visitor {
    Eigen::VectorXd& flat;
    void operator()(const MnlParams& p) const { flat = p.alpha(); }
    void operator()(const HaloParams& p) const {
      const int m = p.num_products();
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) flat[i * m + j] = p.h()(i, j);
    }
    void operator()(const LowRankHaloParams& p) const {
      const int m = p.num_products();
      const int r = p.rank();
      flat.head(m) = p.alpha();
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < r; ++j) {
          flat[m + i * r + j] = p.u()(i, j);
          flat[m + m * r + i * r + j] = p.v()(i, j);
        }
    }
    void operator()(const MixtureMnlParams& p) const {
      const int k = p.num_components();
      const int m = p.num_products();
      flat.head(k) = p.weights_logits();
      for (int j = 0; j < k; ++j) flat.segment(k + j * m, m) = p.components()[j].alpha();
    }
  };
  std::visit(Visitor{flat}, params);
  return flat;
}

ModelParams unpack_params(const ParamShape& shape, const Eigen::VectorXd& flat) {
  if (flat.size() != shape.flat_size()) {
    throw std::invalid_argument("flat parameter vector has wrong length");
  }
  const int m = shape.num_products;
  switch (shape.family) {
    case ModelFamily::mnl:
      return MnlParams(flat);
    case ModelFamily::halo: {
      Eigen::MatrixXd h(m, m);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) h(i, j) = flat[i * m + j];
      return HaloParams(std::move(h));
    }
    case ModelFamily::lowrank: {
      const int r = shape.rank;
      Eigen::MatrixXd u(m, r);
      Eigen::MatrixXd v(m, r);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < r; ++j) {
          u(i, j) = flat[m + i * r + j];
          v(i, j) = flat[m + m * r + i * r + j];
        }
      return LowRankHaloParams(flat.head(m), std::move(u), std::move(v), shape.diag_mode);
    }
    case ModelFamily::mixture: {
      const int k = shape.mixture_k;
      std::vector<MnlParams> comps;
      comps.reserve(static_cast<std::size_t>(k));
      for (int j = 0; j < k; ++j) comps.emplace_back(flat.segment(k + j * m, m));
      return MixtureMnlParams(flat.head(k), std::move(comps));
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace halomnl
