#include "halomnl/synthetic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "halomnl/rng.hpp"

namespace halomnl {

namespace {

// Substream tags under the single spec seed, split by purpose so that the
// ground truth is unchanged when n grows and assortments are unchanged when
// choices are resampled.
constexpr std::uint32_t kTruthStream = 0;
constexpr std::uint32_t kAssortmentStream = 1;
constexpr std::uint32_t kChoiceStream = 2;

constexpr int kMaxEmptyDraws = 1'000'000;

}  // namespace

double SyntheticSpec::effective_factor_scale() const {
  return factor_scale < 0.0 ? 1.0 / std::sqrt(static_cast<double>(rank)) : factor_scale;
}

void SyntheticSpec::validate() const {
  if (m < 1) throw std::invalid_argument("m must be positive");
  if (rank < 1 || rank > m) {
    throw std::invalid_argument("rank must lie in [1, m]");
  }
  if (!(inclusion_prob > 0.0 && inclusion_prob < 1.0)) {
    throw std::invalid_argument("inclusion_prob must lie in (0, 1)");
  }
  if (!(std::isfinite(alpha_min) && std::isfinite(alpha_max)) || alpha_min > alpha_max) {
    throw std::invalid_argument("alpha range must be a finite interval");
  }
  if (!std::isfinite(factor_scale)) {
    throw std::invalid_argument("factor_scale must be finite");
  }
  if (n < 1) throw std::invalid_argument("n must be positive");
}

LowRankHaloParams sample_ground_truth(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed, kTruthStream);
  const double scale = spec.effective_factor_scale();

  Eigen::VectorXd alpha(spec.m);
  for (int i = 0; i < spec.m; ++i) alpha[i] = rng.uniform(spec.alpha_min, spec.alpha_max);

  Eigen::MatrixXd u(spec.m, spec.rank);
  Eigen::MatrixXd v(spec.m, spec.rank);
  for (int i = 0; i < spec.m; ++i)
    for (int j = 0; j < spec.rank; ++j) u(i, j) = rng.normal(0.0, scale);
  for (int i = 0; i < spec.m; ++i)
    for (int j = 0; j < spec.rank; ++j) v(i, j) = rng.normal(0.0, scale);

  return LowRankHaloParams(std::move(alpha), std::move(u), std::move(v),
                           DiagMode::additive);
}

std::vector<Assortment> sample_assortments(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed, kAssortmentStream);
  std::vector<Assortment> assortments;
  assortments.reserve(static_cast<std::size_t>(spec.n));

  std::vector<std::uint8_t> bits(static_cast<std::size_t>(spec.m));
  for (int t = 0; t < spec.n; ++t) {
    int empty_draws = 0;
    while (true) {
      int offered = 0;
      for (auto& b : bits) {
        b = rng.bernoulli(spec.inclusion_prob) ? 1 : 0;
        offered += b;
      }
      if (offered > 0) break;
      if (++empty_draws >= kMaxEmptyDraws) {
        throw std::runtime_error("assortment sampling: " +
                                 std::to_string(kMaxEmptyDraws) +
                                 " consecutive empty draws");
      }
    }
    assortments.emplace_back(bits);
  }
  return assortments;
}

ChoiceDataset sample_choices(const LowRankHaloParams& truth,
                             const std::vector<Assortment>& assortments,
                             std::int64_t seed) {
  Rng rng(seed, kChoiceStream);
  std::vector<Transaction> transactions;
  transactions.reserve(assortments.size());

  for (const Assortment& a : assortments) {
    const ChoiceProbabilities probs = lowrank_probs(truth, a);
    const double u = rng.uniform();
    const std::vector<int> offered = a.offered_indices();
    int choice = offered.back();  // guards against cumulative rounding below 1
    double cum = 0.0;
    for (int i : offered) {
      cum += probs[i];
      if (u < cum) {
        choice = i;
        break;
      }
    }
    transactions.emplace_back(a, choice);
  }
  return ChoiceDataset(truth.num_products(), std::move(transactions));
}

}  // namespace halomnl
