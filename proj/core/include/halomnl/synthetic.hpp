#pragma once

#include <cstdint>
#include <vector>

#include "halomnl/models.hpp"
#include "halomnl/types.hpp"

namespace halomnl {

/// Recipe for a synthetic choice instance: a low-rank halo ground truth plus
/// independently sampled assortments.
struct SyntheticSpec {
  int m = 10;                  // product count
  int rank = 2;                // true halo rank
  double inclusion_prob = 0.5; // per-product Bernoulli inclusion q
  double alpha_min = -1.0;     // base utility range
  double alpha_max = 1.0;
  double factor_scale = -1.0;  // std of U*, V* entries; negative -> 1/sqrt(rank)
  int n = 1000;                // transaction count
  std::int64_t seed = 0;

  double effective_factor_scale() const;
  void validate() const;
};

/// alpha* uniform on [alpha_min, alpha_max], U*, V* entries iid Gaussian with
/// std effective_factor_scale(), additive diagonal. Deterministic given seed.
LowRankHaloParams sample_ground_truth(const SyntheticSpec& spec);

/// n assortments, each product included independently with probability q.
/// Empty draws are rejected and resampled. The first k assortments do not
/// depend on n, so growing a dataset extends it.
std::vector<Assortment> sample_assortments(const SyntheticSpec& spec);

/// One choice per assortment via inverse-CDF sampling from
/// lowrank_probs(truth, a). Uses its own substream of `seed`, so choices for
/// a fixed assortment prefix do not depend on how many follow.
ChoiceDataset sample_choices(const LowRankHaloParams& truth,
                             const std::vector<Assortment>& assortments,
                             std::int64_t seed);

}  // namespace halomnl
