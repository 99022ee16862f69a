#include <vector>

#include <benchmark/benchmark.h>
#include <halomnl/estimation.hpp>
#include <halomnl/models.hpp>
#include <halomnl/rng.hpp>
#include <halomnl/types.hpp>

using namespace halomnl;

namespace {

Assortment sample_assortment(int m, Rng& rng) {
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(m));
  for (auto& b : bits) b = rng.bernoulli(0.5) ? 1 : 0;
  bits[0] = 1;  // keep it nonempty
  return Assortment(std::move(bits));
}

Eigen::MatrixXd gaussian_matrix(int rows, int cols, double scale, Rng& rng) {
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) out(i, j) = rng.normal(0.0, scale);
  return out;
}

Transaction sample_transaction(int m, Rng& rng) {
  Assortment a = sample_assortment(m, rng);
  const std::vector<int> offered = a.offered_indices();
  const int choice =
      offered[static_cast<std::size_t>(rng.uniform_int(offered.size()))];
  return Transaction(std::move(a), choice);
}

ChoiceDataset sample_dataset(int m, int n, Rng& rng) {
  std::vector<Transaction> txs;
  txs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) txs.push_back(sample_transaction(m, rng));
  return ChoiceDataset(m, std::move(txs));
}

void bm_mnl_probs(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  Rng rng(1);
  const MnlParams params(gaussian_matrix(m, 1, 1.0, rng).col(0));
  const Assortment a = sample_assortment(m, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mnl_probs(params, a));
  }
}
BENCHMARK(bm_mnl_probs)->Arg(10)->Arg(50)->Arg(200);

void bm_halo_probs(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  Rng rng(2);
  const HaloParams params(gaussian_matrix(m, m, 0.5, rng));
  const Assortment a = sample_assortment(m, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(halo_probs(params, a));
  }
}
BENCHMARK(bm_halo_probs)->Arg(10)->Arg(50)->Arg(200);

void bm_lowrank_probs(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const int r = 4;
  Rng rng(3);
  const LowRankHaloParams params(gaussian_matrix(m, 1, 1.0, rng).col(0),
                                 gaussian_matrix(m, r, 0.5, rng),
                                 gaussian_matrix(m, r, 0.5, rng));
  const Assortment a = sample_assortment(m, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(lowrank_probs(params, a));
  }
}
BENCHMARK(bm_lowrank_probs)->Arg(10)->Arg(50)->Arg(200);

void bm_attention_forward(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const int r = 4;
  Rng rng(4);
  const LowRankHaloParams params(gaussian_matrix(m, 1, 1.0, rng).col(0),
                                 gaussian_matrix(m, r, 0.5, rng),
                                 gaussian_matrix(m, r, 0.5, rng));
  const Assortment a = sample_assortment(m, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(attention_forward(params, a, /*normalize=*/true));
  }
}
BENCHMARK(bm_attention_forward)->Arg(10)->Arg(50)->Arg(200);

void bm_mixture_probs(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const int k = 5;
  Rng rng(5);
  std::vector<MnlParams> components;
  for (int c = 0; c < k; ++c)
    components.emplace_back(gaussian_matrix(m, 1, 1.0, rng).col(0));
  const MixtureMnlParams params(gaussian_matrix(k, 1, 1.0, rng).col(0), components);
  const Assortment a = sample_assortment(m, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mixture_probs(params, a));
  }
}
BENCHMARK(bm_mixture_probs)->Arg(10)->Arg(50)->Arg(200);

void bm_grad_halo(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  Rng rng(6);
  const Eigen::MatrixXd h = gaussian_matrix(m, m, 0.5, rng);
  const Transaction tx = sample_transaction(m, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(grad_halo(h, tx));
  }
}
BENCHMARK(bm_grad_halo)->Arg(10)->Arg(50)->Arg(200);

void bm_grad_lowrank(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  const int r = 4;
  Rng rng(7);
  const LowRankHaloParams params(gaussian_matrix(m, 1, 1.0, rng).col(0),
                                 gaussian_matrix(m, r, 0.5, rng),
                                 gaussian_matrix(m, r, 0.5, rng));
  const Transaction tx = sample_transaction(m, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(grad_lowrank(params, tx));
  }
}
BENCHMARK(bm_grad_lowrank)->Arg(10)->Arg(50)->Arg(200);

void bm_nll_halo(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  Rng rng(8);
  const ModelParams params(HaloParams(gaussian_matrix(m, m, 0.5, rng)));
  const ChoiceDataset data = sample_dataset(m, 1000, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(nll(params, data));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(bm_nll_halo)->Arg(10)->Arg(50);

void bm_fit_lowrank(benchmark::State& state) {
  const int m = static_cast<int>(state.range(0));
  Rng rng(9);
  const ChoiceDataset data = sample_dataset(m, 500, rng);
  FitConfig config;
  config.rank = 2;
  config.epochs = 5;
  config.val_fraction = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit(ModelFamily::lowrank, data, config));
  }
}
BENCHMARK(bm_fit_lowrank)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
