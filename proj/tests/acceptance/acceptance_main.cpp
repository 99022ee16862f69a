// Acceptance gate: ten end-to-end checks covering the model equivalences,
// gradient correctness, synthetic recovery, estimator sanity, benchmark
// report shape, and byte-level determinism. Each criterion prints exactly one
// [PASS]/[FAIL] line; the process exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <halomnl/estimation.hpp>
#include <halomnl/evaluation.hpp>
#include <halomnl/models.hpp>
#include <halomnl/rng.hpp>
#include <halomnl/synthetic.hpp>
#include <halomnl/types.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "testkit.hpp"

using namespace halomnl;
namespace tk = halomnl::testkit;

namespace {

struct CriterionFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& detail) {
  if (!ok) throw CriterionFailure(detail);
}

// Distribution sanity applied to every probability vector the gate produces:
// normalized over the offered set, exactly zero elsewhere.
void require_distribution(const ChoiceProbabilities& p, const Assortment& a) {
  double sum = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    if (a.offered(i)) {
      require(p[i] >= 0.0, "negative probability");
      sum += p[i];
    } else {
      require(p[i] == 0.0, "nonzero probability off the assortment");
    }
  }
  require(std::abs(sum - 1.0) < 1e-9, "probabilities do not sum to 1");
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CriterionFailure("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

// --- criterion 1: attention forward pass equals the factored halo model ----

void check_attention_equivalence() {
  Rng rng(1001);
  for (int trial = 0; trial < 1000; ++trial) {
    const int m = 2 + static_cast<int>(rng.uniform_int(19));  // m <= 20
    const int r = 1 + static_cast<int>(rng.uniform_int(std::min(m, 5)));
    const LowRankHaloParams params = tk::random_lowrank(m, r, DiagMode::additive, 0.8, rng);
    const Assortment a = tk::random_assortment(m, rng);
    const ChoiceProbabilities attn = attention_forward(params, a, /*normalize=*/false);
    const ChoiceProbabilities direct = lowrank_probs(params, a);
    require_distribution(attn, a);
    const double gap = (attn.values() - direct.values()).cwiseAbs().maxCoeff();
    require(gap < 1e-10, "pair " + std::to_string(trial) + ": max gap " + std::to_string(gap));
  }
}

// --- criterion 2: analytic gradients match central finite differences ------

double transaction_nll(const ParamShape& shape, const Eigen::VectorXd& flat,
                       const Transaction& tx) {
  return nll(unpack_params(shape, flat), ChoiceDataset(shape.num_products, {tx}));
}

Eigen::VectorXd flatten_rowmajor(const Eigen::MatrixXd& m) {
  Eigen::VectorXd out(m.size());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[k++] = m(i, j);
  return out;
}

void check_gradients() {
  Rng rng(1002);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + static_cast<int>(rng.uniform_int(7));  // m <= 8
    const Transaction tx = tk::random_transaction(m, rng);

    ModelParams params(MnlParams(Eigen::VectorXd::Zero(1)));
    Eigen::VectorXd analytic;
    switch (trial % 3) {
      case 0: {
        const HaloParams halo = tk::random_halo(m, 1.0, rng);
        analytic = flatten_rowmajor(grad_halo(halo.h(), tx));
        params = ModelParams(halo);
        break;
      }
      case 1: {
        const int r = 1 + static_cast<int>(rng.uniform_int(std::min(m, 3)));
        const DiagMode mode = rng.bernoulli(0.5) ? DiagMode::additive : DiagMode::replace;
        const LowRankHaloParams lr = tk::random_lowrank(m, r, mode, 0.7, rng);
        const LowRankGrad g = grad_lowrank(lr, tx);
        analytic.resize(m + 2 * m * r);
        analytic << g.dalpha, flatten_rowmajor(g.du), flatten_rowmajor(g.dv);
        params = ModelParams(lr);
        break;
      }
      default: {
        const int k = 2 + static_cast<int>(rng.uniform_int(2));
        const MixtureMnlParams mix = tk::random_mixture(m, k, 1.0, rng);
        const MixtureGrad g = grad_mixture(mix, tx);
        analytic.resize(k + k * m);
        analytic.head(k) = g.dweights;
        for (int c = 0; c < k; ++c)
          analytic.segment(k + c * m, m) = g.dalphas[static_cast<std::size_t>(c)];
        params = ModelParams(mix);
        break;
      }
    }

    const ParamShape shape = shape_of(params);
    const Eigen::VectorXd fd = tk::fd_gradient(
        [&](const Eigen::VectorXd& x) { return transaction_nll(shape, x, tx); },
        pack_params(params));
    const double disc = tk::max_gradient_discrepancy(analytic, fd);
    require(disc < 1e-4, "instance " + std::to_string(trial) + " (" +
                             model_name(params) + "): discrepancy " + std::to_string(disc));
  }
}

// --- criterion 3: probabilities and likelihoods match the naive oracle -----

void check_oracle_equivalence() {
  Rng rng(1003);
  for (int trial = 0; trial < 1000; ++trial) {
    const int m = 2 + static_cast<int>(rng.uniform_int(7));  // m <= 8
    const HaloParams halo = tk::random_halo(m, 1.0, rng);
    const Assortment a = tk::random_assortment(m, rng);
    const ChoiceProbabilities p = halo_probs(halo, a);
    require_distribution(p, a);
    const std::vector<double> oracle = tk::oracle_halo_probs(halo.h(), a);
    for (int i = 0; i < m; ++i) {
      require(std::abs(p[i] - oracle[static_cast<std::size_t>(i)]) < 1e-12,
              "instance " + std::to_string(trial) + ": probability mismatch");
    }
  }
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + static_cast<int>(rng.uniform_int(7));
    const ChoiceDataset data = tk::random_dataset(m, 30, rng);
    const ModelParams params(tk::random_halo(m, 1.0, rng));
    require(std::abs(nll(params, data) - tk::oracle_nll(params, data)) < 1e-12,
            "dataset " + std::to_string(trial) + ": nll mismatch");
  }
}

// --- criterion 4: model reductions ----------------------------------------

void check_reductions() {
  Rng rng(1004);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + static_cast<int>(rng.uniform_int(7));
    const Assortment a = tk::random_assortment(m, rng);
    const Eigen::VectorXd alpha = tk::random_matrix(m, 1, 1.5, rng).col(0);
    const Eigen::VectorXd mnl = mnl_probs(MnlParams(alpha), a).values();

    const HaloParams diag(Eigen::MatrixXd(alpha.asDiagonal()));
    require((halo_probs(diag, a).values() - mnl).cwiseAbs().maxCoeff() < 1e-10,
            "diagonal halo != mnl");

    const LowRankHaloParams zero(alpha, Eigen::MatrixXd::Zero(m, 2),
                                 Eigen::MatrixXd::Zero(m, 2));
    require((lowrank_probs(zero, a).values() - mnl).cwiseAbs().maxCoeff() < 1e-10,
            "zero-factor lowrank != mnl");

    Eigen::VectorXd w(1);
    w << rng.normal();
    const MixtureMnlParams single(w, {MnlParams(alpha)});
    require((mixture_probs(single, a).values() - mnl).cwiseAbs().maxCoeff() < 1e-10,
            "single-component mixture != mnl");

    const HaloParams halo = tk::random_halo(m, 1.0, rng);
    const LowRankHaloParams full(halo.h().diagonal(), halo.h(),
                                 Eigen::MatrixXd::Identity(m, m), DiagMode::replace);
    require((lowrank_probs(full, a).values() - halo_probs(halo, a).values())
                    .cwiseAbs()
                    .maxCoeff() < 1e-10,
            "full-rank construction != halo");
  }
}

// --- criterion 5: invariances ---------------------------------------------

void check_invariances() {
  Rng rng(1005);
  // Column shifts H -> H + 1 c^T leave choice probabilities unchanged.
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + static_cast<int>(rng.uniform_int(7));
    const HaloParams halo = tk::random_halo(m, 1.0, rng);
    const Eigen::VectorXd c = tk::random_matrix(m, 1, 2.0, rng).col(0);
    const Assortment a = tk::random_assortment(m, rng);
    const HaloParams shifted(halo.h() + Eigen::VectorXd::Ones(m) * c.transpose());
    const ChoiceProbabilities p = halo_probs(halo, a);
    const ChoiceProbabilities q = halo_probs(shifted, a);
    require_distribution(p, a);
    require_distribution(q, a);
    require((p.values() - q.values()).cwiseAbs().maxCoeff() < 1e-9,
            "column shift moved the probabilities");
  }
  // Relabeling products permutes the probabilities accordingly.
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 2 + static_cast<int>(rng.uniform_int(7));
    const HaloParams halo = tk::random_halo(m, 1.0, rng);
    const Assortment a = tk::random_assortment(m, rng);
    std::vector<int> perm(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) perm[static_cast<std::size_t>(i)] = i;
    rng.shuffle(perm);

    Eigen::MatrixXd hp(m, m);
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      bits[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] =
          a.offered(i) ? 1 : 0;
      for (int j = 0; j < m; ++j)
        hp(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]) =
            halo.h()(i, j);
    }
    const ChoiceProbabilities p = halo_probs(halo, a);
    const ChoiceProbabilities pp = halo_probs(HaloParams(hp), Assortment(bits));
    for (int i = 0; i < m; ++i) {
      require(std::abs(pp[perm[static_cast<std::size_t>(i)]] - p[i]) < 1e-9,
              "relabeling broke equivariance");
    }
  }
}

// --- criteria 6/7: synthetic recovery via the scaling command --------------

struct ScalingRow {
  int m = 0;
  int n = 0;
  std::int64_t seed = 0;
  std::string model;
  std::string metric;
  double value = 0.0;
};

std::vector<ScalingRow> read_scaling(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CriterionFailure("cannot open " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<ScalingRow> rows;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string m, n, r, seed, model, metric, value;
    std::getline(fields, m, ',');
    std::getline(fields, n, ',');
    std::getline(fields, r, ',');
    std::getline(fields, seed, ',');
    std::getline(fields, model, ',');
    std::getline(fields, metric, ',');
    std::getline(fields, value, ',');
    rows.push_back({std::stoi(m), std::stoi(n), std::stoll(seed), model, metric,
                    std::stod(value)});
  }
  return rows;
}

double lookup(const std::vector<ScalingRow>& rows, int n, std::int64_t seed,
              const std::string& model, const std::string& metric) {
  for (const ScalingRow& row : rows) {
    if (row.n == n && row.seed == seed && row.model == model && row.metric == metric)
      return row.value;
  }
  throw CriterionFailure("missing scaling row: n=" + std::to_string(n) + " seed=" +
                         std::to_string(seed) + " " + model + "/" + metric);
}

tools::ScalingOptions recovery_options(const std::filesystem::path& out_dir) {
  tools::ScalingOptions options;
  options.m_list = {10};
  options.rank = 2;
  options.n_list = {1000, 16000, 50000};
  options.seeds = 3;
  options.inclusion_prob = 0.5;
  options.out_dir = out_dir;
  return options;
}

void check_recovery(const std::filesystem::path& out_dir) {
  std::ostringstream log;
  tools::cmd_scaling(recovery_options(out_dir), log);
  const std::vector<ScalingRow> rows = read_scaling(out_dir / "scaling.csv");

  double kl_sum = 0.0;
  for (std::int64_t seed = 0; seed < 3; ++seed) {
    kl_sum += lookup(rows, 50000, seed, "lowrank", "kl_to_truth");
    const double f2_small = lookup(rows, 1000, seed, "lowrank", "param_error_f2");
    const double f2_large = lookup(rows, 16000, seed, "lowrank", "param_error_f2");
    require(f2_large < f2_small,
            "seed " + std::to_string(seed) + ": F2 error did not shrink (" +
                std::to_string(f2_large) + " vs " + std::to_string(f2_small) + ")");
  }
  const double kl_mean = kl_sum / 3.0;
  require(kl_mean < 0.01,
          "mean KL at n=50000 is " + std::to_string(kl_mean) + " (need < 0.01)");
}

tools::ScalingOptions separation_options(const std::filesystem::path& out_dir) {
  tools::ScalingOptions options;
  options.m_list = {20};
  options.rank = 2;
  options.n_list = {2000};
  options.seeds = 3;
  options.out_dir = out_dir;
  return options;
}

void check_separation(const std::filesystem::path& out_dir) {
  std::ostringstream log;
  tools::cmd_scaling(separation_options(out_dir), log);
  const std::vector<ScalingRow> rows = read_scaling(out_dir / "scaling.csv");

  double lowrank_sum = 0.0;
  double halo_sum = 0.0;
  for (std::int64_t seed = 0; seed < 3; ++seed) {
    lowrank_sum += lookup(rows, 2000, seed, "lowrank", "kl_to_truth");
    halo_sum += lookup(rows, 2000, seed, "halo", "kl_to_truth");
  }
  require(lowrank_sum < halo_sum,
          "lowrank mean KL " + std::to_string(lowrank_sum / 3.0) +
              " not below halo mean KL " + std::to_string(halo_sum / 3.0));
}

// --- criterion 8: two-product estimator sanity -----------------------------

void check_estimator_sanity() {
  // Exact empirical shares 1/3 and 2/3 on the full assortment: the MLE gap
  // alpha_1 - alpha_0 is ln 2.
  std::vector<Transaction> txs;
  const Assortment both = Assortment::full(2);
  for (int i = 0; i < 1000; ++i) txs.emplace_back(both, 0);
  for (int i = 0; i < 2000; ++i) txs.emplace_back(both, 1);
  const ChoiceDataset data(2, std::move(txs));

  FitConfig config;
  config.lambda = 0.0;
  config.val_fraction = 0.0;
  const FitResult result = fit(ModelFamily::mnl, data, config);
  const Eigen::VectorXd alpha = std::get<MnlParams>(result.params).alpha();
  const double gap = alpha[1] - alpha[0];
  require(std::abs(gap - std::log(2.0)) < 0.05,
          "fitted gap " + std::to_string(gap) + " vs ln 2 = " +
              std::to_string(std::log(2.0)));

  const tk::GridMleResult grid = tk::grid_mle_mnl2(data);
  require(std::abs(gap - grid.delta) <= 0.05 + 1e-12,
          "fitted gap " + std::to_string(gap) + " more than one grid step from " +
              std::to_string(grid.delta));
}

// --- criterion 9: benchmark report shape ----------------------------------

tools::BenchmarkOptions benchmark_options(const std::filesystem::path& out_dir) {
  tools::BenchmarkOptions options;
  options.manifest = out_dir / "manifest.csv";
  options.models = {"mnl", "halo", "lowrank"};
  options.seeds = 3;
  options.out_dir = out_dir / "bench";
  options.config.rank = 2;
  return options;
}

void run_benchmark(const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (int c = 0; c < 3; ++c) {
    SyntheticSpec spec;
    spec.m = 10;
    spec.rank = 2;
    spec.n = 2000;
    spec.seed = 300 + c;
    tools::GenerateOptions gen;
    gen.spec = spec;
    gen.name = "cat" + std::to_string(c);
    gen.out_dir = out_dir;
    std::ostringstream log;
    tools::cmd_generate(gen, log);
  }
  std::ofstream manifest(out_dir / "manifest.csv");
  manifest << "category_name,dataset_path\n";
  for (int c = 0; c < 3; ++c)
    manifest << "cat" << c << ",cat" << c << ".jsonl\n";
  manifest.close();

  std::ostringstream log;
  tools::cmd_benchmark(benchmark_options(out_dir), log);
}

void check_benchmark_shape(const std::filesystem::path& out_dir) {
  run_benchmark(out_dir);

  const std::vector<EvalReport> reports =
      read_reports_csv(out_dir / "bench" / "reports.csv");
  require(reports.size() == 3 * 3 * 3,
          "expected 27 report rows, got " + std::to_string(reports.size()));

  const nlohmann::json summary =
      nlohmann::json::parse(slurp(out_dir / "bench" / "summary.json"));
  const std::string reference = summary.at("reference").get<std::string>();
  const double ref_loss =
      summary.at("models").at(reference).at("relative_loss_pct").get<double>();
  require(ref_loss == 0.0, "reference relative loss is " + std::to_string(ref_loss) +
                               ", not exactly 0");

  int wins = 0;
  for (const auto& [model, entry] : summary.at("models").items()) {
    wins += entry.at("wins").get<int>();
  }
  require(wins >= 3, "wins sum to " + std::to_string(wins) + " (need >= 3)");
}

// --- criterion 10: byte-identical reruns ----------------------------------

void require_identical(const std::filesystem::path& a, const std::filesystem::path& b) {
  if (slurp(a) != slurp(b))
    throw CriterionFailure(a.filename().string() + " differs between reruns");
}

void check_determinism(const std::filesystem::path& first_recovery,
                       const std::filesystem::path& first_separation,
                       const std::filesystem::path& first_benchmark,
                       const std::filesystem::path& scratch) {
  std::ostringstream log;
  tools::cmd_scaling(recovery_options(scratch / "recovery"), log);
  require_identical(first_recovery / "scaling.csv", scratch / "recovery" / "scaling.csv");

  tools::cmd_scaling(separation_options(scratch / "separation"), log);
  require_identical(first_separation / "scaling.csv",
                    scratch / "separation" / "scaling.csv");

  run_benchmark(scratch / "benchmark");
  require_identical(first_benchmark / "bench" / "reports.csv",
                    scratch / "benchmark" / "bench" / "reports.csv");
  require_identical(first_benchmark / "bench" / "summary.json",
                    scratch / "benchmark" / "bench" / "summary.json");
}

// --- harness ---------------------------------------------------------------

int failures = 0;

void run_criterion(int number, const std::string& name, double budget_seconds,
                   const std::function<void()>& body) {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = true;
  try {
    body();
  } catch (const std::exception& e) {
    ok = false;
    detail = e.what();
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (ok && budget_seconds > 0.0 && elapsed > budget_seconds) {
    ok = false;
    detail = "exceeded the " + std::to_string(budget_seconds) + "s budget";
  }
  if (!ok) ++failures;
  std::printf("[%s] %2d. %s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", number, name.c_str(),
              elapsed, detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
}

}  // namespace

int main() {
  tk::ScopedTempDir work("halomnl_acceptance");

  run_criterion(1, "attention forward pass equals the factored halo model", 10.0,
                check_attention_equivalence);
  run_criterion(2, "analytic gradients match finite differences", 60.0, check_gradients);
  run_criterion(3, "probabilities and likelihoods match the naive oracle", 0.0,
                check_oracle_equivalence);
  run_criterion(4, "degenerate settings reduce to the simpler models", 0.0,
                check_reductions);
  run_criterion(5, "column-shift invariance and relabeling equivariance", 0.0,
                check_invariances);
  run_criterion(6, "low-rank recovery tightens with sample size", 600.0,
                [&] { check_recovery(work / "recovery"); });
  run_criterion(7, "low-rank beats the full halo matrix at small samples", 600.0,
                [&] { check_separation(work / "separation"); });
  run_criterion(8, "two-product fit recovers the known utility gap", 30.0,
                check_estimator_sanity);
  run_criterion(9, "benchmark summary has the expected shape", 300.0,
                [&] { check_benchmark_shape(work / "benchmark"); });
  run_criterion(10, "reruns produce byte-identical outputs", 0.0, [&] {
    check_determinism(work / "recovery", work / "separation", work / "benchmark",
                      work / "rerun");
  });

  if (failures == 0) {
    std::printf("all 10 criteria passed\n");
    return 0;
  }
  std::printf("%d criteria failed\n", failures);
  return 1;
}
