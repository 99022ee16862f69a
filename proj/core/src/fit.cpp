#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "halomnl/dataset_io.hpp"
#include "halomnl/estimation.hpp"
#include "halomnl/io_util.hpp"
#include "halomnl/rng.hpp"

namespace halomnl {

namespace {

// Substream tags under the single fit seed. Stream 0 is consumed by the
// validation split so that the split matches split_dataset(seed) exactly.
constexpr std::uint32_t kInitStream = 1;
constexpr std::uint32_t kShuffleStream = 2;

ModelParams initial_params(ModelFamily family, int m, const FitConfig& config) {
  Rng rng(config.seed, kInitStream);
  switch (family) {
    case ModelFamily::mnl:
      return MnlParams(Eigen::VectorXd::Zero(m));
    case ModelFamily::halo:
      return HaloParams(Eigen::MatrixXd::Zero(m, m));
    case ModelFamily::lowrank: {
      const int r = config.rank;
      Eigen::MatrixXd u(m, r);
      Eigen::MatrixXd v(m, r);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < r; ++j) u(i, j) = rng.normal(0.0, config.init_scale);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < r; ++j) v(i, j) = rng.normal(0.0, config.init_scale);
      return LowRankHaloParams(Eigen::VectorXd::Zero(m), std::move(u), std::move(v),
                               config.diag_mode);
    }
    case ModelFamily::mixture: {
      // Components start at distinct small perturbations so they can separate.
      std::vector<MnlParams> components;
      components.reserve(static_cast<std::size_t>(config.mixture_k));
      for (int c = 0; c < config.mixture_k; ++c) {
        Eigen::VectorXd alpha(m);
        for (int i = 0; i < m; ++i) alpha[i] = rng.normal(0.0, config.init_scale);
        components.emplace_back(std::move(alpha));
      }
      return MixtureMnlParams(Eigen::VectorXd::Zero(config.mixture_k),
                              std::move(components));
    }
  }
  throw std::logic_error("unknown model family");
}

// Adds the gradient of one transaction's NLL into `grad` (pack_params layout).
// Mirrors grad_mnl / grad_halo / grad_lowrank / grad_mixture without the
// per-call dense temporaries.
struct GradVisitor {
  const Transaction& t;
  Eigen::VectorXd& grad;

  void operator()(const MnlParams& p) const {
    Eigen::VectorXd residual = masked_softmax(p.alpha(), t.assortment());
    residual[t.choice()] -= 1.0;
    grad += residual;
  }

  void operator()(const HaloParams& p) const {
    const int m = p.num_products();
    const Assortment& a = t.assortment();
    Eigen::VectorXd residual = masked_softmax(halo_logits(p.h(), a), a);
    residual[t.choice()] -= 1.0;
    for (int i : a.offered_indices()) {
      const int base = i * m;
      for (int j : a.offered_indices()) grad[base + j] += residual[i];
    }
  }

  void operator()(const LowRankHaloParams& p) const {
    const int m = p.num_products();
    const int r = p.rank();
    const Assortment& a = t.assortment();
    const Eigen::VectorXd ind = a.indicator();
    const Eigen::VectorXd vta = p.v().transpose() * ind;
    Eigen::VectorXd logits = p.u() * vta;
    if (p.diag_mode() == DiagMode::additive) {
      logits += p.alpha().cwiseProduct(ind);
    } else {
      const Eigen::VectorXd factored_diag = p.u().cwiseProduct(p.v()).rowwise().sum();
      logits += (p.alpha() - factored_diag).cwiseProduct(ind);
    }
    Eigen::VectorXd residual = masked_softmax(logits, a);
    residual[t.choice()] -= 1.0;

    grad.head(m) += residual;  // diag(G); residual is zero off-assortment
    const Eigen::VectorXd rtu = p.u().transpose() * residual;
    const int v_base = m + m * r;
    for (int i : a.offered_indices()) {
      for (int j = 0; j < r; ++j) {
        double du = residual[i] * vta[j];
        double dv = rtu[j];
        if (p.diag_mode() == DiagMode::replace) {
          // The diagonal of G does not flow through U V^T in replace mode.
          du -= residual[i] * p.v()(i, j);
          dv -= residual[i] * p.u()(i, j);
        }
        grad[m + i * r + j] += du;
        grad[v_base + i * r + j] += dv;
      }
    }
  }

  void operator()(const MixtureMnlParams& p) const {
    const MixtureGrad g = grad_mixture(p, t);
    const int k = p.num_components();
    const int m = p.num_products();
    grad.head(k) += g.dweights;
    for (int c = 0; c < k; ++c) grad.segment(k + c * m, m) += g.dalphas[c];
  }
};

// d(signed_lambda * penalty)/d(theta) = 2 * signed_lambda * theta, with
// mixture weight logits exempt from the penalty.
void add_penalty_grad(const ParamShape& shape, const Eigen::VectorXd& theta,
                      double signed_lambda, Eigen::VectorXd& grad) {
  if (signed_lambda == 0.0) return;
  Eigen::Index skip = 0;
  if (shape.family == ModelFamily::mixture) skip = shape.mixture_k;
  grad.tail(grad.size() - skip) += 2.0 * signed_lambda * theta.tail(theta.size() - skip);
}

}  // namespace

FitResult fit(ModelFamily family, const ChoiceDataset& dataset, const FitConfig& config) {
  config.validate();
  if (dataset.empty()) {
    throw std::invalid_argument("cannot fit on an empty dataset");
  }
  const int m = dataset.num_products();
  if (family == ModelFamily::lowrank && config.rank > m) {
    throw std::invalid_argument("rank " + std::to_string(config.rank) + " > m " +
                                std::to_string(m));
  }

  // Hold out a validation slice for early stopping when there is data to spare.
  ChoiceDataset train = dataset;
  std::optional<ChoiceDataset> val;
  if (config.val_fraction > 0.0 && dataset.size() >= 2) {
    auto parts = split_dataset(dataset, 1.0 - config.val_fraction, config.seed);
    if (!parts.first.empty() && !parts.second.empty()) {
      train = std::move(parts.first);
      val = std::move(parts.second);
    }
  }

  ParamShape shape;
  shape.family = family;
  shape.num_products = m;
  shape.rank = config.rank;
  shape.mixture_k = config.mixture_k;
  shape.diag_mode = config.diag_mode;

  Eigen::VectorXd theta = pack_params(initial_params(family, m, config));
  const Eigen::Index dim = theta.size();
  const double signed_lambda =
      config.penalty_sign == PenaltySign::penalize ? config.lambda : -config.lambda;

  Eigen::VectorXd moment1 = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd moment2 = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd grad(dim);
  long step_count = 0;

  const auto& txns = train.transactions();
  const std::size_t n_train = txns.size();
  std::vector<std::size_t> order(n_train);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(config.batch_size);
  Rng shuffle_rng(config.seed, kShuffleStream);

  std::vector<EpochRecord> trace;
  bool converged = false;
  double best_val = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_theta = theta;
  int epochs_since_improvement = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (batch < n_train) shuffle_rng.shuffle(order);

    for (std::size_t start = 0; start < n_train; start += batch) {
      const std::size_t stop = std::min(start + batch, n_train);
      if (!theta.allFinite()) {
        throw std::runtime_error("non-finite parameters at epoch " + std::to_string(epoch));
      }
      const ModelParams current = unpack_params(shape, theta);
      grad.setZero();
      for (std::size_t i = start; i < stop; ++i) {
        std::visit(GradVisitor{txns[order[i]], grad}, current);
      }
      grad /= static_cast<double>(stop - start);
      add_penalty_grad(shape, theta, signed_lambda, grad);

      ++step_count;
      moment1 = config.beta1 * moment1 + (1.0 - config.beta1) * grad;
      moment2 = config.beta2 * moment2 + (1.0 - config.beta2) * grad.cwiseAbs2();
      const double correct1 = 1.0 - std::pow(config.beta1, static_cast<double>(step_count));
      const double correct2 = 1.0 - std::pow(config.beta2, static_cast<double>(step_count));
      theta -= (config.step_size / correct1) *
               (moment1.array() / ((moment2.array() / correct2).sqrt() + config.eps))
                   .matrix();
    }

    if (!theta.allFinite()) {
      throw std::runtime_error("non-finite parameters at epoch " + std::to_string(epoch));
    }
    const ModelParams current = unpack_params(shape, theta);
    EpochRecord record;
    record.train_objective = objective(current, train, config.lambda, config.penalty_sign);
    record.val_ce =
        val ? nll(current, *val) : std::numeric_limits<double>::quiet_NaN();
    trace.push_back(record);
    if (!std::isfinite(record.train_objective)) {
      throw std::runtime_error("non-finite objective at epoch " + std::to_string(epoch));
    }

    if (val) {
      if (record.val_ce < best_val) {
        best_val = record.val_ce;
        best_theta = theta;
        epochs_since_improvement = 0;
      } else if (++epochs_since_improvement >= config.patience) {
        converged = true;
        break;
      }
    }
  }

  const int epochs_run = static_cast<int>(trace.size());
  return FitResult{unpack_params(shape, val ? best_theta : theta), std::move(trace),
                   epochs_run, converged};
}

void save_fit_config(const FitConfig& config, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "lambda=" << format_double(config.lambda) << '\n'
      << "rank=" << config.rank << '\n'
      << "diag_mode=" << to_string(config.diag_mode) << '\n'
      << "mixture_k=" << config.mixture_k << '\n'
      << "step_size=" << format_double(config.step_size) << '\n'
      << "beta1=" << format_double(config.beta1) << '\n'
      << "beta2=" << format_double(config.beta2) << '\n'
      << "eps=" << format_double(config.eps) << '\n'
      << "epochs=" << config.epochs << '\n'
      << "batch_size=" << config.batch_size << '\n'
      << "seed=" << config.seed << '\n'
      << "init_scale=" << format_double(config.init_scale) << '\n'
      << "patience=" << config.patience << '\n'
      << "val_fraction=" << format_double(config.val_fraction) << '\n'
      << "penalty_sign=" << to_string(config.penalty_sign) << '\n';
  write_text_file(path, out.str());
}

namespace {

double parse_double_field(const std::string& key, const std::string& value) {
  try {
    std::size_t consumed = 0;
    const double parsed = std::stod(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw std::invalid_argument("fit config: bad value for " + key + ": '" + value + "'");
  }
}

long long parse_int_field(const std::string& key, const std::string& value) {
  try {
    std::size_t consumed = 0;
    const long long parsed = std::stoll(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw std::invalid_argument("fit config: bad value for " + key + ": '" + value + "'");
  }
}

}  // namespace

FitConfig load_fit_config(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  FitConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("fit config " + path.string() + ":" +
                                  std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "lambda") {
      config.lambda = parse_double_field(key, value);
    } else if (key == "rank") {
      config.rank = static_cast<int>(parse_int_field(key, value));
    } else if (key == "diag_mode") {
      config.diag_mode = diag_mode_from_string(value);
    } else if (key == "mixture_k") {
      config.mixture_k = static_cast<int>(parse_int_field(key, value));
    } else if (key == "step_size") {
      config.step_size = parse_double_field(key, value);
    } else if (key == "beta1") {
      config.beta1 = parse_double_field(key, value);
    } else if (key == "beta2") {
      config.beta2 = parse_double_field(key, value);
    } else if (key == "eps") {
      config.eps = parse_double_field(key, value);
    } else if (key == "epochs") {
      config.epochs = static_cast<int>(parse_int_field(key, value));
    } else if (key == "batch_size") {
      config.batch_size = static_cast<int>(parse_int_field(key, value));
    } else if (key == "seed") {
      config.seed = parse_int_field(key, value);
    } else if (key == "init_scale") {
      config.init_scale = parse_double_field(key, value);
    } else if (key == "patience") {
      config.patience = static_cast<int>(parse_int_field(key, value));
    } else if (key == "val_fraction") {
      config.val_fraction = parse_double_field(key, value);
    } else if (key == "penalty_sign") {
      config.penalty_sign = penalty_sign_from_string(value);
    } else {
      throw std::invalid_argument("fit config " + path.string() + ":" +
                                  std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  config.validate();
  return config;
}

void save_trace_csv(const FitResult& result, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "epoch,train_objective,val_ce\n";
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    out << (i + 1) << ',' << format_double(result.trace[i].train_objective) << ','
        << format_double(result.trace[i].val_ce) << '\n';
  }
  write_text_file(path, out.str());
}

}  // namespace halomnl
