#include "halomnl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "halomnl/io_util.hpp"

namespace halomnl {

double cross_entropy(const ModelParams& params, const ChoiceDataset& dataset) {
  return nll(params, dataset);
}

Eigen::MatrixXd canonicalize_halo(const Eigen::MatrixXd& h) {
  if (!h.allFinite()) {
    throw std::invalid_argument("canonicalize_halo: matrix has non-finite entries");
  }
  const Eigen::RowVectorXd column_means = h.colwise().mean();
  Eigen::MatrixXd centered = h;
  centered.rowwise() -= column_means;
  return centered;
}

namespace {

Eigen::MatrixXd centered_difference(const Eigen::MatrixXd& fitted_h,
                                    const Eigen::MatrixXd& truth_h) {
  if (fitted_h.rows() != truth_h.rows() || fitted_h.cols() != truth_h.cols() ||
      fitted_h.rows() != fitted_h.cols()) {
    throw std::invalid_argument("param recovery: dimension mismatch");
  }
  return canonicalize_halo(fitted_h) - canonicalize_halo(truth_h);
}

}  // namespace

double param_recovery_error_f2(const Eigen::MatrixXd& fitted_h,
                               const Eigen::MatrixXd& truth_h) {
  const Eigen::MatrixXd d = centered_difference(fitted_h, truth_h);
  const auto m = static_cast<double>(fitted_h.rows());
  return d.squaredNorm() / (m * m);
}

double param_recovery_error_l1(const Eigen::MatrixXd& fitted_h,
                               const Eigen::MatrixXd& truth_h) {
  const Eigen::MatrixXd d = centered_difference(fitted_h, truth_h);
  const auto m = static_cast<double>(fitted_h.rows());
  return d.cwiseAbs().sum() / (m * m);
}

double param_recovery_error(const LowRankHaloParams& fitted, const LowRankHaloParams& truth) {
  return param_recovery_error_f2(lowrank_materialize(fitted), lowrank_materialize(truth));
}

double param_recovery_error_l1(const LowRankHaloParams& fitted,
                               const LowRankHaloParams& truth) {
  return param_recovery_error_l1(lowrank_materialize(fitted), lowrank_materialize(truth));
}

double kl_to_truth(const ModelParams& fitted, const ModelParams& truth,
                   const std::vector<Assortment>& assortments) {
  if (assortments.empty()) {
    throw std::invalid_argument("kl_to_truth: assortment list is empty");
  }
  double total = 0.0;
  for (const Assortment& a : assortments) {
    const ChoiceProbabilities p_star = choice_probs(truth, a);
    const ChoiceProbabilities p_hat = choice_probs(fitted, a);
    double kl = 0.0;
    for (int i : a.offered_indices()) {
      if (p_star[i] == 0.0) continue;
      if (p_hat[i] == 0.0) {
        kl = std::numeric_limits<double>::infinity();
        break;
      }
      kl += p_star[i] * std::log(p_star[i] / p_hat[i]);
    }
    // Each assortment's divergence is nonnegative; clip rounding residue.
    total += std::max(kl, 0.0);
  }
  return total / static_cast<double>(assortments.size());
}

namespace {

constexpr double kWinTie = 1e-9;

}  // namespace

BenchmarkSummary summarize_benchmark(const std::vector<EvalReport>& reports,
                                     const std::string& reference_model,
                                     RelativeLossMode mode) {
  if (reports.empty()) {
    throw std::invalid_argument("summarize_benchmark: no reports");
  }

  std::set<std::string> model_set;
  std::set<std::string> category_set;
  std::map<std::pair<std::string, std::string>, std::pair<double, int>> cells;
  for (const EvalReport& r : reports) {
    model_set.insert(r.model_name);
    category_set.insert(r.dataset_name);
    auto& [sum, count] = cells[{r.model_name, r.dataset_name}];
    sum += r.test_ce;
    ++count;
  }
  if (model_set.count(reference_model) == 0) {
    throw std::invalid_argument("summarize_benchmark: reference model '" + reference_model +
                                "' has no reports");
  }

  const auto cell_mean = [&](const std::string& model, const std::string& category) {
    const auto it = cells.find({model, category});
    if (it == cells.end()) {
      throw std::invalid_argument("summarize_benchmark: missing cell for model '" + model +
                                  "', category '" + category + "'");
    }
    return it->second.first / it->second.second;
  };

  BenchmarkSummary summary;
  summary.reference = reference_model;
  summary.categories.assign(category_set.begin(), category_set.end());
  for (const std::string& model : model_set) {
    ModelSummary ms;
    ms.model = model;
    for (const std::string& category : summary.categories) {
      ms.category_ce[category] = cell_mean(model, category);
    }
    summary.models.push_back(std::move(ms));
  }

  for (const std::string& category : summary.categories) {
    double best = std::numeric_limits<double>::infinity();
    for (const ModelSummary& ms : summary.models) {
      best = std::min(best, ms.category_ce.at(category));
    }
    for (ModelSummary& ms : summary.models) {
      if (ms.category_ce.at(category) <= best + kWinTie) ++ms.wins;
    }
  }

  const auto category_mean = [&](const ModelSummary& ms) {
    double sum = 0.0;
    for (const auto& [category, ce] : ms.category_ce) sum += ce;
    return sum / static_cast<double>(ms.category_ce.size());
  };
  const ModelSummary* reference = nullptr;
  for (const ModelSummary& ms : summary.models) {
    if (ms.model == reference_model) reference = &ms;
  }
  const double reference_mean = category_mean(*reference);

  for (ModelSummary& ms : summary.models) {
    if (ms.model == reference_model) {
      ms.relative_loss_pct = 0.0;
      continue;
    }
    if (mode == RelativeLossMode::ratio_of_means) {
      ms.relative_loss_pct = 100.0 * (category_mean(ms) / reference_mean - 1.0);
    } else {
      double ratio_sum = 0.0;
      for (const auto& [category, ce] : ms.category_ce) {
        ratio_sum += ce / reference->category_ce.at(category);
      }
      ms.relative_loss_pct =
          100.0 * (ratio_sum / static_cast<double>(ms.category_ce.size()) - 1.0);
    }
  }
  return summary;
}

namespace {

constexpr char kReportsHeader[] =
    "model,dataset,seed,train_ce,test_ce,kl_to_truth,param_error_f2,param_error_l1";

std::string optional_field(const std::optional<double>& value) {
  return value ? format_double(*value) : std::string();
}

std::optional<double> parse_optional_field(const std::string& field) {
  if (field.empty()) return std::nullopt;
  return std::stod(field);
}

}  // namespace

void write_reports_csv(const std::vector<EvalReport>& reports,
                       const std::filesystem::path& path) {
  std::ostringstream out;
  out << kReportsHeader << '\n';
  for (const EvalReport& r : reports) {
    out << r.model_name << ',' << r.dataset_name << ',' << r.seed << ','
        << format_double(r.train_ce) << ',' << format_double(r.test_ce) << ','
        << optional_field(r.kl_to_truth) << ',' << optional_field(r.param_error_f2) << ','
        << optional_field(r.param_error_l1) << '\n';
  }
  write_text_file(path, out.str());
}

std::vector<EvalReport> read_reports_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) != split_csv_line(kReportsHeader)) {
    throw std::invalid_argument(path.string() + ": bad reports header");
  }
  std::vector<EvalReport> reports;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != 8) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) +
                                  ": expected 8 fields");
    }
    try {
      EvalReport r;
      r.model_name = fields[0];
      r.dataset_name = fields[1];
      r.seed = std::stoll(fields[2]);
      r.train_ce = std::stod(fields[3]);
      r.test_ce = std::stod(fields[4]);
      r.kl_to_truth = parse_optional_field(fields[5]);
      r.param_error_f2 = parse_optional_field(fields[6]);
      r.param_error_l1 = parse_optional_field(fields[7]);
      reports.push_back(std::move(r));
    } catch (const std::exception&) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) +
                                  ": malformed report row");
    }
  }
  return reports;
}

void write_summary_json(const BenchmarkSummary& summary, const std::filesystem::path& path) {
  nlohmann::json models = nlohmann::json::object();
  for (const ModelSummary& ms : summary.models) {
    nlohmann::json per_category = nlohmann::json::object();
    for (const auto& [category, ce] : ms.category_ce) per_category[category] = ce;
    models[ms.model] = {{"wins", ms.wins},
                        {"relative_loss_pct", ms.relative_loss_pct},
                        {"category_ce", per_category}};
  }
  nlohmann::json root = {{"reference", summary.reference},
                         {"categories", summary.categories},
                         {"models", models}};
  write_text_file(path, root.dump(2) + "\n");
}

}  // namespace halomnl
