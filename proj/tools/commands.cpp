#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <halomnl/dataset_io.hpp>
#include <halomnl/io_util.hpp>
#include <halomnl/models.hpp>

namespace halomnl::tools {

namespace fs = std::filesystem;

namespace {

void ensure_out_dir(const fs::path& out_dir) {
  if (out_dir.empty()) throw std::invalid_argument("--out directory is required");
  fs::create_directories(out_dir);
}

double parse_csv_double(const std::string& field, const fs::path& path, std::size_t line_no) {
  try {
    std::size_t consumed = 0;
    const double value = std::stod(field, &consumed);
    if (consumed != field.size()) throw std::invalid_argument(field);
    return value;
  } catch (const std::exception&) {
    throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) +
                                ": bad numeric field '" + field + "'");
  }
}

// category_name,dataset_path rows; an optional header line is skipped.
// Relative dataset paths resolve against the manifest's directory.
std::vector<std::pair<std::string, fs::path>> read_manifest(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<std::pair<std::string, fs::path>> categories;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (line_no == 1 && fields == std::vector<std::string>{"category_name", "dataset_path"}) {
      continue;
    }
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) +
                                  ": expected category_name,dataset_path");
    }
    fs::path dataset(fields[1]);
    if (dataset.is_relative()) dataset = path.parent_path() / dataset;
    categories.emplace_back(fields[0], std::move(dataset));
  }
  if (categories.empty()) {
    throw std::invalid_argument(path.string() + ": manifest lists no categories");
  }
  return categories;
}

// category_name,model_name,test_ce rows with externally computed baselines.
std::vector<EvalReport> read_sidecar(const fs::path& path) {
  std::istringstream in(read_text_file(path));
  std::vector<EvalReport> reports;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (line_no == 1 &&
        fields == std::vector<std::string>{"category_name", "model_name", "test_ce"}) {
      continue;
    }
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty()) {
      throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) +
                                  ": expected category_name,model_name,test_ce");
    }
    EvalReport r;
    r.dataset_name = fields[0];
    r.model_name = fields[1];
    r.test_ce = parse_csv_double(fields[2], path, line_no);
    r.train_ce = r.test_ce;  // sidecars carry no train CE; never written to reports.csv
    reports.push_back(std::move(r));
  }
  return reports;
}

}  // namespace

void cmd_generate(const GenerateOptions& options, std::ostream& log) {
  options.spec.validate();
  if (options.name.empty()) throw std::invalid_argument("--name must be nonempty");
  ensure_out_dir(options.out_dir);

  const LowRankHaloParams truth = sample_ground_truth(options.spec);
  const std::vector<Assortment> assortments = sample_assortments(options.spec);
  const ChoiceDataset dataset = sample_choices(truth, assortments, options.spec.seed);

  const fs::path dataset_path = options.out_dir / (options.name + ".jsonl");
  const fs::path truth_path = options.out_dir / (options.name + ".truth.json");
  save_dataset(dataset, dataset_path);
  save_params(ModelParams(truth), truth_path);

  log << "generated n=" << options.spec.n << " m=" << options.spec.m
      << " r=" << options.spec.rank << " seed=" << options.spec.seed << '\n'
      << "wrote " << dataset_path.string() << '\n'
      << "wrote " << truth_path.string() << '\n';
}

void cmd_fit(const FitOptions& options, std::ostream& log) {
  options.config.validate();
  ensure_out_dir(options.out_dir);

  const ChoiceDataset dataset = load_dataset(options.dataset);
  const FitResult result = fit(options.family, dataset, options.config);

  save_params(result.params, options.out_dir / "params.json");
  save_trace_csv(result, options.out_dir / "trace.csv");
  save_fit_config(options.config, options.out_dir / "fit_config.txt");

  const EpochRecord& last = result.trace.back();
  log << "family=" << to_string(options.family) << " epochs_run=" << result.epochs_run
      << (result.converged ? " (early stop)" : "") << '\n'
      << "final train_objective=" << format_double(last.train_objective)
      << " val_ce=" << format_double(last.val_ce) << '\n';
}

void cmd_benchmark(const BenchmarkOptions& options, std::ostream& log) {
  options.config.validate();
  if (options.models.empty()) throw std::invalid_argument("--models must list at least one model");
  if (options.seeds < 1) throw std::invalid_argument("--seeds must be positive");
  std::vector<ModelFamily> families;
  families.reserve(options.models.size());
  for (const std::string& name : options.models) families.push_back(family_from_string(name));
  if (std::set<std::string>(options.models.begin(), options.models.end()).size() !=
      options.models.size()) {
    throw std::invalid_argument("--models contains duplicates");
  }
  ensure_out_dir(options.out_dir);

  const auto categories = read_manifest(options.manifest);
  std::vector<EvalReport> fitted_reports;
  for (const auto& [category, dataset_path] : categories) {
    const ChoiceDataset dataset = load_dataset(dataset_path);
    for (int seed = 0; seed < options.seeds; ++seed) {
      const auto [train, test] = split_dataset(dataset, options.train_fraction, seed);
      for (std::size_t i = 0; i < families.size(); ++i) {
        FitConfig config = options.config;
        config.seed = seed;
        const FitResult result = fit(families[i], train, config);
        EvalReport report;
        report.model_name = options.models[i];
        report.dataset_name = category;
        report.seed = seed;
        report.train_ce = cross_entropy(result.params, train);
        report.test_ce = cross_entropy(result.params, test);
        log << "category=" << category << " seed=" << seed << " model=" << options.models[i]
            << " test_ce=" << format_double(report.test_ce) << '\n';
        fitted_reports.push_back(std::move(report));
      }
    }
  }

  write_reports_csv(fitted_reports, options.out_dir / "reports.csv");

  std::vector<EvalReport> all_reports = fitted_reports;
  if (!options.sidecar.empty()) {
    std::vector<EvalReport> sidecar = read_sidecar(options.sidecar);
    all_reports.insert(all_reports.end(), std::make_move_iterator(sidecar.begin()),
                       std::make_move_iterator(sidecar.end()));
  }
  const std::string reference =
      options.reference.empty() ? options.models.front() : options.reference;
  const BenchmarkSummary summary =
      summarize_benchmark(all_reports, reference, options.loss_mode);
  write_summary_json(summary, options.out_dir / "summary.json");

  log << "fits=" << fitted_reports.size() << " reference=" << reference << '\n';
  for (const ModelSummary& ms : summary.models) {
    log << "model=" << ms.model << " wins=" << ms.wins
        << " relative_loss_pct=" << format_double(ms.relative_loss_pct) << '\n';
  }
}

void cmd_scaling(const ScalingOptions& options, std::ostream& log) {
  options.config.validate();
  if (options.m_list.empty() || options.n_list.empty()) {
    throw std::invalid_argument("--m and --n must list at least one value");
  }
  if (options.seeds < 1) throw std::invalid_argument("--seeds must be positive");
  if (options.eval_assortments < 1) {
    throw std::invalid_argument("--eval-assortments must be positive");
  }
  ensure_out_dir(options.out_dir);

  struct Row {
    int m, n, r;
    std::int64_t seed;
    const char* model;
    const char* metric;
    double value;
  };
  std::vector<Row> rows;

  for (const int m : options.m_list) {
    for (int s = 0; s < options.seeds; ++s) {
      SyntheticSpec spec;
      spec.m = m;
      spec.rank = options.rank;
      spec.inclusion_prob = options.inclusion_prob;
      spec.seed = options.seed_base + s;
      spec.n = 1;
      spec.validate();

      const LowRankHaloParams truth = sample_ground_truth(spec);
      const Eigen::MatrixXd truth_h = lowrank_materialize(truth);

      // Fresh assortments, disjoint from the training stream, for the KL metric.
      SyntheticSpec eval_spec = spec;
      eval_spec.n = options.eval_assortments;
      eval_spec.seed = spec.seed + 1000003;
      const std::vector<Assortment> eval_assortments = sample_assortments(eval_spec);

      for (const int n : options.n_list) {
        SyntheticSpec data_spec = spec;
        data_spec.n = n;
        const std::vector<Assortment> assortments = sample_assortments(data_spec);
        const ChoiceDataset dataset = sample_choices(truth, assortments, data_spec.seed);

        const auto record = [&](const char* model, const Eigen::MatrixXd& fitted_h,
                                const ModelParams& fitted) {
          const double f2 = param_recovery_error_f2(fitted_h, truth_h);
          const double l1 = param_recovery_error_l1(fitted_h, truth_h);
          const double kl = kl_to_truth(fitted, truth, eval_assortments);
          rows.push_back({m, n, options.rank, spec.seed, model, "param_error_f2", f2});
          rows.push_back({m, n, options.rank, spec.seed, model, "param_error_l1", l1});
          rows.push_back({m, n, options.rank, spec.seed, model, "kl_to_truth", kl});
          log << "m=" << m << " n=" << n << " seed=" << spec.seed << " model=" << model
              << " param_error_f2=" << format_double(f2)
              << " kl_to_truth=" << format_double(kl) << '\n';
        };

        FitConfig halo_config = options.config;
        halo_config.seed = spec.seed;
        const FitResult halo_fit = fit(ModelFamily::halo, dataset, halo_config);
        record("halo", std::get<HaloParams>(halo_fit.params).h(), halo_fit.params);

        FitConfig lowrank_config = halo_config;
        lowrank_config.rank = options.rank;
        lowrank_config.diag_mode = DiagMode::additive;
        const FitResult lowrank_fit = fit(ModelFamily::lowrank, dataset, lowrank_config);
        record("lowrank", lowrank_materialize(std::get<LowRankHaloParams>(lowrank_fit.params)),
               lowrank_fit.params);
      }
    }
  }

  std::ostringstream csv;
  csv << "m,n,r,seed,model,metric,value\n";
  for (const Row& row : rows) {
    csv << row.m << ',' << row.n << ',' << row.r << ',' << row.seed << ',' << row.model
        << ',' << row.metric << ',' << format_double(row.value) << '\n';
  }
  write_text_file(options.out_dir / "scaling.csv", csv.str());
  log << "wrote " << (options.out_dir / "scaling.csv").string() << " (" << rows.size()
      << " rows)\n";
}

}  // namespace halomnl::tools
