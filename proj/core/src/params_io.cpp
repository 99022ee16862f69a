#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "halomnl/io_util.hpp"
#include "halomnl/models.hpp"

namespace halomnl {

namespace {

using nlohmann::json;

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

json matrix_to_json_row_major(const Eigen::MatrixXd& m) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) arr.push_back(m(i, j));
  }
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr, const char* what) {
  if (!arr.is_array()) throw std::runtime_error(std::string(what) + " must be an array");
  Eigen::VectorXd v(arr.size());
  Eigen::Index i = 0;
  for (const auto& x : arr) {
    if (!x.is_number()) throw std::runtime_error(std::string(what) + " entries must be numbers");
    v[i++] = x.get<double>();
  }
  return v;
}

Eigen::MatrixXd matrix_from_json_row_major(const json& arr, Eigen::Index rows, Eigen::Index cols,
                                           const char* what) {
  const Eigen::VectorXd flat = vector_from_json(arr, what);
  if (flat.size() != rows * cols) {
    throw std::runtime_error(std::string(what) + " has length " + std::to_string(flat.size()) +
                             ", expected " + std::to_string(rows * cols));
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = flat[i * cols + j];
  }
  return m;
}

}  // namespace

std::string params_to_json(const ModelParams& params) {
  json out;
  out["model"] = model_name(params);
  struct Visitor {
    json& out;
    void operator()(const MnlParams& p) const { out["alpha"] = vector_to_json(p.alpha()); }
    void operator()(const MixtureMnlParams& p) const {
      out["weights_logits"] = vector_to_json(p.weights_logits());
      json comps = json::array();
      for (const MnlParams& c : p.components()) comps.push_back(vector_to_json(c.alpha()));
      out["alphas"] = comps;
    }
    void operator()(const HaloParams& p) const {
      out["m"] = p.num_products();
      out["h"] = matrix_to_json_row_major(p.h());
    }
    void operator()(const LowRankHaloParams& p) const {
      out["alpha"] = vector_to_json(p.alpha());
      out["rank"] = p.rank();
      out["u"] = matrix_to_json_row_major(p.u());
      out["v"] = matrix_to_json_row_major(p.v());
      out["diag_mode"] = to_string(p.diag_mode());
    }
  };
  std::visit(Visitor{out}, params);
  return out.dump();
}

ModelParams params_from_json(const std::string& text) {
  json in;
  try {
    in = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("parameter JSON parse error: ") + e.what());
  }
  if (!in.is_object() || !in.contains("model") || !in["model"].is_string()) {
    throw std::runtime_error("parameter JSON needs a \"model\" string");
  }
  const std::string name = in["model"].get<std::string>();
  if (name == "mnl") {
    return MnlParams(vector_from_json(in.at("alpha"), "alpha"));
  }
  if (name == "mixture") {
    const Eigen::VectorXd w = vector_from_json(in.at("weights_logits"), "weights_logits");
    std::vector<MnlParams> comps;
    for (const auto& arr : in.at("alphas")) {
      comps.emplace_back(vector_from_json(arr, "alphas entry"));
    }
    return MixtureMnlParams(w, std::move(comps));
  }
  if (name == "halo") {
    const auto m = in.at("m").get<Eigen::Index>();
    return HaloParams(matrix_from_json_row_major(in.at("h"), m, m, "h"));
  }
  if (name == "lowrank") {
    const Eigen::VectorXd alpha = vector_from_json(in.at("alpha"), "alpha");
    const auto rank = in.at("rank").get<Eigen::Index>();
    const Eigen::Index m = alpha.size();
    return LowRankHaloParams(alpha, matrix_from_json_row_major(in.at("u"), m, rank, "u"),
                             matrix_from_json_row_major(in.at("v"), m, rank, "v"),
                             diag_mode_from_string(in.at("diag_mode").get<std::string>()));
  }
  throw std::runtime_error("unknown model \"" + name + "\"");
}

void save_params(const ModelParams& params, const std::filesystem::path& path) {
  write_text_file(path, params_to_json(params) + "\n");
}

ModelParams load_params(const std::filesystem::path& path) {
  return params_from_json(read_text_file(path));
}

}  // namespace halomnl
