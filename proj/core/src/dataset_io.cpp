#include "halomnl/dataset_io.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "halomnl/rng.hpp"

namespace halomnl {

namespace {

using nlohmann::json;

[[noreturn]] void fail_line(const std::filesystem::path& path, std::size_t line_no,
                            const std::string& what) {
  throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + what);
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::filesystem::path& path, std::size_t line_no) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) fail_line(path, line_no, "unknown key \"" + item.key() + "\"");
  }
}

}  // namespace

ChoiceDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }

  std::string line;
  std::size_t line_no = 0;

  // Header line.
  if (!std::getline(in, line)) {
    throw std::runtime_error(path.string() + ": missing header line");
  }
  ++line_no;
  json header;
  try {
    header = json::parse(line);
  } catch (const json::parse_error& e) {
    fail_line(path, line_no, std::string("parse error: ") + e.what());
  }
  if (!header.is_object()) fail_line(path, line_no, "header must be a JSON object");
  reject_unknown_keys(header, {"num_products", "outside_option"}, path, line_no);
  if (!header.contains("num_products") || !header["num_products"].is_number_integer()) {
    fail_line(path, line_no, "header needs integer \"num_products\"");
  }
  if (!header.contains("outside_option") || !header["outside_option"].is_boolean()) {
    fail_line(path, line_no, "header needs boolean \"outside_option\"");
  }
  const int m = header["num_products"].get<int>();
  const bool outside_option = header["outside_option"].get<bool>();
  if (m <= 0) fail_line(path, line_no, "num_products must be positive");

  std::vector<Transaction> transactions;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::size_t index = transactions.size();
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      fail_line(path, line_no, std::string("parse error: ") + e.what());
    }
    if (!rec.is_object()) fail_line(path, line_no, "transaction must be a JSON object");
    reject_unknown_keys(rec, {"a", "y"}, path, line_no);
    if (!rec.contains("a") || !rec["a"].is_array()) {
      fail_line(path, line_no, "transaction needs array \"a\"");
    }
    if (!rec.contains("y") || !rec["y"].is_number_integer()) {
      fail_line(path, line_no, "transaction needs integer \"y\"");
    }

    std::vector<int> offered;
    int previous = -1;
    for (const auto& v : rec["a"]) {
      if (!v.is_number_integer()) fail_line(path, line_no, "assortment entries must be integers");
      const int idx = v.get<int>();
      if (idx < 0 || idx >= m) {
        fail_line(path, line_no, "transaction " + std::to_string(index) + ": product index " +
                                     std::to_string(idx) + " >= num_products " + std::to_string(m));
      }
      if (idx <= previous) {
        fail_line(path, line_no, "assortment indices must be strictly ascending");
      }
      previous = idx;
      offered.push_back(idx);
    }
    if (offered.empty()) {
      fail_line(path, line_no, "transaction " + std::to_string(index) + ": empty assortment");
    }
    const int choice = rec["y"].get<int>();
    if (choice < 0 || choice >= m) {
      fail_line(path, line_no, "transaction " + std::to_string(index) + ": choice index " +
                                   std::to_string(choice) + " >= num_products " +
                                   std::to_string(m));
    }

    try {
      transactions.emplace_back(Assortment::from_indices(m, offered), choice);
    } catch (const std::invalid_argument& e) {
      fail_line(path, line_no, "transaction " + std::to_string(index) + ": " + e.what());
    }
  }

  try {
    return ChoiceDataset(m, std::move(transactions), outside_option);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void save_dataset(const ChoiceDataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open " + path.string() + " for writing");
  }

  json header;
  header["num_products"] = dataset.num_products();
  header["outside_option"] = dataset.outside_option();
  out << header.dump() << '\n';

  for (const Transaction& t : dataset.transactions()) {
    json rec;
    rec["a"] = t.assortment().offered_indices();
    rec["y"] = t.choice();
    out << rec.dump() << '\n';
  }
  out.flush();
  if (!out.good()) {
    throw std::runtime_error("write failure on " + path.string());
  }
}

std::pair<ChoiceDataset, ChoiceDataset> split_dataset(const ChoiceDataset& dataset,
                                                      double train_fraction,
                                                      std::int64_t seed) {
  const std::size_t n = dataset.size();
  if (n < 2) {
    throw std::invalid_argument("split requires at least 2 transactions");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);

  const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
  std::vector<Transaction> train;
  std::vector<Transaction> test;
  train.reserve(n_train);
  test.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    const Transaction& t = dataset.transactions()[order[i]];
    (i < n_train ? train : test).push_back(t);
  }
  return {ChoiceDataset(dataset.num_products(), std::move(train), dataset.outside_option()),
          ChoiceDataset(dataset.num_products(), std::move(test), dataset.outside_option())};
}

}  // namespace halomnl
