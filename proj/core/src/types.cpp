#include "halomnl/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace halomnl {

Assortment::Assortment(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  if (bits_.empty()) {
    throw std::invalid_argument("assortment has zero products");
  }
  bool any = false;
  for (std::uint8_t b : bits_) {
    if (b > 1) {
      throw std::invalid_argument("assortment bits must be 0 or 1");
    }
    any = any || b == 1;
  }
  if (!any) {
    throw std::invalid_argument("empty assortment");
  }
}

Assortment Assortment::from_indices(int num_products, const std::vector<int>& offered) {
  if (num_products <= 0) {
    throw std::invalid_argument("num_products must be positive");
  }
  std::vector<std::uint8_t> bits(static_cast<std::size_t>(num_products), 0);
  int previous = -1;
  for (int idx : offered) {
    if (idx < 0 || idx >= num_products) {
      throw std::invalid_argument("product index " + std::to_string(idx) +
                                  " outside [0, " + std::to_string(num_products) + ")");
    }
    if (idx <= previous) {
      throw std::invalid_argument("offered indices must be strictly ascending");
    }
    previous = idx;
    bits[static_cast<std::size_t>(idx)] = 1;
  }
  return Assortment(std::move(bits));
}

Assortment Assortment::full(int num_products) {
  if (num_products <= 0) {
    throw std::invalid_argument("num_products must be positive");
  }
  return Assortment(std::vector<std::uint8_t>(static_cast<std::size_t>(num_products), 1));
}

int Assortment::offered_count() const {
  return static_cast<int>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<int> Assortment::offered_indices() const {
  std::vector<int> out;
  out.reserve(bits_.size());
  for (int i = 0; i < size(); ++i) {
    if (bits_[static_cast<std::size_t>(i)]) out.push_back(i);
  }
  return out;
}

Eigen::VectorXd Assortment::indicator() const {
  Eigen::VectorXd a(size());
  for (int i = 0; i < size(); ++i) {
    a[i] = bits_[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  }
  return a;
}

Transaction::Transaction(Assortment assortment, int choice)
    : assortment_(std::move(assortment)), choice_(choice) {
  if (choice_ < 0 || choice_ >= assortment_.size()) {
    throw std::invalid_argument("choice index " + std::to_string(choice_) +
                                " outside [0, " + std::to_string(assortment_.size()) + ")");
  }
  if (!assortment_.offered(choice_)) {
    throw std::invalid_argument("choice not in assortment");
  }
}

ChoiceDataset::ChoiceDataset(int num_products, std::vector<Transaction> transactions,
                             bool outside_option)
    : num_products_(num_products),
      outside_option_(outside_option),
      transactions_(std::move(transactions)) {
  if (num_products_ <= 0) {
    throw std::invalid_argument("num_products must be positive");
  }
  for (std::size_t i = 0; i < transactions_.size(); ++i) {
    const Transaction& t = transactions_[i];
    if (t.assortment().size() != num_products_) {
      throw std::invalid_argument("transaction " + std::to_string(i) + ": assortment over " +
                                  std::to_string(t.assortment().size()) +
                                  " products, dataset declares " + std::to_string(num_products_));
    }
    if (outside_option_ && !t.assortment().offered(0)) {
      throw std::invalid_argument("transaction " + std::to_string(i) +
                                  ": outside option (product 0) missing from assortment");
    }
  }
}

ChoiceProbabilities::ChoiceProbabilities(Eigen::VectorXd probs, const Assortment& support)
    : probs_(std::move(probs)) {
  if (probs_.size() != support.size()) {
    throw std::invalid_argument("probability vector length does not match assortment");
  }
  double sum = 0.0;
  for (int i = 0; i < probs_.size(); ++i) {
    const double p = probs_[i];
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw std::invalid_argument("probability entry " + std::to_string(i) + " outside [0, 1]");
    }
    if (!support.offered(i) && p != 0.0) {
      throw std::invalid_argument("nonzero probability for unoffered product " + std::to_string(i));
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("probabilities sum to " + std::to_string(sum) + ", expected 1");
  }
}

}  // namespace halomnl
