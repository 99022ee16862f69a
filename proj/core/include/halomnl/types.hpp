#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace halomnl {

/// Subset of the m products offered to a customer, encoded as a 0/1 vector.
/// Invariant: at least one product is offered.
class Assortment {
 public:
  explicit Assortment(std::vector<std::uint8_t> bits);

  /// Build from the sorted list of offered product indices.
  static Assortment from_indices(int num_products, const std::vector<int>& offered);

  /// Full assortment over [0, num_products).
  static Assortment full(int num_products);

  int size() const { return static_cast<int>(bits_.size()); }
  bool offered(int product) const { return bits_[static_cast<std::size_t>(product)] != 0; }
  int offered_count() const;
  std::vector<int> offered_indices() const;

  const std::vector<std::uint8_t>& bits() const { return bits_; }

  /// The assortment as a dense 0/1 vector (the symbol `a` in the model formulas).
  Eigen::VectorXd indicator() const;

  bool operator==(const Assortment& other) const { return bits_ == other.bits_; }
  bool operator!=(const Assortment& other) const { return !(*this == other); }

 private:
  std::vector<std::uint8_t> bits_;
};

/// One observed purchase: the assortment shown and the product chosen from it.
/// Invariant: the chosen product is offered.
class Transaction {
 public:
  Transaction(Assortment assortment, int choice);

  const Assortment& assortment() const { return assortment_; }
  int choice() const { return choice_; }

  bool operator==(const Transaction& other) const {
    return choice_ == other.choice_ && assortment_ == other.assortment_;
  }
  bool operator!=(const Transaction& other) const { return !(*this == other); }

 private:
  Assortment assortment_;
  int choice_;
};

/// An ordered collection of transactions over a fixed product universe.
///
/// If outside_option is set, product 0 stands for "no purchase" and must be
/// offered in every assortment. Models treat it as an ordinary product; the
/// flag is dataset metadata only.
class ChoiceDataset {
 public:
  ChoiceDataset(int num_products, std::vector<Transaction> transactions,
                bool outside_option = false);

  int num_products() const { return num_products_; }
  bool outside_option() const { return outside_option_; }
  const std::vector<Transaction>& transactions() const { return transactions_; }
  std::size_t size() const { return transactions_.size(); }
  bool empty() const { return transactions_.empty(); }

  bool operator==(const ChoiceDataset& other) const {
    return num_products_ == other.num_products_ &&
           outside_option_ == other.outside_option_ &&
           transactions_ == other.transactions_;
  }

 private:
  int num_products_;
  bool outside_option_;
  std::vector<Transaction> transactions_;
};

/// A distribution over products conditioned on an assortment.
/// Invariants: entries sum to 1 within 1e-9 and are exactly 0 off-assortment.
class ChoiceProbabilities {
 public:
  ChoiceProbabilities(Eigen::VectorXd probs, const Assortment& support);

  const Eigen::VectorXd& values() const { return probs_; }
  double operator[](int product) const { return probs_[product]; }
  int size() const { return static_cast<int>(probs_.size()); }

 private:
  Eigen::VectorXd probs_;
};

}  // namespace halomnl
