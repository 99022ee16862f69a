#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>

#include "halomnl/types.hpp"

namespace halomnl {

/// Load a transaction file (UTF-8 JSON Lines).
///
/// Line 1 is the header {"num_products": <int>, "outside_option": <bool>};
/// every following line is {"a": [<ascending offered indices>], "y": <choice>}.
/// Unknown keys are rejected. Parse errors report the line number; invariant
/// violations report the offending transaction index.
ChoiceDataset load_dataset(const std::filesystem::path& path);

/// Write a dataset in the same JSON Lines format. load(save(d)) == d exactly.
void save_dataset(const ChoiceDataset& dataset, const std::filesystem::path& path);

/// Seeded uniform shuffle split at floor(train_fraction * n).
/// The two halves are disjoint by position and jointly exhaust the input.
/// Requires at least 2 transactions and train_fraction in (0, 1).
std::pair<ChoiceDataset, ChoiceDataset> split_dataset(const ChoiceDataset& dataset,
                                                      double train_fraction,
                                                      std::int64_t seed);

}  // namespace halomnl
