#pragma once

#include <random>
#include <vector>

#include "hcdir/dataset.hpp"

namespace hcdir {

// Uniform sample without replacement from the items NOT marked positive.
// Returns all negatives (and sets *truncated) when fewer than k exist.
std::vector<int> sample_negatives(const std::vector<char>& is_positive, int k,
                                  std::mt19937_64& rng, bool* truncated = nullptr);

// Contract-level wrapper over an interaction log.
std::vector<int> negative_sample(const std::vector<Interaction>& log, int user, int n_items,
                                 int k, uint64_t seed, bool* truncated = nullptr);

}  // namespace hcdir
