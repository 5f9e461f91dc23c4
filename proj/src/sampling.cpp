#include "hcdir/sampling.hpp"

#include <algorithm>

#include "hcdir/rng.hpp"

namespace hcdir {

std::vector<int> sample_negatives(const std::vector<char>& is_positive, int k,
                                  std::mt19937_64& rng, bool* truncated) {
  std::vector<int> pool;
  for (size_t i = 0; i < is_positive.size(); ++i)
    if (!is_positive[i]) pool.push_back(static_cast<int>(i));
  if (truncated) *truncated = static_cast<int>(pool.size()) < k;
  if (static_cast<int>(pool.size()) <= k) return pool;
  std::vector<int> out;
  out.reserve(k);
  std::sample(pool.begin(), pool.end(), std::back_inserter(out), k, rng);
  return out;
}

std::vector<int> negative_sample(const std::vector<Interaction>& log, int user, int n_items,
                                 int k, uint64_t seed, bool* truncated) {
  if (k < 0) throw ContractError("negative sample count must be non-negative");
  std::vector<char> positive(n_items, 0);
  int positives = 0;
  for (const auto& it : log)
    if (it.user == user && !positive[it.item]) {
      positive[it.item] = 1;
      ++positives;
    }
  if (positives >= n_items) throw ContractError("user has interacted with every item");
  auto rng = substream(seed, "negative-sample");
  return sample_negatives(positive, k, rng, truncated);
}

}  // namespace hcdir
