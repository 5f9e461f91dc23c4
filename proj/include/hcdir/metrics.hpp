#pragma once

#include <Eigen/Dense>
#include <unordered_set>
#include <vector>

#include "hcdir/types.hpp"

namespace hcdir {

// Ranks item ids by descending score, ties broken by ascending item id.
std::vector<int> rank_by_score(const Eigen::VectorXd& scores);

// Binary-relevance NDCG over the full ranked list. `cutoff` <= 0 means no
// truncation. Throws ContractError when the relevant set is empty.
double ndcg(const std::vector<int>& ranked, const std::unordered_set<int>& relevant,
            int cutoff = 0);

// |relevant ∩ top-N| / |relevant|.
double recall_at_n(const std::vector<int>& ranked, const std::unordered_set<int>& relevant,
                   int n);

}  // namespace hcdir
