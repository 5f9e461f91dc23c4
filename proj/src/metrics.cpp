#include "hcdir/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hcdir {

std::vector<int> rank_by_score(const Eigen::VectorXd& scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return order;
}

double ndcg(const std::vector<int>& ranked, const std::unordered_set<int>& relevant,
            int cutoff) {
  if (relevant.empty()) throw ContractError("ndcg requires a non-empty relevant set");
  size_t depth = cutoff > 0 ? std::min<size_t>(cutoff, ranked.size()) : ranked.size();
  double dcg = 0;
  for (size_t i = 0; i < depth; ++i)
    if (relevant.count(ranked[i])) dcg += 1.0 / std::log2(double(i) + 2.0);
  size_t ideal = cutoff > 0 ? std::min<size_t>(cutoff, relevant.size()) : relevant.size();
  double idcg = 0;
  for (size_t i = 0; i < ideal; ++i) idcg += 1.0 / std::log2(double(i) + 2.0);
  return dcg / idcg;
}

double recall_at_n(const std::vector<int>& ranked, const std::unordered_set<int>& relevant,
                   int n) {
  if (relevant.empty()) throw ContractError("recall requires a non-empty relevant set");
  if (n < 1) throw ContractError("recall cutoff must be >= 1");
  size_t depth = std::min<size_t>(n, ranked.size());
  int hits = 0;
  for (size_t i = 0; i < depth; ++i)
    if (relevant.count(ranked[i])) ++hits;
  return double(hits) / double(relevant.size());
}

}  // namespace hcdir
