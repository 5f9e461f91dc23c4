#include "hcdir/analytics.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace hcdir {

double group_buy_ratio(const std::vector<int>& group, const std::vector<Interaction>& purchases,
                       int64_t window_start, int64_t window_end) {
  if (group.empty()) throw ContractError("group-buy-ratio requires a non-empty group");
  std::unordered_map<int, int64_t> first_buy;
  for (const auto& p : purchases) {
    auto it = first_buy.find(p.user);
    if (it == first_buy.end() || p.ts < it->second) first_buy[p.user] = p.ts;
  }
  int count = 0;
  for (int u : group) {
    auto it = first_buy.find(u);
    if (it != first_buy.end() && it->second >= window_start && it->second < window_end) ++count;
  }
  return double(count) / double(group.size());
}

std::vector<int> agents_in_band(const std::vector<Interaction>& consults, int n_agents,
                                const PercentileBand& band) {
  if (band.lo < 0 || band.hi > 1.0 || band.lo >= band.hi)
    throw ContractError("percentile band must satisfy 0 <= lo < hi <= 1");
  std::vector<int64_t> freq(n_agents, 0);
  for (const auto& c : consults) {
    if (c.item < 0 || c.item >= n_agents) throw BoundsError("consult references unknown agent");
    freq[c.item]++;
  }
  std::vector<int> order(n_agents);
  for (int a = 0; a < n_agents; ++a) order[a] = a;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (freq[a] != freq[b]) return freq[a] > freq[b];
    return a < b;
  });
  int lo = static_cast<int>(band.lo * n_agents);
  int hi = static_cast<int>(band.hi * n_agents);
  if (lo >= hi) throw ContractError("percentile band selects no agents");
  return std::vector<int>(order.begin() + lo, order.begin() + hi);
}

double ask_buy_ratio(const std::vector<Interaction>& consults,
                     const std::vector<Interaction>& purchases, int n_agents,
                     const PercentileBand& band) {
  auto band_agents = agents_in_band(consults, n_agents, band);
  std::vector<char> in_band(n_agents, 0);
  for (int a : band_agents) in_band[a] = 1;

  // earliest consult per user to an in-band agent
  std::unordered_map<int, int64_t> first_consult;
  for (const auto& c : consults) {
    if (!in_band[c.item]) continue;
    auto it = first_consult.find(c.user);
    if (it == first_consult.end() || c.ts < it->second) first_consult[c.user] = c.ts;
  }
  if (first_consult.empty()) throw ContractError("no consulters in the requested band");

  std::unordered_map<int, int64_t> last_buy;
  for (const auto& p : purchases) {
    auto it = last_buy.find(p.user);
    if (it == last_buy.end() || p.ts > it->second) last_buy[p.user] = p.ts;
  }
  int buyers = 0;
  for (const auto& [u, t_consult] : first_consult) {
    auto it = last_buy.find(u);
    if (it != last_buy.end() && it->second >= t_consult) ++buyers;
  }
  return double(buyers) / double(first_consult.size());
}

}  // namespace hcdir
