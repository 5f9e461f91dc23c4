#pragma once

#include <cstdint>
#include <vector>

#include "hcdir/dataset.hpp"

namespace hcdir {

// Fraction of the group whose FIRST purchase falls inside [start, end).
double group_buy_ratio(const std::vector<int>& group, const std::vector<Interaction>& purchases,
                       int64_t window_start, int64_t window_end);

// Percentile slice over agents ranked by communication frequency, descending.
// {0.0, 0.05} is the top-5% band, {0.10, 0.15} the top-15% band.
struct PercentileBand {
  double lo = 0.0;
  double hi = 0.05;
};

// Among users who consulted an agent in the band: the fraction that purchased
// anything after one of their consults.
double ask_buy_ratio(const std::vector<Interaction>& consults,
                     const std::vector<Interaction>& purchases, int n_agents,
                     const PercentileBand& band);

// Agent ids inside the band, ranked by total consult events (desc, id asc).
std::vector<int> agents_in_band(const std::vector<Interaction>& consults, int n_agents,
                                const PercentileBand& band);

}  // namespace hcdir
