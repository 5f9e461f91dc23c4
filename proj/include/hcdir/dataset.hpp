#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hcdir/graph.hpp"

namespace hcdir {

struct Interaction {
  int user;
  int item;  // target item, source item, or agent depending on the log
  int64_t ts;
};

// A loaded two-domain dataset: the insurance graph plus the raw implicit
// feedback logs of both domains.
struct Dataset {
  HeteroGraph graph;

  std::vector<Interaction> target;    // user -> insurance item purchases
  std::vector<Interaction> source;    // user -> source item interactions
  std::vector<Interaction> consults;  // user -> agent consult events (may be empty)

  int n_source_items = 0;
  std::vector<std::string> source_item_text;  // indexed by source item id

  // External string ids in dense-index order.
  std::array<std::vector<std::string>, kNumNodeTypes> node_keys;
  std::vector<std::string> source_item_keys;
};

Dataset load_dataset(const std::filesystem::path& dir);

// Per-user sequences ordered by ascending timestamp, ties by item id.
std::vector<std::vector<int>> user_sequences(const std::vector<Interaction>& log, int n_users);

// Users with at least one interaction in both logs, ascending ids.
std::vector<int> overlap_users(const Dataset& d);

struct SplitSpec {
  double train_ratio = 0.6;
  double valid_ratio = 0.2;
  double test_ratio = 0.2;
  double eta = 1.0;  // fraction of non-test overlap users whose target data is retained
  uint64_t seed = 1;
};

struct Split {
  std::vector<int> train_users, valid_users, test_users;      // overlap users
  std::vector<int> retained_train, retained_valid;            // eta-retained subsets
  double eta = 1.0;
  uint64_t seed = 1;

  std::string to_json() const;
  static Split from_json(const std::string& text);
};

// User-level seeded split of the overlap users. Test users' target-domain
// interactions are removed from every training artifact; eta retains per
// stratum (train, valid) the given fraction of the remaining overlap users.
Split split_dataset(const Dataset& d, const SplitSpec& spec);

// True at u when user u's target interactions stay in training artifacts.
std::vector<char> target_retention_mask(const Dataset& d, const Split& s);

// The graph used by every training stage: purchase edges restricted to
// retained users; all other relations untouched.
HeteroGraph build_training_graph(const Dataset& d, const Split& s);

std::vector<Interaction> training_target_interactions(const Dataset& d, const Split& s);

}  // namespace hcdir
