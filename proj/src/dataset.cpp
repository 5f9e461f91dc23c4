#include "hcdir/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_map>

#include "hcdir/io.hpp"
#include "hcdir/rng.hpp"
#include "json.hpp"

namespace hcdir {

namespace {

int64_t parse_i64(const std::string& s, const std::string& where) {
  int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw SchemaError(where + ": '" + s + "' is not an integer");
  return v;
}

struct IdMap {
  std::unordered_map<std::string, int> to_index;
  std::vector<std::string> keys;

  int add(const std::string& key, const std::string& where) {
    auto [it, inserted] = to_index.emplace(key, static_cast<int>(keys.size()));
    if (!inserted) throw SchemaError(where + ": duplicate id '" + key + "'");
    keys.push_back(key);
    return it->second;
  }
  int lookup(const std::string& key, const std::string& where) const {
    auto it = to_index.find(key);
    if (it == to_index.end()) throw BoundsError(where + ": unknown id '" + key + "'");
    return it->second;
  }
};

// nodes_<type>.tsv: id[<TAB>f1,...,fK]
std::pair<IdMap, Eigen::MatrixXd> load_nodes(const std::filesystem::path& file) {
  TsvFile tsv = read_tsv(file, 1);
  IdMap ids;
  std::vector<std::vector<double>> feats;
  for (const auto& row : tsv.rows) {
    ids.add(row[0], file.string());
    if (row.size() >= 2 && !row[1].empty()) {
      std::vector<double> f;
      size_t start = 0;
      const std::string& cell = row[1];
      while (start <= cell.size()) {
        size_t comma = cell.find(',', start);
        std::string tok = cell.substr(start, comma == std::string::npos ? comma : comma - start);
        f.push_back(std::stod(tok));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
      feats.push_back(std::move(f));
    }
  }
  Eigen::MatrixXd table;
  if (!feats.empty()) {
    if (feats.size() != ids.keys.size())
      throw SchemaError(file.string() + ": some rows have features and some do not");
    size_t d = feats[0].size();
    for (const auto& f : feats)
      if (f.size() != d) throw SchemaError(file.string() + ": inconsistent feature width");
    table.resize(d, feats.size());
    for (size_t i = 0; i < feats.size(); ++i)
      for (size_t j = 0; j < d; ++j) table(j, i) = feats[i][j];
  }
  return {std::move(ids), std::move(table)};
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset d;

  std::array<IdMap, kNumNodeTypes> ids;
  std::array<Eigen::MatrixXd, kNumNodeTypes> feats;
  for (int t = 0; t < kNumNodeTypes; ++t) {
    auto file = dir / (std::string("nodes_") + node_type_name(static_cast<NodeType>(t)) + ".tsv");
    std::tie(ids[t], feats[t]) = load_nodes(file);
  }

  std::array<int, kNumNodeTypes> counts;
  for (int t = 0; t < kNumNodeTypes; ++t) counts[t] = static_cast<int>(ids[t].keys.size());

  auto load_relation = [&](RelationKind r, std::vector<Interaction>* log) -> EdgeList {
    const auto& info = relation_info(r);
    auto file = dir / (std::string(info.name) + ".tsv");
    TsvFile tsv = read_tsv(file, 2);
    EdgeList el{r, {}};
    const IdMap& src = ids[static_cast<int>(info.src)];
    const IdMap& dst = ids[static_cast<int>(info.dst)];
    for (const auto& row : tsv.rows) {
      int s = src.lookup(row[0], file.string());
      int t = dst.lookup(row[1], file.string());
      el.edges.emplace_back(s, t);
      if (log) {
        int64_t ts = row.size() >= 3 && !row[2].empty() ? parse_i64(row[2], file.string()) : 0;
        log->push_back({s, t, ts});
      }
    }
    return el;
  };

  std::vector<EdgeList> edges;
  edges.push_back(load_relation(RelationKind::Purchase, &d.target));
  edges.push_back(load_relation(RelationKind::ServedBy, nullptr));
  edges.push_back(load_relation(RelationKind::Possess, nullptr));
  // Reverse relation files are optional; when present they are validated
  // against the forward sides by the graph builder.
  for (RelationKind r : {RelationKind::PurchasedBy, RelationKind::Serve, RelationKind::PossessedBy}) {
    auto file = dir / (std::string(relation_info(r).name) + ".tsv");
    if (std::filesystem::exists(file)) edges.push_back(load_relation(r, nullptr));
  }

  d.graph = HeteroGraph::build(counts, edges, std::move(feats));

  {
    auto file = dir / "item_descriptions.tsv";
    TsvFile tsv = read_tsv(file, 2);
    IdMap src_items;
    for (const auto& row : tsv.rows) {
      src_items.add(row[0], file.string());
      d.source_item_text.push_back(row[1]);
    }
    d.n_source_items = static_cast<int>(src_items.keys.size());
    d.source_item_keys = src_items.keys;

    auto sfile = dir / "source_interactions.tsv";
    TsvFile stsv = read_tsv(sfile, 3);
    for (const auto& row : stsv.rows) {
      int u = ids[static_cast<int>(NodeType::User)].lookup(row[0], sfile.string());
      int i = src_items.lookup(row[1], sfile.string());
      d.source.push_back({u, i, parse_i64(row[2], sfile.string())});
    }
  }

  auto cfile = dir / "consults.tsv";
  if (std::filesystem::exists(cfile)) {
    TsvFile tsv = read_tsv(cfile, 3);
    for (const auto& row : tsv.rows) {
      int u = ids[static_cast<int>(NodeType::User)].lookup(row[0], cfile.string());
      int a = ids[static_cast<int>(NodeType::Agent)].lookup(row[1], cfile.string());
      d.consults.push_back({u, a, parse_i64(row[2], cfile.string())});
    }
  }

  for (int t = 0; t < kNumNodeTypes; ++t) d.node_keys[t] = ids[t].keys;
  return d;
}

std::vector<std::vector<int>> user_sequences(const std::vector<Interaction>& log, int n_users) {
  std::vector<std::vector<std::pair<int64_t, int>>> tmp(n_users);
  for (const auto& it : log) tmp[it.user].emplace_back(it.ts, it.item);
  std::vector<std::vector<int>> out(n_users);
  for (int u = 0; u < n_users; ++u) {
    std::sort(tmp[u].begin(), tmp[u].end());
    out[u].reserve(tmp[u].size());
    for (const auto& [ts, item] : tmp[u]) out[u].push_back(item);
  }
  return out;
}

std::vector<int> overlap_users(const Dataset& d) {
  int n = d.graph.count(NodeType::User);
  std::vector<char> has_src(n, 0), has_tgt(n, 0);
  for (const auto& it : d.source) has_src[it.user] = 1;
  for (const auto& it : d.target) has_tgt[it.user] = 1;
  std::vector<int> out;
  for (int u = 0; u < n; ++u)
    if (has_src[u] && has_tgt[u]) out.push_back(u);
  return out;
}

Split split_dataset(const Dataset& d, const SplitSpec& spec) {
  double sum = spec.train_ratio + spec.valid_ratio + spec.test_ratio;
  if (std::abs(sum - 1.0) > 1e-9) throw ContractError("split ratios must sum to 1");
  if (spec.eta <= 0.0 || spec.eta > 1.0) throw ContractError("eta must be in (0, 1]");

  std::vector<int> overlap = overlap_users(d);
  if (overlap.size() < 25)
    throw ContractError("need at least 25 overlap users, got " + std::to_string(overlap.size()));

  auto rng = substream(spec.seed, "split");
  std::shuffle(overlap.begin(), overlap.end(), rng);

  size_t n = overlap.size();
  size_t n_test = static_cast<size_t>(std::llround(spec.test_ratio * double(n)));
  size_t n_valid = static_cast<size_t>(std::llround(spec.valid_ratio * double(n)));
  size_t n_train = n - n_test - n_valid;

  Split s;
  s.eta = spec.eta;
  s.seed = spec.seed;
  s.train_users.assign(overlap.begin(), overlap.begin() + n_train);
  s.valid_users.assign(overlap.begin() + n_train, overlap.begin() + n_train + n_valid);
  s.test_users.assign(overlap.begin() + n_train + n_valid, overlap.end());
  std::sort(s.train_users.begin(), s.train_users.end());
  std::sort(s.valid_users.begin(), s.valid_users.end());
  std::sort(s.test_users.begin(), s.test_users.end());

  auto retain = [&](const std::vector<int>& users, const char* stream) {
    std::vector<int> pool = users;
    auto r = substream(spec.seed, stream);
    std::shuffle(pool.begin(), pool.end(), r);
    size_t keep = static_cast<size_t>(std::llround(spec.eta * double(pool.size())));
    pool.resize(keep);
    std::sort(pool.begin(), pool.end());
    return pool;
  };
  s.retained_train = retain(s.train_users, "eta-train");
  s.retained_valid = retain(s.valid_users, "eta-valid");
  return s;
}

std::string Split::to_json() const {
  nlohmann::ordered_json j;
  j["eta"] = eta;
  j["seed"] = seed;
  j["train_users"] = train_users;
  j["valid_users"] = valid_users;
  j["test_users"] = test_users;
  j["retained_train"] = retained_train;
  j["retained_valid"] = retained_valid;
  return j.dump(2) + "\n";
}

Split Split::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  Split s;
  s.eta = j.at("eta").get<double>();
  s.seed = j.at("seed").get<uint64_t>();
  s.train_users = j.at("train_users").get<std::vector<int>>();
  s.valid_users = j.at("valid_users").get<std::vector<int>>();
  s.test_users = j.at("test_users").get<std::vector<int>>();
  s.retained_train = j.at("retained_train").get<std::vector<int>>();
  s.retained_valid = j.at("retained_valid").get<std::vector<int>>();
  return s;
}

std::vector<char> target_retention_mask(const Dataset& d, const Split& s) {
  int n = d.graph.count(NodeType::User);
  std::vector<char> keep(n, 1);
  for (int u : s.train_users) keep[u] = 0;
  for (int u : s.valid_users) keep[u] = 0;
  for (int u : s.test_users) keep[u] = 0;
  for (int u : s.retained_train) keep[u] = 1;
  for (int u : s.retained_valid) keep[u] = 1;
  return keep;
}

HeteroGraph build_training_graph(const Dataset& d, const Split& s) {
  auto keep = target_retention_mask(d, s);
  std::array<int, kNumNodeTypes> counts;
  for (int t = 0; t < kNumNodeTypes; ++t) counts[t] = d.graph.count(static_cast<NodeType>(t));

  std::vector<EdgeList> edges;
  EdgeList purchase{RelationKind::Purchase, {}};
  for (const auto& it : d.target)
    if (keep[it.user]) purchase.edges.emplace_back(it.user, it.item);
  edges.push_back(std::move(purchase));

  for (RelationKind r : {RelationKind::ServedBy, RelationKind::Possess}) {
    EdgeList el{r, {}};
    const auto& a = d.graph.adjacency(r);
    for (size_t u = 0; u + 1 < a.offsets.size(); ++u)
      for (int k = a.offsets[u]; k < a.offsets[u + 1]; ++k)
        el.edges.emplace_back(static_cast<int>(u), a.targets[k]);
    edges.push_back(std::move(el));
  }

  std::array<Eigen::MatrixXd, kNumNodeTypes> feats;
  for (int t = 0; t < kNumNodeTypes; ++t) feats[t] = d.graph.features(static_cast<NodeType>(t));
  return HeteroGraph::build(counts, edges, std::move(feats));
}

std::vector<Interaction> training_target_interactions(const Dataset& d, const Split& s) {
  auto keep = target_retention_mask(d, s);
  std::vector<Interaction> out;
  for (const auto& it : d.target)
    if (keep[it.user]) out.push_back(it);
  return out;
}

}  // namespace hcdir
