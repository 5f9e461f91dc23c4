#include "hcdir/graph.hpp"

#include <algorithm>
#include <map>

namespace hcdir {

MetaPath MetaPath::parse(const std::string& code) {
  if (code.size() < 2) throw SchemaError("meta-path '" + code + "' needs at least two node symbols");
  MetaPath p;
  p.name = code;
  for (char c : code) p.types.push_back(node_type_from_code(c));
  for (size_t i = 0; i + 1 < p.types.size(); ++i) {
    if (!has_relation_between(p.types[i], p.types[i + 1]))
      throw SchemaError("meta-path '" + code + "' has no relation for step " + std::to_string(i));
    p.steps.push_back(relation_between(p.types[i], p.types[i + 1]));
  }
  return p;
}

AblationMode ablation_from_name(const std::string& name) {
  if (name == "full") return AblationMode::Full;
  if (name == "no_agent") return AblationMode::NoAgent;
  if (name == "no_property") return AblationMode::NoProperty;
  if (name == "interactions_only") return AblationMode::InteractionsOnly;
  throw ConfigError("unknown ablation mode '" + name + "'");
}

const char* ablation_name(AblationMode m) {
  switch (m) {
    case AblationMode::Full: return "full";
    case AblationMode::NoAgent: return "no_agent";
    case AblationMode::NoProperty: return "no_property";
    case AblationMode::InteractionsOnly: return "interactions_only";
  }
  throw ContractError("invalid ablation mode");
}

namespace {

HeteroGraph::Adjacency to_csr(int src_count, std::vector<std::pair<int, int>> edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  HeteroGraph::Adjacency a;
  a.offsets.assign(src_count + 1, 0);
  for (const auto& e : edges) a.offsets[e.first + 1]++;
  for (int i = 0; i < src_count; ++i) a.offsets[i + 1] += a.offsets[i];
  a.targets.resize(edges.size());
  for (size_t k = 0; k < edges.size(); ++k) a.targets[k] = edges[k].second;
  return a;
}

}  // namespace

HeteroGraph HeteroGraph::build(const std::array<int, kNumNodeTypes>& node_counts,
                               const std::vector<EdgeList>& edge_lists,
                               std::array<Eigen::MatrixXd, kNumNodeTypes> features) {
  HeteroGraph g;
  g.counts_ = node_counts;
  for (int t = 0; t < kNumNodeTypes; ++t) {
    if (node_counts[t] < 0) throw BoundsError("negative node count");
    const auto& f = features[t];
    if (f.size() != 0 && f.cols() != node_counts[t])
      throw SchemaError(std::string("feature table for ") +
                        node_type_name(static_cast<NodeType>(t)) + " has " +
                        std::to_string(f.cols()) + " columns, expected " +
                        std::to_string(node_counts[t]));
  }
  g.features_ = std::move(features);

  std::array<std::vector<std::pair<int, int>>, kNumRelations> given;
  std::array<bool, kNumRelations> provided{};
  for (const auto& el : edge_lists) {
    int r = static_cast<int>(el.relation);
    const auto& info = kRelations[r];
    for (const auto& [s, d] : el.edges) {
      if (s < 0 || s >= node_counts[static_cast<int>(info.src)])
        throw BoundsError(std::string("edge (") + std::to_string(s) + "," + std::to_string(d) +
                          ") of relation " + info.name + ": source id out of range");
      if (d < 0 || d >= node_counts[static_cast<int>(info.dst)])
        throw BoundsError(std::string("edge (") + std::to_string(s) + "," + std::to_string(d) +
                          ") of relation " + info.name + ": target id out of range");
    }
    auto& dst = given[r];
    dst.insert(dst.end(), el.edges.begin(), el.edges.end());
    provided[r] = true;
  }

  // Materialize missing reverse sides; check symmetry when both were given.
  for (int r = 0; r < kNumRelations; ++r) {
    int rev = static_cast<int>(kRelations[r].reverse);
    if (provided[r] && !provided[rev]) {
      for (const auto& [s, d] : given[r]) given[rev].emplace_back(d, s);
      provided[rev] = true;
    }
  }
  for (int r = 0; r < kNumRelations; ++r) {
    int rev = static_cast<int>(kRelations[r].reverse);
    if (r > rev) continue;
    auto fwd = given[r];
    auto bwd = given[rev];
    for (auto& e : bwd) std::swap(e.first, e.second);
    std::sort(fwd.begin(), fwd.end());
    fwd.erase(std::unique(fwd.begin(), fwd.end()), fwd.end());
    std::sort(bwd.begin(), bwd.end());
    bwd.erase(std::unique(bwd.begin(), bwd.end()), bwd.end());
    if (fwd != bwd)
      throw SchemaError(std::string(kRelations[r].name) + " and " + kRelations[rev].name +
                        " are not edge-for-edge reverses");
  }

  for (int r = 0; r < kNumRelations; ++r)
    g.adj_[r] = to_csr(node_counts[static_cast<int>(kRelations[r].src)], std::move(given[r]));
  return g;
}

std::pair<const int*, const int*> HeteroGraph::successors(RelationKind r, int id) const {
  const auto& a = adj_[static_cast<int>(r)];
  if (id < 0 || id + 1 >= static_cast<int>(a.offsets.size()))
    throw BoundsError("node id out of range for relation " + std::string(relation_info(r).name));
  return {a.targets.data() + a.offsets[id], a.targets.data() + a.offsets[id + 1]};
}

std::vector<NodeRef> one_hop_neighbors(const HeteroGraph& g, const NodeRef& e,
                                       std::optional<RelationKind> r) {
  if (!g.contains(e)) throw BoundsError("node " + to_string(e) + " not in graph");
  std::vector<NodeRef> out;
  auto add = [&](RelationKind rel) {
    if (g.relation_removed(rel)) return;
    auto [b, en] = g.successors(rel, e.id);
    for (const int* p = b; p != en; ++p) out.push_back({relation_info(rel).dst, *p});
  };
  if (r) {
    if (relation_info(*r).src != e.type)
      throw ContractError("relation " + std::string(relation_info(*r).name) +
                          " does not start at type " + node_type_name(e.type));
    add(*r);
  } else {
    for (int i = 0; i < kNumRelations; ++i)
      if (kRelations[i].src == e.type) add(static_cast<RelationKind>(i));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::pair<NodeRef, int64_t>> metapath_neighbors(const HeteroGraph& g,
                                                            const NodeRef& e,
                                                            const MetaPath& rho) {
  if (!g.contains(e)) throw BoundsError("node " + to_string(e) + " not in graph");
  if (rho.head() != e.type)
    throw ContractError("node " + to_string(e) + " does not match head of meta-path " + rho.name);
  for (NodeType t : rho.types)
    if (g.type_removed(t))
      throw ConfigError("meta-path " + rho.name + " references removed node type " +
                        node_type_name(t));

  // Walk counting: frontier multiset advanced one relation at a time.
  std::map<int, int64_t> frontier{{e.id, 1}};
  for (RelationKind step : rho.steps) {
    std::map<int, int64_t> next;
    for (const auto& [id, cnt] : frontier) {
      auto [b, en] = g.successors(step, id);
      for (const int* p = b; p != en; ++p) next[*p] += cnt;
    }
    frontier = std::move(next);
  }
  frontier.erase(e.id);  // closed walks do not make e its own neighbor

  std::vector<std::pair<NodeRef, int64_t>> out;
  out.reserve(frontier.size());
  for (const auto& [id, cnt] : frontier) out.push_back({NodeRef{rho.tail(), id}, cnt});
  return out;
}

HeteroGraph apply_ablation(const HeteroGraph& g, AblationMode mode) {
  HeteroGraph out = g;
  auto drop_type = [&](NodeType t) {
    out.removed_types_[static_cast<int>(t)] = true;
    out.counts_[static_cast<int>(t)] = 0;
    out.features_[static_cast<int>(t)] = Eigen::MatrixXd();
    for (int r = 0; r < kNumRelations; ++r) {
      if (kRelations[r].src == t || kRelations[r].dst == t) {
        out.removed_rels_[r] = true;
        int src_count = out.counts_[static_cast<int>(kRelations[r].src)];
        out.adj_[r].offsets.assign(src_count + 1, 0);
        out.adj_[r].targets.clear();
      }
    }
  };
  switch (mode) {
    case AblationMode::Full:
      break;
    case AblationMode::NoAgent:
      drop_type(NodeType::Agent);
      break;
    case AblationMode::NoProperty:
      drop_type(NodeType::Property);
      break;
    case AblationMode::InteractionsOnly:
      drop_type(NodeType::Agent);
      drop_type(NodeType::Property);
      break;
  }
  return out;
}

std::vector<MetaPath> filter_paths_for_ablation(const std::vector<MetaPath>& paths,
                                                AblationMode mode,
                                                std::vector<std::string>* dropped) {
  std::array<bool, kNumNodeTypes> removed{};
  if (mode == AblationMode::NoAgent || mode == AblationMode::InteractionsOnly)
    removed[static_cast<int>(NodeType::Agent)] = true;
  if (mode == AblationMode::NoProperty || mode == AblationMode::InteractionsOnly)
    removed[static_cast<int>(NodeType::Property)] = true;

  std::vector<MetaPath> kept;
  for (const auto& p : paths) {
    bool ok = true;
    for (NodeType t : p.types)
      if (removed[static_cast<int>(t)]) ok = false;
    if (ok)
      kept.push_back(p);
    else if (dropped)
      dropped->push_back(p.name);
  }
  return kept;
}

}  // namespace hcdir
