#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hcdir/types.hpp"

namespace hcdir {

// An ordered node-type sequence such as I-U-I. Consecutive pairs must map to
// one of the six relations.
struct MetaPath {
  std::vector<NodeType> types;
  std::vector<RelationKind> steps;  // steps[i] connects types[i] -> types[i+1]
  std::string name;                 // canonical code string, e.g. "IUI"

  NodeType head() const { return types.front(); }
  NodeType tail() const { return types.back(); }
  size_t length() const { return types.size(); }

  static MetaPath parse(const std::string& code);
};

enum class AblationMode { Full, NoAgent, NoProperty, InteractionsOnly };
AblationMode ablation_from_name(const std::string& name);
const char* ablation_name(AblationMode m);

struct EdgeList {
  RelationKind relation;
  std::vector<std::pair<int, int>> edges;  // (src local id, dst local id)
};

// Immutable after build. Per-relation CSR adjacency; reverse relations are
// materialized so both directions are O(1) to walk.
class HeteroGraph {
 public:
  struct Adjacency {
    std::vector<int> offsets;  // size = count(src type) + 1
    std::vector<int> targets;  // sorted within each source bucket
  };

  static HeteroGraph build(const std::array<int, kNumNodeTypes>& node_counts,
                           const std::vector<EdgeList>& edge_lists,
                           std::array<Eigen::MatrixXd, kNumNodeTypes> features = {});

  int count(NodeType t) const { return counts_[static_cast<int>(t)]; }
  bool type_removed(NodeType t) const { return removed_types_[static_cast<int>(t)]; }
  bool relation_removed(RelationKind r) const { return removed_rels_[static_cast<int>(r)]; }

  const Adjacency& adjacency(RelationKind r) const { return adj_[static_cast<int>(r)]; }
  int edge_count(RelationKind r) const {
    return static_cast<int>(adj_[static_cast<int>(r)].targets.size());
  }

  // Successors of `id` under relation r, sorted ascending.
  std::pair<const int*, const int*> successors(RelationKind r, int id) const;

  // d_feat x N, or an empty matrix when the type carries no features.
  const Eigen::MatrixXd& features(NodeType t) const { return features_[static_cast<int>(t)]; }

  bool contains(const NodeRef& n) const {
    return n.id >= 0 && n.id < count(n.type) && !type_removed(n.type);
  }

 private:
  std::array<int, kNumNodeTypes> counts_{};
  std::array<Adjacency, kNumRelations> adj_;
  std::array<Eigen::MatrixXd, kNumNodeTypes> features_;
  std::array<bool, kNumNodeTypes> removed_types_{};
  std::array<bool, kNumRelations> removed_rels_{};

  friend HeteroGraph apply_ablation(const HeteroGraph&, AblationMode);
};

// One-hop successors of e; with a relation the exact r-successors, without it
// the union over all relations whose source type matches e. Sorted by (type, id).
std::vector<NodeRef> one_hop_neighbors(const HeteroGraph& g, const NodeRef& e,
                                       std::optional<RelationKind> r = std::nullopt);

// Endpoints of walks realizing rho from e, with walk-count multiplicity.
// The start node is excluded even when closed walks exist; interior revisits
// are allowed. Sorted by id.
std::vector<std::pair<NodeRef, int64_t>> metapath_neighbors(const HeteroGraph& g,
                                                            const NodeRef& e,
                                                            const MetaPath& rho);

HeteroGraph apply_ablation(const HeteroGraph& g, AblationMode mode);

// Drops meta-paths that reference node types removed by `mode`. Dropped names
// are appended to `dropped` when provided.
std::vector<MetaPath> filter_paths_for_ablation(const std::vector<MetaPath>& paths,
                                                AblationMode mode,
                                                std::vector<std::string>* dropped = nullptr);

}  // namespace hcdir
