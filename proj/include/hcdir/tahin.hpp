#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <string>
#include <vector>

#include "hcdir/graph.hpp"
#include "hcdir/nn.hpp"

namespace hcdir {

// GAT-style additive attention net: both arguments are linearly mapped per
// head to S/H dims, concatenated, dotted with a head vector, LeakyReLU(0.2);
// the per-neighbor logit is the mean over heads.
struct AttnNet {
  Eigen::MatrixXd w_self, w_neigh;  // S x S, interpreted as H row-blocks
  Eigen::MatrixXd a_self, a_neigh;  // S x 1, interpreted as H segments
};

struct SemanticAttn {
  Eigen::MatrixXd q;  // S_a x 1
  Eigen::MatrixXd w;  // S_a x S
  Eigen::MatrixXd b;  // S_a x 1
};

struct TahinConfig {
  int S = 32;
  int H = 8;
  int K = 1;    // aggregation rounds
  int S_a = 32; // semantic attention width
  std::vector<MetaPath> paths;

  std::vector<int> paths_for_type(NodeType t) const;
  int path_index(const std::string& name) const;
  void validate() const;
};

struct TahinParams {
  TahinConfig cfg;
  std::array<Eigen::MatrixXd, kNumNodeTypes> h0;  // S x N_t base embeddings
  std::array<Eigen::MatrixXd, kNumRelations> proj;
  std::array<AttnNet, kNumRelations> rel_attn;
  std::vector<AttnNet> path_attn;  // aligned with cfg.paths
  std::array<SemanticAttn, kNumNodeTypes> sem;
  Eigen::MatrixXd w1, b1, w2, b2;  // node update
};

TahinParams init_tahin_params(const TahinConfig& cfg, const HeteroGraph& g, uint64_t seed);
TahinParams zeros_like(const TahinParams& p);
// Stable name -> tensor enumeration shared by the optimizer, checkpoints and
// the gradient checker.
std::vector<NamedTensor> tensor_list(TahinParams& params, TahinParams& grads);
void check_params_finite(const TahinParams& p);

// Precomputed traversal structure: one-hop CSR per type with relation tags,
// and deduplicated meta-path neighbor CSR per configured path.
struct NeighborCache {
  struct OneHop {
    std::vector<int> off;
    std::vector<int> nbr;
    std::vector<int8_t> rel;
  };
  struct PathAdj {
    std::vector<int> off;
    std::vector<int> nbr;
    bool globally_empty = true;
  };
  std::array<OneHop, kNumNodeTypes> one_hop;
  std::vector<PathAdj> paths;  // aligned with cfg.paths
};

NeighborCache build_neighbor_cache(const HeteroGraph& g, const TahinConfig& cfg);

// Full-graph forward state, kept for the backward pass.
struct TahinForward {
  struct Round {
    std::array<Eigen::MatrixXd, kNumNodeTypes> h_in;
    std::array<Eigen::MatrixXd, kNumRelations> trans_neigh;           // P_r h_in[dst]
    std::array<Eigen::MatrixXd, kNumRelations> rel_self_feat;         // w_self h_in[src]
    std::array<Eigen::MatrixXd, kNumRelations> rel_neigh_feat;        // w_neigh trans
    std::array<Eigen::MatrixXd, kNumRelations> rel_self_score;        // H x N_src
    std::array<Eigen::MatrixXd, kNumRelations> rel_neigh_score;       // H x N_dst
    std::array<std::vector<double>, kNumNodeTypes> alpha;             // per one-hop entry
    std::array<Eigen::MatrixXd, kNumNodeTypes> h1;
    std::vector<Eigen::MatrixXd> path_self_feat, path_neigh_feat;     // S x N
    std::vector<Eigen::MatrixXd> path_self_score, path_neigh_score;   // H x N
    std::vector<std::vector<double>> beta;                            // per path entry
    std::vector<Eigen::MatrixXd> h_path;
    std::array<std::vector<int>, kNumNodeTypes> present;              // path ids per type
    std::array<std::vector<double>, kNumNodeTypes> gamma;
    std::array<Eigen::MatrixXd, kNumNodeTypes> h2;
    std::array<Eigen::MatrixXd, kNumNodeTypes> inner;
    std::array<Eigen::MatrixXd, kNumNodeTypes> pre2;
  };
  std::vector<Round> rounds;
  std::array<Eigen::MatrixXd, kNumNodeTypes> h_final;  // S x N_t
};

// One full K-round pass over every node of every type.
void encode_all(const HeteroGraph& g, const NeighborCache& nc, const TahinParams& params,
                TahinForward& fwd);

// Backward through the whole pass. d_final holds dL/d(h_final) per type;
// gradients are accumulated (+=) into `grads`.
void encode_backward(const HeteroGraph& g, const NeighborCache& nc, const TahinParams& params,
                     const TahinForward& fwd,
                     std::array<Eigen::MatrixXd, kNumNodeTypes>& d_final, TahinParams& grads);

// --- per-node operations (contract-level API; the fused pass above must
// --- agree with composing these)

struct WeightedNeighbor {
  NodeRef node;
  double weight;
};

std::pair<Eigen::VectorXd, std::vector<WeightedNeighbor>> relational_aggregate(
    const HeteroGraph& g, const TahinParams& params, const NodeRef& e);

std::pair<Eigen::VectorXd, std::vector<WeightedNeighbor>> node_attention_aggregate(
    const HeteroGraph& g, const TahinParams& params, const NodeRef& e, const MetaPath& rho);

// tables: (path name, S x N per-node embeddings) for every path present for
// the type. gamma is global per node type.
std::pair<Eigen::MatrixXd, std::vector<std::pair<std::string, double>>> semantic_fuse(
    const TahinParams& params, NodeType type,
    const std::vector<std::pair<std::string, Eigen::MatrixXd>>& tables);

Eigen::VectorXd update_node(const TahinParams& params, const Eigen::VectorXd& h0,
                            const Eigen::VectorXd& h1, const Eigen::VectorXd& h2);

// sigmoid(u . v)
double score_pair(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

struct LabeledPair {
  int user;
  int item;
  double y;
};

// Summed binary cross entropy with predictions clamped to [1e-7, 1 - 1e-7].
// When gradient tables are passed they are accumulated into.
double target_loss(const Eigen::MatrixXd& users, const Eigen::MatrixXd& items,
                   const std::vector<LabeledPair>& batch, Eigen::MatrixXd* d_users = nullptr,
                   Eigen::MatrixXd* d_items = nullptr);

// Convenience wrapper used by training and the gradient checker: full forward,
// loss over the batch, full backward into `grads`.
double tahin_loss_and_grad(const HeteroGraph& g, const NeighborCache& nc,
                           const TahinParams& params, const std::vector<LabeledPair>& batch,
                           TahinForward& fwd, TahinParams& grads);

}  // namespace hcdir
