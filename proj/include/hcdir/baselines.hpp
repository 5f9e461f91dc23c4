#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hcdir/cross_domain.hpp"
#include "hcdir/dataset.hpp"
#include "hcdir/source_model.hpp"

namespace hcdir {

struct BprConfig {
  int dim = 32;
  double lr = 0.05;
  int epochs = 40;
  double l2 = 1e-5;
};

// Pairwise matrix factorization. Users with no training positives keep their
// init rows but are scored with the shared prior (zero vector), so every cold
// user gets the same score vector.
struct BprModel {
  Eigen::MatrixXd users, items;  // dim x m, dim x n
  std::vector<char> trained;     // per user: saw at least one positive
  int skipped_users = 0;

  Eigen::VectorXd scores_for(int user) const {
    if (user < 0 || user >= static_cast<int>(trained.size()) || !trained[user])
      return Eigen::VectorXd::Zero(items.cols());
    return items.transpose() * users.col(user);
  }
};

BprModel bpr_train(const std::vector<Interaction>& interactions, int n_users, int n_items,
                   const BprConfig& cfg, uint64_t seed);

// Per-triple pairwise logistic loss -ln sigmoid(u.(v+ - v-)) with L2 term.
double bpr_triple_loss(const Eigen::VectorXd& u, const Eigen::VectorXd& v_pos,
                       const Eigen::VectorXd& v_neg, double l2);

struct Gru4RecConfig {
  int dim = 32;
  double lr = 1e-3;
  int batch = 32;
  int epochs = 30;
  int max_seq = 50;
};

// Session-style next-item model: shared item embedding table for input and
// scoring, full-softmax cross entropy.
struct Gru4RecModel {
  Eigen::MatrixXd item_emb;  // dim x n_items
  GruParams gru;
  int max_seq = 50;

  // Final-state dot products; an empty history scores all items 0 (prior).
  Eigen::VectorXd scores_for(const std::vector<int>& seq) const;
  // Softmax over next-item logits given a history.
  Eigen::VectorXd next_item_probs(const std::vector<int>& seq) const;
};

Gru4RecModel gru4rec_train(const std::vector<std::vector<int>>& sequences, int n_items,
                           const Gru4RecConfig& cfg, uint64_t seed,
                           std::vector<double>* epoch_loss = nullptr);

enum class EmcdrSourceKind { Bpr, Gru };

struct EmcdrConfig {
  BprConfig bpr;
  SourceTrainConfig source;
  MapperTrainConfig mapper;
  int min_mapping_pairs = 10;
};

struct EmcdrModel {
  EmcdrSourceKind kind;
  BprModel target_mf;    // stage 1: target latents
  BprModel source_mf;    // stage 2 when kind == Bpr
  SourceEncoder source;  // stage 2 when kind == Gru
  MapperParams mapper;   // stage 3

  // u_hat_t for a user given their source history; throws for users absent
  // from the source domain (cold in both).
  Eigen::VectorXd map_source_user(int user, const std::vector<int>& source_seq) const;
};

// Three-stage pipeline: target BPR latents, source latents by choice, MLP
// mapping trained on the eta-retained overlap training users. `shared_source`
// lets callers reuse an already-trained source encoder.
EmcdrModel emcdr_train(EmcdrSourceKind kind, const Dataset& data, const Split& split,
                       const EmcdrConfig& cfg, uint64_t seed,
                       const SourceEncoder* shared_source = nullptr);

}  // namespace hcdir
