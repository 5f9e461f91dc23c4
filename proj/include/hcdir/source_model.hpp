#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "hcdir/nn.hpp"
#include "hcdir/tahin.hpp"  // LabeledPair, target_loss

namespace hcdir {

// Lowercases and splits on non-alphanumeric bytes.
std::vector<std::string> tokenize(const std::string& text);

struct WordEmbeddings {
  std::map<std::string, int> vocab;  // token -> row; "<unk>" always present
  Eigen::MatrixXd table;             // d_w x |vocab|
  int unk = 0;

  int dim() const { return static_cast<int>(table.rows()); }
  int index_of(const std::string& token) const {
    auto it = vocab.find(token);
    return it == vocab.end() ? unk : it->second;
  }
};

struct Word2VecConfig {
  int dim = 32;
  int window = 5;
  int negatives = 5;
  int epochs = 5;
  double lr = 0.025;
  double lr_min = 1e-4;
};

// Skip-gram with negative sampling over the description corpus. Single
// threaded and fully determined by the seed.
WordEmbeddings train_word_embeddings(const std::vector<std::string>& corpus, int d_w,
                                     uint64_t seed, const Word2VecConfig& cfg = {});

// Coordinate-wise max over the word vectors of the description. An empty
// token list yields the zero vector and sets *was_empty when provided.
Eigen::VectorXd embed_item_text(const WordEmbeddings& we, const std::vector<std::string>& tokens,
                                bool* was_empty = nullptr);

struct GruParams {
  Eigen::MatrixXd wx, wr, wh;  // n_H x d
  Eigen::MatrixXd ux, ur, uh;  // n_H x n_H
  Eigen::MatrixXd bx, br, bh;  // n_H x 1

  int hidden() const { return static_cast<int>(ux.rows()); }
  int input_dim() const { return static_cast<int>(wx.cols()); }
};

GruParams init_gru(int n_h, int d, uint64_t seed);
GruParams zeros_like(const GruParams& p);
std::vector<NamedTensor> tensor_list(GruParams& params, GruParams& grads);

struct GruCache {
  std::vector<Eigen::VectorXd> x, r, htilde, h, uh_prev;
};

// Runs the gated recurrence over the columns of `inputs` selected by `seq`
// and returns the final state. h_0 = 0; throws on an empty sequence.
Eigen::VectorXd gru_forward(const GruParams& p, const std::vector<int>& seq,
                            const Eigen::MatrixXd& inputs, GruCache* cache = nullptr);

// Convenience overload over explicit vectors.
Eigen::VectorXd gru_encode(const GruParams& p, const std::vector<Eigen::VectorXd>& seq);

// Backward through the recurrence. d_h_steps[t] is the exogenous dL/dh_t for
// each step (use zeros except the last entry for a final-state readout).
// When d_inputs is given, gradients w.r.t. the selected input columns are
// accumulated into it.
void gru_backward(const GruParams& p, const std::vector<int>& seq, const Eigen::MatrixXd& inputs,
                  const GruCache& cache, const std::vector<Eigen::VectorXd>& d_h_steps,
                  GruParams& grads, Eigen::MatrixXd* d_inputs = nullptr);

// Same functional form as the target-domain objective.
inline double source_loss(const Eigen::MatrixXd& users, const Eigen::MatrixXd& items,
                          const std::vector<LabeledPair>& batch,
                          Eigen::MatrixXd* d_users = nullptr, Eigen::MatrixXd* d_items = nullptr) {
  return target_loss(users, items, batch, d_users, d_items);
}

// Frozen word vectors + frozen max-pooled item vectors + trainable GRU.
struct SourceEncoder {
  WordEmbeddings words;
  Eigen::MatrixXd item_vecs;  // d_w x n_items, frozen after construction
  GruParams gru;
  Eigen::MatrixXd item_map;  // learned n_h x d_w map when d_w != n_h, else empty
  int max_seq = 50;

  // Encodes a user from their interaction sequence (most recent max_seq kept).
  Eigen::VectorXd encode_user(const std::vector<int>& seq) const;
  // Item vectors on the loss/scoring side (mapped when item_map is present).
  Eigen::MatrixXd scoring_items() const {
    return item_map.size() ? item_map * item_vecs : item_vecs;
  }
};

struct SourceTrainConfig {
  int d_w = 32;
  int n_h = 32;
  double lr = 1e-3;
  int batch = 32;
  int max_epochs = 100;
  int patience = 5;
  int negatives = 4;
  int max_seq = 50;
  Word2VecConfig w2v;
};

// Word2vec preprocessing, then BCE training of the GRU over interaction
// sequences. The word table and item vectors stay frozen. Early stopping uses
// leave-last-out next-item NDCG over `validation_users` when given.
SourceEncoder train_source_encoder(const std::vector<std::string>& item_texts,
                                   const std::vector<std::vector<int>>& sequences,
                                   const std::vector<int>& validation_users,
                                   const SourceTrainConfig& cfg, uint64_t seed,
                                   std::vector<std::pair<double, double>>* log = nullptr);

}  // namespace hcdir
