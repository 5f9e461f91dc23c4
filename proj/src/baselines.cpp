#include "hcdir/baselines.hpp"

#include <algorithm>
#include <unordered_set>

#include "hcdir/rng.hpp"
#include "hcdir/sampling.hpp"

namespace hcdir {

double bpr_triple_loss(const Eigen::VectorXd& u, const Eigen::VectorXd& v_pos,
                       const Eigen::VectorXd& v_neg, double l2) {
  double x = u.dot(v_pos - v_neg);
  double loss = -std::log(std::max(sigmoid(x), 1e-300));
  loss += l2 * (u.squaredNorm() + v_pos.squaredNorm() + v_neg.squaredNorm());
  return loss;
}

BprModel bpr_train(const std::vector<Interaction>& interactions, int n_users, int n_items,
                   const BprConfig& cfg, uint64_t seed) {
  BprModel m;
  auto rng = substream(seed, "bpr-init");
  std::normal_distribution<double> init(0.0, 0.1);
  m.users.resize(cfg.dim, n_users);
  m.items.resize(cfg.dim, n_items);
  for (int c = 0; c < n_users; ++c)
    for (int r = 0; r < cfg.dim; ++r) m.users(r, c) = init(rng);
  for (int c = 0; c < n_items; ++c)
    for (int r = 0; r < cfg.dim; ++r) m.items(r, c) = init(rng);

  std::vector<std::vector<int>> positives(n_users);
  for (const auto& it : interactions) positives[it.user].push_back(it.item);
  std::vector<std::pair<int, int>> triples_base;
  m.trained.assign(n_users, 0);
  for (int u = 0; u < n_users; ++u) {
    auto& p = positives[u];
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    if (p.empty() || static_cast<int>(p.size()) >= n_items) {
      if (!p.empty()) ++m.skipped_users;  // fully saturated user has no negatives
      continue;
    }
    m.trained[u] = 1;
    for (int i : p) triples_base.emplace_back(u, i);
  }
  for (int u = 0; u < n_users; ++u)
    if (positives[u].empty()) ++m.skipped_users;

  auto sgd_rng = substream(seed, "bpr-sgd");
  std::uniform_int_distribution<int> item_dist(0, n_items - 1);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto order = triples_base;
    std::shuffle(order.begin(), order.end(), sgd_rng);
    for (const auto& [u, pos] : order) {
      int neg = item_dist(sgd_rng);
      while (std::binary_search(positives[u].begin(), positives[u].end(), neg))
        neg = item_dist(sgd_rng);
      auto uu = m.users.col(u);
      auto vp = m.items.col(pos);
      auto vn = m.items.col(neg);
      double x = uu.dot(vp - vn);
      double g = -sigmoid(-x);  // d(-ln sigmoid(x))/dx
      Eigen::VectorXd du = g * (vp - vn) + 2.0 * cfg.l2 * uu;
      Eigen::VectorXd dvp = g * uu + 2.0 * cfg.l2 * vp;
      Eigen::VectorXd dvn = -g * uu + 2.0 * cfg.l2 * vn;
      m.users.col(u) -= cfg.lr * du;
      m.items.col(pos) -= cfg.lr * dvp;
      m.items.col(neg) -= cfg.lr * dvn;
    }
  }
  return m;
}

Eigen::VectorXd Gru4RecModel::scores_for(const std::vector<int>& seq) const {
  if (seq.empty()) return Eigen::VectorXd::Zero(item_emb.cols());
  std::vector<int> tail = seq;
  if (static_cast<int>(tail.size()) > max_seq)
    tail.erase(tail.begin(), tail.end() - max_seq);
  Eigen::VectorXd h = gru_forward(gru, tail, item_emb);
  return item_emb.transpose() * h;
}

Eigen::VectorXd Gru4RecModel::next_item_probs(const std::vector<int>& seq) const {
  Eigen::VectorXd logits = scores_for(seq);
  return softmax(logits);
}

Gru4RecModel gru4rec_train(const std::vector<std::vector<int>>& sequences, int n_items,
                           const Gru4RecConfig& cfg, uint64_t seed,
                           std::vector<double>* epoch_loss_out) {
  std::vector<int> usable;
  for (size_t u = 0; u < sequences.size(); ++u)
    if (sequences[u].size() >= 2) usable.push_back(static_cast<int>(u));
  if (usable.empty())
    throw ContractError("gru4rec needs at least one sequence of length >= 2");

  Gru4RecModel m;
  m.max_seq = cfg.max_seq;
  auto rng = substream(seed, "gru4rec-init");
  m.item_emb = xavier_uniform(cfg.dim, n_items, rng);
  m.gru = init_gru(cfg.dim, cfg.dim, seed);

  GruParams grads = zeros_like(m.gru);
  Eigen::MatrixXd emb_grad = Eigen::MatrixXd::Zero(cfg.dim, n_items);
  auto tensors = tensor_list(m.gru, grads);
  tensors.push_back({"gru4rec.item_emb", &m.item_emb, &emb_grad});
  AdamOptimizer opt(cfg.lr);

  auto order_rng = substream(seed, "gru4rec-order");
  GruCache cache;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    auto order = usable;
    std::shuffle(order.begin(), order.end(), order_rng);
    double epoch_loss = 0;
    int pending = 0;
    zero_grads(tensors);
    for (int u : order) {
      std::vector<int> seq = sequences[u];
      if (static_cast<int>(seq.size()) > cfg.max_seq)
        seq.erase(seq.begin(), seq.end() - cfg.max_seq);
      // inputs are positions 0..L-2, each predicting the next item
      std::vector<int> inputs(seq.begin(), seq.end() - 1);
      gru_forward(m.gru, inputs, m.item_emb, &cache);
      std::vector<Eigen::VectorXd> d_steps(inputs.size());
      for (size_t t = 0; t < inputs.size(); ++t) {
        const Eigen::VectorXd& h = cache.h[t];
        Eigen::VectorXd probs = softmax(m.item_emb.transpose() * h);
        int target = seq[t + 1];
        epoch_loss -= std::log(std::max(probs[target], 1e-300));
        probs[target] -= 1.0;  // dlogits
        d_steps[t] = m.item_emb * probs;
        emb_grad += h * probs.transpose();
      }
      gru_backward(m.gru, inputs, m.item_emb, cache, d_steps, grads, &emb_grad);
      ++pending;
      if (pending * 1 >= cfg.batch) {
        opt.step(tensors);
        zero_grads(tensors);
        pending = 0;
      }
    }
    if (pending > 0) {
      opt.step(tensors);
      zero_grads(tensors);
    }
    if (!std::isfinite(epoch_loss)) throw TrainingError("gru4rec training diverged");
    if (epoch_loss_out) epoch_loss_out->push_back(epoch_loss);
  }
  return m;
}

Eigen::VectorXd EmcdrModel::map_source_user(int user, const std::vector<int>& source_seq) const {
  Eigen::VectorXd u_s;
  if (kind == EmcdrSourceKind::Bpr) {
    if (user < 0 || user >= static_cast<int>(source_mf.trained.size()) ||
        !source_mf.trained[user])
      throw ContractError("user " + std::to_string(user) +
                          " has no source-domain interactions (cold in both domains)");
    u_s = source_mf.users.col(user);
  } else {
    if (source_seq.empty())
      throw ContractError("user " + std::to_string(user) +
                          " has no source-domain interactions (cold in both domains)");
    u_s = source.encode_user(source_seq);
  }
  return map_user(mapper, u_s);
}

EmcdrModel emcdr_train(EmcdrSourceKind kind, const Dataset& data, const Split& split,
                       const EmcdrConfig& cfg, uint64_t seed, const SourceEncoder* shared_source) {
  EmcdrModel m;
  m.kind = kind;
  int n_users = data.graph.count(NodeType::User);
  int n_items = data.graph.count(NodeType::Item);

  // stage 1: target-domain latents from the leakage-filtered interactions
  auto train_interactions = training_target_interactions(data, split);
  m.target_mf = bpr_train(train_interactions, n_users, n_items, cfg.bpr, seed);

  // stage 2: source-domain latents
  auto source_seqs = user_sequences(data.source, n_users);
  if (kind == EmcdrSourceKind::Bpr) {
    m.source_mf = bpr_train(data.source, n_users, data.n_source_items, cfg.bpr,
                            substream_seed(seed, "emcdr-src"));
  } else if (shared_source) {
    m.source = *shared_source;
  } else {
    m.source = train_source_encoder(data.source_item_text, source_seqs, split.valid_users,
                                    cfg.source, seed);
  }

  // stage 3: mapping on eta-retained overlap training users
  std::vector<MappingPair> pairs;
  std::vector<int> pair_users;
  for (int u : split.retained_train) {
    if (!m.target_mf.trained[u]) continue;
    MappingPair p;
    if (kind == EmcdrSourceKind::Bpr) {
      if (!m.source_mf.trained[u]) continue;
      p.u_source = m.source_mf.users.col(u);
    } else {
      if (source_seqs[u].empty()) continue;
      p.u_source = m.source.encode_user(source_seqs[u]);
    }
    p.u_target = m.target_mf.users.col(u);
    pairs.push_back(std::move(p));
    pair_users.push_back(u);
  }
  if (static_cast<int>(pairs.size()) < cfg.min_mapping_pairs)
    throw TrainingError("only " + std::to_string(pairs.size()) +
                        " overlap training users available for mapping; need at least " +
                        std::to_string(cfg.min_mapping_pairs));

  auto target_by_user = user_sequences(data.target, n_users);
  auto validation = [&](const MapperParams& mp) {
    double total = 0;
    int counted = 0;
    for (int u : split.valid_users) {
      if (target_by_user[u].empty()) continue;
      Eigen::VectorXd u_s;
      if (kind == EmcdrSourceKind::Bpr) {
        if (!m.source_mf.trained[u]) continue;
        u_s = m.source_mf.users.col(u);
      } else {
        if (source_seqs[u].empty()) continue;
        u_s = m.source.encode_user(source_seqs[u]);
      }
      Eigen::VectorXd mapped = map_user(mp, u_s);
      Eigen::VectorXd scores = m.target_mf.items.transpose() * mapped;
      std::vector<int> order(n_items);
      for (int i = 0; i < n_items; ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
      });
      std::unordered_set<int> relevant(target_by_user[u].begin(), target_by_user[u].end());
      double dcg = 0;
      for (int rank = 0; rank < n_items; ++rank)
        if (relevant.count(order[rank])) dcg += 1.0 / std::log2(double(rank) + 2.0);
      double idcg = 0;
      for (size_t i = 0; i < relevant.size(); ++i) idcg += 1.0 / std::log2(double(i) + 2.0);
      total += dcg / idcg;
      ++counted;
    }
    return counted > 0 ? total / counted : 0.0;
  };

  int in_dim = static_cast<int>(pairs[0].u_source.size());
  m.mapper = train_mapper(pairs, in_dim, cfg.bpr.dim, cfg.mapper,
                          substream_seed(seed, "emcdr-mapper"), validation);
  return m;
}

}  // namespace hcdir
