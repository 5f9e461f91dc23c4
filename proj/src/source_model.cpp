#include "hcdir/source_model.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "hcdir/rng.hpp"
#include "hcdir/sampling.hpp"

namespace hcdir {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

WordEmbeddings train_word_embeddings(const std::vector<std::string>& corpus, int d_w,
                                     uint64_t seed, const Word2VecConfig& cfg) {
  if (corpus.empty()) throw ContractError("word embedding corpus must be non-empty");

  std::vector<std::vector<int>> sentences;
  std::map<std::string, int> vocab;
  vocab["<unk>"] = 0;
  std::vector<int64_t> counts{0};
  {
    // two passes: collect the vocabulary sorted for stable indexing, then map
    std::vector<std::vector<std::string>> tokenized;
    std::map<std::string, int64_t> freq;
    for (const auto& text : corpus) {
      tokenized.push_back(tokenize(text));
      for (const auto& t : tokenized.back()) freq[t]++;
    }
    for (const auto& [tok, cnt] : freq) {
      vocab[tok] = static_cast<int>(counts.size());
      counts.push_back(cnt);
    }
    if (vocab.size() < 3)  // <unk> plus at least two real tokens
      throw ContractError("vocabulary needs at least 2 tokens");
    for (const auto& toks : tokenized) {
      std::vector<int> s;
      for (const auto& t : toks) s.push_back(vocab.at(t));
      sentences.push_back(std::move(s));
    }
  }
  int v = static_cast<int>(vocab.size());

  auto rng = substream(seed, "w2v");
  std::uniform_real_distribution<double> unit(-0.5 / d_w, 0.5 / d_w);
  Eigen::MatrixXd in(d_w, v), out = Eigen::MatrixXd::Zero(d_w, v);
  for (int c = 0; c < v; ++c)
    for (int r = 0; r < d_w; ++r) in(r, c) = unit(rng);

  // unigram^(3/4) negative sampling table
  std::vector<double> weights(v, 0.0);
  for (int i = 1; i < v; ++i) weights[i] = std::pow(double(counts[i]), 0.75);
  std::discrete_distribution<int> neg_dist(weights.begin(), weights.end());

  int64_t total_pairs = 0;
  for (const auto& s : sentences)
    for (size_t i = 0; i < s.size(); ++i) {
      int lo = std::max<int>(0, static_cast<int>(i) - cfg.window);
      int hi = std::min<int>(static_cast<int>(s.size()) - 1, static_cast<int>(i) + cfg.window);
      total_pairs += hi - lo;
    }
  total_pairs *= cfg.epochs;

  int64_t seen = 0;
  Eigen::VectorXd acc(d_w);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& s : sentences) {
      for (size_t i = 0; i < s.size(); ++i) {
        int center = s[i];
        int lo = std::max<int>(0, static_cast<int>(i) - cfg.window);
        int hi = std::min<int>(static_cast<int>(s.size()) - 1, static_cast<int>(i) + cfg.window);
        for (int j = lo; j <= hi; ++j) {
          if (j == static_cast<int>(i)) continue;
          double lr = cfg.lr * (1.0 - double(seen) / double(std::max<int64_t>(total_pairs, 1)));
          lr = std::max(lr, cfg.lr_min);
          ++seen;
          int context = s[j];
          acc.setZero();
          // positive
          double g = sigmoid(in.col(center).dot(out.col(context))) - 1.0;
          acc += g * out.col(context);
          out.col(context) -= lr * g * in.col(center);
          // negatives
          for (int n = 0; n < cfg.negatives; ++n) {
            int neg = neg_dist(rng);
            if (neg == context) continue;
            double gn = sigmoid(in.col(center).dot(out.col(neg)));
            acc += gn * out.col(neg);
            out.col(neg) -= lr * gn * in.col(center);
          }
          in.col(center) -= lr * acc;
        }
      }
    }
  }

  WordEmbeddings we;
  we.vocab = std::move(vocab);
  we.table = std::move(in);
  we.unk = 0;
  return we;
}

Eigen::VectorXd embed_item_text(const WordEmbeddings& we, const std::vector<std::string>& tokens,
                                bool* was_empty) {
  if (was_empty) *was_empty = tokens.empty();
  if (tokens.empty()) return Eigen::VectorXd::Zero(we.dim());
  Eigen::VectorXd out = we.table.col(we.index_of(tokens[0]));
  for (size_t i = 1; i < tokens.size(); ++i)
    out = out.cwiseMax(we.table.col(we.index_of(tokens[i])));
  return out;
}

GruParams init_gru(int n_h, int d, uint64_t seed) {
  auto rng = substream(seed, "gru-init");
  GruParams p;
  p.wx = xavier_uniform(n_h, d, rng);
  p.wr = xavier_uniform(n_h, d, rng);
  p.wh = xavier_uniform(n_h, d, rng);
  p.ux = xavier_uniform(n_h, n_h, rng);
  p.ur = xavier_uniform(n_h, n_h, rng);
  p.uh = xavier_uniform(n_h, n_h, rng);
  p.bx = Eigen::MatrixXd::Zero(n_h, 1);
  p.br = Eigen::MatrixXd::Zero(n_h, 1);
  p.bh = Eigen::MatrixXd::Zero(n_h, 1);
  return p;
}

GruParams zeros_like(const GruParams& p) {
  GruParams z;
  z.wx = Eigen::MatrixXd::Zero(p.wx.rows(), p.wx.cols());
  z.wr = Eigen::MatrixXd::Zero(p.wr.rows(), p.wr.cols());
  z.wh = Eigen::MatrixXd::Zero(p.wh.rows(), p.wh.cols());
  z.ux = Eigen::MatrixXd::Zero(p.ux.rows(), p.ux.cols());
  z.ur = Eigen::MatrixXd::Zero(p.ur.rows(), p.ur.cols());
  z.uh = Eigen::MatrixXd::Zero(p.uh.rows(), p.uh.cols());
  z.bx = Eigen::MatrixXd::Zero(p.bx.rows(), 1);
  z.br = Eigen::MatrixXd::Zero(p.br.rows(), 1);
  z.bh = Eigen::MatrixXd::Zero(p.bh.rows(), 1);
  return z;
}

std::vector<NamedTensor> tensor_list(GruParams& params, GruParams& grads) {
  return {
      {"gru.wx", &params.wx, &grads.wx}, {"gru.ux", &params.ux, &grads.ux},
      {"gru.bx", &params.bx, &grads.bx}, {"gru.wr", &params.wr, &grads.wr},
      {"gru.ur", &params.ur, &grads.ur}, {"gru.br", &params.br, &grads.br},
      {"gru.wh", &params.wh, &grads.wh}, {"gru.uh", &params.uh, &grads.uh},
      {"gru.bh", &params.bh, &grads.bh},
  };
}

Eigen::VectorXd gru_forward(const GruParams& p, const std::vector<int>& seq,
                            const Eigen::MatrixXd& inputs, GruCache* cache) {
  if (seq.empty()) throw ContractError("gru requires a non-empty sequence");
  int n_h = p.hidden();
  Eigen::VectorXd h = Eigen::VectorXd::Zero(n_h);
  if (cache) {
    cache->x.clear(); cache->r.clear(); cache->htilde.clear();
    cache->h.clear(); cache->uh_prev.clear();
  }
  for (int idx : seq) {
    const auto i_n = inputs.col(idx);
    Eigen::VectorXd x = (p.wx * i_n + p.ux * h + p.bx.col(0)).unaryExpr([](double z) { return sigmoid(z); });
    Eigen::VectorXd r = (p.wr * i_n + p.ur * h + p.br.col(0)).unaryExpr([](double z) { return sigmoid(z); });
    Eigen::VectorXd uh = p.uh * h;
    Eigen::VectorXd htilde = (p.wh * i_n + r.cwiseProduct(uh) + p.bh.col(0)).array().tanh();
    Eigen::VectorXd h_next = (1.0 - x.array()).matrix().cwiseProduct(h) + x.cwiseProduct(htilde);
    if (cache) {
      cache->x.push_back(x);
      cache->r.push_back(r);
      cache->htilde.push_back(htilde);
      cache->uh_prev.push_back(uh);
      cache->h.push_back(h_next);
    }
    h = std::move(h_next);
  }
  return h;
}

Eigen::VectorXd gru_encode(const GruParams& p, const std::vector<Eigen::VectorXd>& seq) {
  if (seq.empty()) throw ContractError("gru requires a non-empty sequence");
  Eigen::MatrixXd inputs(seq[0].size(), seq.size());
  std::vector<int> idx(seq.size());
  for (size_t i = 0; i < seq.size(); ++i) {
    inputs.col(i) = seq[i];
    idx[i] = static_cast<int>(i);
  }
  return gru_forward(p, idx, inputs);
}

void gru_backward(const GruParams& p, const std::vector<int>& seq, const Eigen::MatrixXd& inputs,
                  const GruCache& cache, const std::vector<Eigen::VectorXd>& d_h_steps,
                  GruParams& grads, Eigen::MatrixXd* d_inputs) {
  int n = static_cast<int>(seq.size());
  if (n == 0 || cache.h.size() != static_cast<size_t>(n) ||
      d_h_steps.size() != static_cast<size_t>(n))
    throw ContractError("gru backward cache/step mismatch");
  int n_h = p.hidden();
  Eigen::VectorXd dh = Eigen::VectorXd::Zero(n_h);
  for (int t = n - 1; t >= 0; --t) {
    dh += d_h_steps[t];
    const Eigen::VectorXd& x = cache.x[t];
    const Eigen::VectorXd& r = cache.r[t];
    const Eigen::VectorXd& htilde = cache.htilde[t];
    const Eigen::VectorXd& uh = cache.uh_prev[t];
    Eigen::VectorXd h_prev = t == 0 ? Eigen::VectorXd::Zero(n_h) : cache.h[t - 1];
    const auto i_n = inputs.col(seq[t]);

    Eigen::VectorXd dx = dh.cwiseProduct(htilde - h_prev);
    Eigen::VectorXd dhtilde = dh.cwiseProduct(x);
    Eigen::VectorXd dh_prev = dh.cwiseProduct((1.0 - x.array()).matrix());

    Eigen::VectorXd dpre_h = dhtilde.cwiseProduct((1.0 - htilde.array().square()).matrix());
    grads.wh += dpre_h * i_n.transpose();
    grads.bh.col(0) += dpre_h;
    Eigen::VectorXd dr = dpre_h.cwiseProduct(uh);
    grads.uh += dpre_h.cwiseProduct(r) * h_prev.transpose();
    dh_prev += p.uh.transpose() * dpre_h.cwiseProduct(r);
    Eigen::VectorXd di = p.wh.transpose() * dpre_h;

    Eigen::VectorXd dpre_r = dr.cwiseProduct(r).cwiseProduct((1.0 - r.array()).matrix());
    grads.wr += dpre_r * i_n.transpose();
    grads.ur += dpre_r * h_prev.transpose();
    grads.br.col(0) += dpre_r;
    dh_prev += p.ur.transpose() * dpre_r;
    di += p.wr.transpose() * dpre_r;

    Eigen::VectorXd dpre_x = dx.cwiseProduct(x).cwiseProduct((1.0 - x.array()).matrix());
    grads.wx += dpre_x * i_n.transpose();
    grads.ux += dpre_x * h_prev.transpose();
    grads.bx.col(0) += dpre_x;
    dh_prev += p.ux.transpose() * dpre_x;
    di += p.wx.transpose() * dpre_x;

    if (d_inputs) d_inputs->col(seq[t]) += di;
    dh = std::move(dh_prev);
  }
}

Eigen::VectorXd SourceEncoder::encode_user(const std::vector<int>& seq) const {
  if (seq.empty()) throw ContractError("cannot encode a user with no source interactions");
  std::vector<int> tail = seq;
  if (static_cast<int>(tail.size()) > max_seq)
    tail.erase(tail.begin(), tail.end() - max_seq);
  return gru_forward(gru, tail, item_vecs);
}

SourceEncoder train_source_encoder(const std::vector<std::string>& item_texts,
                                   const std::vector<std::vector<int>>& sequences,
                                   const std::vector<int>& validation_users,
                                   const SourceTrainConfig& cfg, uint64_t seed,
                                   std::vector<std::pair<double, double>>* log) {
  SourceEncoder enc;
  enc.max_seq = cfg.max_seq;
  enc.words = train_word_embeddings(item_texts, cfg.d_w, seed, cfg.w2v);
  int n_items = static_cast<int>(item_texts.size());
  enc.item_vecs.resize(cfg.d_w, n_items);
  int empty_descriptions = 0;
  for (int i = 0; i < n_items; ++i) {
    bool was_empty = false;
    enc.item_vecs.col(i) = embed_item_text(enc.words, tokenize(item_texts[i]), &was_empty);
    empty_descriptions += was_empty;
  }
  if (empty_descriptions > 0)
    std::fprintf(stderr, "warning: %d item descriptions are empty after tokenization\n",
                 empty_descriptions);

  enc.gru = init_gru(cfg.n_h, cfg.d_w, seed);
  bool mapped = cfg.n_h != cfg.d_w;
  if (mapped) {
    auto rng = substream(seed, "src-item-map");
    enc.item_map = xavier_uniform(cfg.n_h, cfg.d_w, rng);
  }

  int n_users = static_cast<int>(sequences.size());
  std::vector<std::vector<int>> positives(n_users);
  std::vector<int> active_users;
  for (int u = 0; u < n_users; ++u) {
    if (sequences[u].empty()) continue;
    auto items = sequences[u];
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    positives[u] = std::move(items);
    active_users.push_back(u);
  }
  if (active_users.empty()) throw ContractError("no user has source interactions");

  GruParams grads = zeros_like(enc.gru);
  Eigen::MatrixXd map_grad =
      mapped ? Eigen::MatrixXd::Zero(cfg.n_h, cfg.d_w) : Eigen::MatrixXd();
  auto tensors = tensor_list(enc.gru, grads);
  if (mapped) tensors.push_back({"src.item_map", &enc.item_map, &map_grad});
  AdamOptimizer opt(cfg.lr);

  auto validate = [&]() {
    double total = 0;
    int counted = 0;
    Eigen::MatrixXd scoring = enc.scoring_items();
    for (int u : validation_users) {
      if (u < 0 || u >= n_users || sequences[u].size() < 2) continue;
      std::vector<int> prefix(sequences[u].begin(), sequences[u].end() - 1);
      Eigen::VectorXd h = enc.encode_user(prefix);
      Eigen::VectorXd scores = scoring.transpose() * h;
      std::vector<int> order(n_items);
      for (int i = 0; i < n_items; ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
      });
      int target = sequences[u].back();
      for (int rank = 0; rank < n_items; ++rank)
        if (order[rank] == target) {
          total += 1.0 / std::log2(double(rank) + 2.0);
          break;
        }
      ++counted;
    }
    return counted > 0 ? total / counted : 0.0;
  };

  GruParams best_gru = enc.gru;
  Eigen::MatrixXd best_map = enc.item_map;
  double best_score = -1e300;
  int bad_epochs = 0;
  auto order_rng = substream(seed, "src-order");
  GruCache cache;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    auto neg_rng = substream(seed, "src-neg-" + std::to_string(epoch));
    std::vector<int> order = active_users;
    std::shuffle(order.begin(), order.end(), order_rng);
    double epoch_loss = 0;
    int pending = 0;
    zero_grads(tensors);
    for (int u : order) {
      std::vector<int> tail = sequences[u];
      if (static_cast<int>(tail.size()) > cfg.max_seq)
        tail.erase(tail.begin(), tail.end() - cfg.max_seq);
      Eigen::VectorXd h = gru_forward(enc.gru, tail, enc.item_vecs, &cache);

      std::vector<char> mask(n_items, 0);
      for (int i : positives[u]) mask[i] = 1;
      Eigen::VectorXd dh = Eigen::VectorXd::Zero(cfg.n_h);
      for (int pos : positives[u]) {
        auto negs = sample_negatives(mask, cfg.negatives, neg_rng);
        auto accumulate = [&](int item, double y) {
          Eigen::VectorXd v = mapped ? Eigen::VectorXd(enc.item_map * enc.item_vecs.col(item))
                                     : Eigen::VectorXd(enc.item_vecs.col(item));
          double yhat = sigmoid(h.dot(v));
          double clamped = std::clamp(yhat, 1e-7, 1.0 - 1e-7);
          epoch_loss -= y * std::log(clamped) + (1.0 - y) * std::log(1.0 - clamped);
          double g = yhat - y;
          dh += g * v;
          if (mapped) map_grad += g * h * enc.item_vecs.col(item).transpose();
        };
        accumulate(pos, 1.0);
        for (int neg : negs) accumulate(neg, 0.0);
        ++pending;
      }
      std::vector<Eigen::VectorXd> d_steps(tail.size(), Eigen::VectorXd::Zero(cfg.n_h));
      d_steps.back() = dh;
      gru_backward(enc.gru, tail, enc.item_vecs, cache, d_steps, grads);
      if (pending >= cfg.batch) {
        opt.step(tensors);
        zero_grads(tensors);
        pending = 0;
      }
    }
    if (pending > 0) {
      opt.step(tensors);
      zero_grads(tensors);
    }
    if (!std::isfinite(epoch_loss)) throw TrainingError("source training diverged");

    double score = validation_users.empty() ? -epoch_loss : validate();
    if (log) log->emplace_back(epoch_loss, score);
    if (score > best_score) {
      best_score = score;
      best_gru = enc.gru;
      best_map = enc.item_map;
      bad_epochs = 0;
    } else if (++bad_epochs > cfg.patience) {
      break;
    }
  }
  enc.gru = best_gru;
  enc.item_map = best_map;
  return enc;
}

}  // namespace hcdir
