#include "hcdir/tahin.hpp"

#include <algorithm>

#include "hcdir/rng.hpp"

namespace hcdir {

namespace {

constexpr double kProbClamp = 1e-7;

// score.row(h) = a.segment(h)^T feat.middleRows(h): collapses per-head feature
// blocks to one scalar stream per head.
void head_scores(const Eigen::MatrixXd& feat, const Eigen::MatrixXd& a, int H,
                 Eigen::MatrixXd& score) {
  int S = static_cast<int>(feat.rows());
  int sh = S / H;
  score.resize(H, feat.cols());
  for (int h = 0; h < H; ++h)
    score.row(h) = a.col(0).segment(h * sh, sh).transpose() * feat.middleRows(h * sh, sh);
}

// Backward of head_scores: given d_score, accumulate into d_feat and d_a.
void head_scores_backward(const Eigen::MatrixXd& feat, const Eigen::MatrixXd& a,
                          const Eigen::MatrixXd& d_score, int H, Eigen::MatrixXd& d_feat,
                          Eigen::MatrixXd& d_a) {
  int S = static_cast<int>(feat.rows());
  int sh = S / H;
  d_feat.setZero(feat.rows(), feat.cols());
  for (int h = 0; h < H; ++h) {
    d_feat.middleRows(h * sh, sh) = a.col(0).segment(h * sh, sh) * d_score.row(h);
    d_a.col(0).segment(h * sh, sh) += feat.middleRows(h * sh, sh) * d_score.row(h).transpose();
  }
}

bool finite(const Eigen::MatrixXd& m) { return m.size() == 0 || m.allFinite(); }

}  // namespace

std::vector<int> TahinConfig::paths_for_type(NodeType t) const {
  std::vector<int> out;
  for (size_t i = 0; i < paths.size(); ++i)
    if (paths[i].head() == t) out.push_back(static_cast<int>(i));
  return out;
}

int TahinConfig::path_index(const std::string& name) const {
  for (size_t i = 0; i < paths.size(); ++i)
    if (paths[i].name == name) return static_cast<int>(i);
  throw ContractError("meta-path '" + name + "' is not configured");
}

void TahinConfig::validate() const {
  if (S <= 0 || H <= 0 || S % H != 0) throw ConfigError("S must be positive and divisible by H");
  if (K < 1) throw ConfigError("round count K must be >= 1");
  if (S_a <= 0) throw ConfigError("semantic attention width must be positive");
  for (const auto& p : paths)
    if (p.head() != p.tail())
      throw ConfigError("meta-path " + p.name + " must start and end on the same node type");
}

TahinParams init_tahin_params(const TahinConfig& cfg, const HeteroGraph& g, uint64_t seed) {
  cfg.validate();
  TahinParams p;
  p.cfg = cfg;
  auto rng = substream(seed, "tahin-init");

  for (int t = 0; t < kNumNodeTypes; ++t) {
    int n = g.count(static_cast<NodeType>(t));
    const Eigen::MatrixXd& feat = g.features(static_cast<NodeType>(t));
    if (feat.size() > 0) {
      // portrait-style init: project the node features into the embedding space
      Eigen::MatrixXd projection = xavier_uniform(cfg.S, static_cast<int>(feat.rows()), rng);
      p.h0[t] = projection * feat;
    } else {
      double bound = 1.0 / std::sqrt(double(cfg.S));
      std::uniform_real_distribution<double> dist(-bound, bound);
      p.h0[t].resize(cfg.S, n);
      for (int c = 0; c < n; ++c)
        for (int r = 0; r < cfg.S; ++r) p.h0[t](r, c) = dist(rng);
    }
  }

  auto make_attn = [&]() {
    AttnNet a;
    a.w_self = xavier_uniform(cfg.S, cfg.S, rng);
    a.w_neigh = xavier_uniform(cfg.S, cfg.S, rng);
    a.a_self = xavier_uniform(cfg.S, 1, rng);
    a.a_neigh = xavier_uniform(cfg.S, 1, rng);
    return a;
  };
  for (int r = 0; r < kNumRelations; ++r) {
    p.proj[r] = xavier_uniform(cfg.S, cfg.S, rng);
    p.rel_attn[r] = make_attn();
  }
  for (size_t i = 0; i < cfg.paths.size(); ++i) p.path_attn.push_back(make_attn());
  for (int t = 0; t < kNumNodeTypes; ++t) {
    p.sem[t].q = xavier_uniform(cfg.S_a, 1, rng);
    p.sem[t].w = xavier_uniform(cfg.S_a, cfg.S, rng);
    p.sem[t].b = Eigen::MatrixXd::Zero(cfg.S_a, 1);
  }
  p.w1 = xavier_uniform(cfg.S, 2 * cfg.S, rng);
  p.b1 = Eigen::MatrixXd::Zero(cfg.S, 1);
  p.w2 = xavier_uniform(cfg.S, 2 * cfg.S, rng);
  p.b2 = Eigen::MatrixXd::Zero(cfg.S, 1);
  return p;
}

TahinParams zeros_like(const TahinParams& p) {
  TahinParams z;
  z.cfg = p.cfg;
  for (int t = 0; t < kNumNodeTypes; ++t) {
    z.h0[t] = Eigen::MatrixXd::Zero(p.h0[t].rows(), p.h0[t].cols());
    z.sem[t].q = Eigen::MatrixXd::Zero(p.sem[t].q.rows(), 1);
    z.sem[t].w = Eigen::MatrixXd::Zero(p.sem[t].w.rows(), p.sem[t].w.cols());
    z.sem[t].b = Eigen::MatrixXd::Zero(p.sem[t].b.rows(), 1);
  }
  for (int r = 0; r < kNumRelations; ++r) {
    z.proj[r] = Eigen::MatrixXd::Zero(p.proj[r].rows(), p.proj[r].cols());
    z.rel_attn[r].w_self = Eigen::MatrixXd::Zero(p.cfg.S, p.cfg.S);
    z.rel_attn[r].w_neigh = Eigen::MatrixXd::Zero(p.cfg.S, p.cfg.S);
    z.rel_attn[r].a_self = Eigen::MatrixXd::Zero(p.cfg.S, 1);
    z.rel_attn[r].a_neigh = Eigen::MatrixXd::Zero(p.cfg.S, 1);
  }
  for (size_t i = 0; i < p.path_attn.size(); ++i) {
    AttnNet a;
    a.w_self = Eigen::MatrixXd::Zero(p.cfg.S, p.cfg.S);
    a.w_neigh = Eigen::MatrixXd::Zero(p.cfg.S, p.cfg.S);
    a.a_self = Eigen::MatrixXd::Zero(p.cfg.S, 1);
    a.a_neigh = Eigen::MatrixXd::Zero(p.cfg.S, 1);
    z.path_attn.push_back(std::move(a));
  }
  z.w1 = Eigen::MatrixXd::Zero(p.w1.rows(), p.w1.cols());
  z.b1 = Eigen::MatrixXd::Zero(p.b1.rows(), 1);
  z.w2 = Eigen::MatrixXd::Zero(p.w2.rows(), p.w2.cols());
  z.b2 = Eigen::MatrixXd::Zero(p.b2.rows(), 1);
  return z;
}

std::vector<NamedTensor> tensor_list(TahinParams& params, TahinParams& grads) {
  std::vector<NamedTensor> out;
  for (int t = 0; t < kNumNodeTypes; ++t)
    out.push_back({std::string("h0.") + node_type_name(static_cast<NodeType>(t)), &params.h0[t],
                   &grads.h0[t]});
  for (int r = 0; r < kNumRelations; ++r) {
    std::string base = std::string("rel.") + kRelations[r].name + ".";
    out.push_back({base + "proj", &params.proj[r], &grads.proj[r]});
    out.push_back({base + "w_self", &params.rel_attn[r].w_self, &grads.rel_attn[r].w_self});
    out.push_back({base + "w_neigh", &params.rel_attn[r].w_neigh, &grads.rel_attn[r].w_neigh});
    out.push_back({base + "a_self", &params.rel_attn[r].a_self, &grads.rel_attn[r].a_self});
    out.push_back({base + "a_neigh", &params.rel_attn[r].a_neigh, &grads.rel_attn[r].a_neigh});
  }
  for (size_t i = 0; i < params.path_attn.size(); ++i) {
    std::string base = "path." + params.cfg.paths[i].name + ".";
    out.push_back({base + "w_self", &params.path_attn[i].w_self, &grads.path_attn[i].w_self});
    out.push_back({base + "w_neigh", &params.path_attn[i].w_neigh, &grads.path_attn[i].w_neigh});
    out.push_back({base + "a_self", &params.path_attn[i].a_self, &grads.path_attn[i].a_self});
    out.push_back({base + "a_neigh", &params.path_attn[i].a_neigh, &grads.path_attn[i].a_neigh});
  }
  for (int t = 0; t < kNumNodeTypes; ++t) {
    std::string base = std::string("sem.") + node_type_name(static_cast<NodeType>(t)) + ".";
    out.push_back({base + "q", &params.sem[t].q, &grads.sem[t].q});
    out.push_back({base + "w", &params.sem[t].w, &grads.sem[t].w});
    out.push_back({base + "b", &params.sem[t].b, &grads.sem[t].b});
  }
  out.push_back({"update.w1", &params.w1, &grads.w1});
  out.push_back({"update.b1", &params.b1, &grads.b1});
  out.push_back({"update.w2", &params.w2, &grads.w2});
  out.push_back({"update.b2", &params.b2, &grads.b2});
  return out;
}

void check_params_finite(const TahinParams& p) {
  bool ok = true;
  for (int t = 0; t < kNumNodeTypes; ++t)
    ok = ok && finite(p.h0[t]) && finite(p.sem[t].q) && finite(p.sem[t].w) && finite(p.sem[t].b);
  for (int r = 0; r < kNumRelations; ++r)
    ok = ok && finite(p.proj[r]) && finite(p.rel_attn[r].w_self) && finite(p.rel_attn[r].w_neigh) &&
         finite(p.rel_attn[r].a_self) && finite(p.rel_attn[r].a_neigh);
  for (const auto& a : p.path_attn)
    ok = ok && finite(a.w_self) && finite(a.w_neigh) && finite(a.a_self) && finite(a.a_neigh);
  ok = ok && finite(p.w1) && finite(p.b1) && finite(p.w2) && finite(p.b2);
  if (!ok) throw NumericError("non-finite value in model parameters");
}

NeighborCache build_neighbor_cache(const HeteroGraph& g, const TahinConfig& cfg) {
  NeighborCache nc;

  for (int t = 0; t < kNumNodeTypes; ++t) {
    auto& oh = nc.one_hop[t];
    int n = g.count(static_cast<NodeType>(t));
    oh.off.assign(n + 1, 0);
    if (g.type_removed(static_cast<NodeType>(t))) continue;
    // relations leaving this type, in enum order = ascending destination type
    std::vector<int> rels;
    for (int r = 0; r < kNumRelations; ++r)
      if (kRelations[r].src == static_cast<NodeType>(t) && !g.relation_removed(static_cast<RelationKind>(r)))
        rels.push_back(r);
    std::sort(rels.begin(), rels.end(), [](int a, int b) {
      return static_cast<int>(kRelations[a].dst) < static_cast<int>(kRelations[b].dst);
    });
    for (int e = 0; e < n; ++e) {
      int deg = 0;
      for (int r : rels) {
        auto [b, en] = g.successors(static_cast<RelationKind>(r), e);
        deg += static_cast<int>(en - b);
      }
      oh.off[e + 1] = oh.off[e] + deg;
    }
    oh.nbr.resize(oh.off[n]);
    oh.rel.resize(oh.off[n]);
    for (int e = 0; e < n; ++e) {
      int k = oh.off[e];
      for (int r : rels) {
        auto [b, en] = g.successors(static_cast<RelationKind>(r), e);
        for (const int* p = b; p != en; ++p) {
          oh.nbr[k] = *p;
          oh.rel[k] = static_cast<int8_t>(r);
          ++k;
        }
      }
    }
  }

  // Deduplicated meta-path neighbor sets via frontier marking.
  for (const auto& path : cfg.paths) {
    NeighborCache::PathAdj adj;
    NodeType t = path.head();
    int n = g.count(t);
    adj.off.assign(n + 1, 0);
    bool usable = true;
    for (NodeType ty : path.types)
      if (g.type_removed(ty)) usable = false;
    if (usable && n > 0) {
      std::array<std::vector<char>, kNumNodeTypes> mark;
      for (int ty = 0; ty < kNumNodeTypes; ++ty)
        mark[ty].assign(g.count(static_cast<NodeType>(ty)), 0);
      std::vector<int> frontier, next;
      std::vector<std::vector<int>> per_node(n);
      for (int e = 0; e < n; ++e) {
        frontier.assign(1, e);
        for (size_t step = 0; step < path.steps.size(); ++step) {
          RelationKind rel = path.steps[step];
          NodeType dst = relation_info(rel).dst;
          auto& m = mark[static_cast<int>(dst)];
          next.clear();
          for (int id : frontier) {
            auto [b, en] = g.successors(rel, id);
            for (const int* p = b; p != en; ++p)
              if (!m[*p]) {
                m[*p] = 1;
                next.push_back(*p);
              }
          }
          for (int id : next) m[id] = 0;
          frontier.swap(next);
        }
        std::sort(frontier.begin(), frontier.end());
        auto& lst = per_node[e];
        for (int id : frontier)
          if (id != e) lst.push_back(id);
      }
      for (int e = 0; e < n; ++e) adj.off[e + 1] = adj.off[e] + static_cast<int>(per_node[e].size());
      adj.nbr.resize(adj.off[n]);
      for (int e = 0; e < n; ++e)
        std::copy(per_node[e].begin(), per_node[e].end(), adj.nbr.begin() + adj.off[e]);
      adj.globally_empty = adj.nbr.empty();
    }
    nc.paths.push_back(std::move(adj));
  }
  return nc;
}

// Wait-free note: forward writes disjoint per-node columns; safe to shard if
// ever needed. Kept sequential for bit-stable reductions.
void encode_all(const HeteroGraph& g, const NeighborCache& nc, const TahinParams& params,
                TahinForward& fwd) {
  check_params_finite(params);
  const TahinConfig& cfg = params.cfg;
  const int S = cfg.S, H = cfg.H;
  fwd.rounds.clear();
  fwd.rounds.resize(cfg.K);

  std::array<Eigen::MatrixXd, kNumNodeTypes> h_in = params.h0;
  for (int t = 0; t < kNumNodeTypes; ++t)
    if (g.type_removed(static_cast<NodeType>(t))) h_in[t] = Eigen::MatrixXd(S, 0);

  for (int round = 0; round < cfg.K; ++round) {
    auto& rc = fwd.rounds[round];
    rc.h_in = h_in;

    // per-relation attention features and head scores
    for (int r = 0; r < kNumRelations; ++r) {
      if (g.relation_removed(static_cast<RelationKind>(r)) || g.edge_count(static_cast<RelationKind>(r)) == 0) {
        rc.trans_neigh[r].resize(S, 0);
        rc.rel_self_feat[r].resize(S, 0);
        rc.rel_neigh_feat[r].resize(S, 0);
        rc.rel_self_score[r].resize(H, 0);
        rc.rel_neigh_score[r].resize(H, 0);
        continue;
      }
      int src = static_cast<int>(kRelations[r].src);
      int dst = static_cast<int>(kRelations[r].dst);
      rc.trans_neigh[r] = params.proj[r] * h_in[dst];
      rc.rel_self_feat[r] = params.rel_attn[r].w_self * h_in[src];
      rc.rel_neigh_feat[r] = params.rel_attn[r].w_neigh * rc.trans_neigh[r];
      head_scores(rc.rel_self_feat[r], params.rel_attn[r].a_self, H, rc.rel_self_score[r]);
      head_scores(rc.rel_neigh_feat[r], params.rel_attn[r].a_neigh, H, rc.rel_neigh_score[r]);
    }

    // relational aggregation
    std::vector<double> logits;
    for (int t = 0; t < kNumNodeTypes; ++t) {
      int n = static_cast<int>(h_in[t].cols());
      const auto& oh = nc.one_hop[t];
      rc.h1[t].setZero(S, n);
      rc.alpha[t].assign(oh.nbr.size(), 0.0);
      for (int e = 0; e < n; ++e) {
        int lo = oh.off[e], hi = oh.off[e + 1];
        if (lo == hi) continue;  // isolated node keeps a zero h1
        logits.resize(hi - lo);
        for (int k = lo; k < hi; ++k) {
          int r = oh.rel[k];
          int w = oh.nbr[k];
          double acc = 0;
          for (int h = 0; h < H; ++h)
            acc += leaky_relu(rc.rel_self_score[r](h, e) + rc.rel_neigh_score[r](h, w));
          logits[k - lo] = acc / H;
        }
        softmax_inplace(logits.data(), hi - lo);
        Eigen::VectorXd m = Eigen::VectorXd::Zero(S);
        for (int k = lo; k < hi; ++k) {
          rc.alpha[t][k] = logits[k - lo];
          int dst = static_cast<int>(kRelations[oh.rel[k]].dst);
          m += logits[k - lo] * h_in[dst].col(oh.nbr[k]);
        }
        rc.h1[t].col(e) = m.array().tanh();
      }
    }

    // node-level attention per meta-path
    rc.path_self_feat.resize(cfg.paths.size());
    rc.path_neigh_feat.resize(cfg.paths.size());
    rc.path_self_score.resize(cfg.paths.size());
    rc.path_neigh_score.resize(cfg.paths.size());
    rc.beta.resize(cfg.paths.size());
    rc.h_path.resize(cfg.paths.size());
    for (size_t p = 0; p < cfg.paths.size(); ++p) {
      int t = static_cast<int>(cfg.paths[p].head());
      int n = static_cast<int>(h_in[t].cols());
      const auto& adj = nc.paths[p];
      rc.h_path[p].setZero(S, n);
      rc.beta[p].assign(adj.nbr.size(), 0.0);
      if (adj.globally_empty || n == 0) {
        rc.path_self_feat[p].resize(S, 0);
        rc.path_neigh_feat[p].resize(S, 0);
        rc.path_self_score[p].resize(H, 0);
        rc.path_neigh_score[p].resize(H, 0);
        continue;
      }
      rc.path_self_feat[p] = params.path_attn[p].w_self * h_in[t];
      rc.path_neigh_feat[p] = params.path_attn[p].w_neigh * h_in[t];
      head_scores(rc.path_self_feat[p], params.path_attn[p].a_self, H, rc.path_self_score[p]);
      head_scores(rc.path_neigh_feat[p], params.path_attn[p].a_neigh, H, rc.path_neigh_score[p]);
      const auto& ss = rc.path_self_score[p];
      const auto& ns = rc.path_neigh_score[p];
      for (int e = 0; e < n; ++e) {
        int lo = adj.off[e], hi = adj.off[e + 1];
        if (lo == hi) continue;
        logits.resize(hi - lo);
        for (int k = lo; k < hi; ++k) {
          double acc = 0;
          for (int h = 0; h < H; ++h) acc += leaky_relu(ss(h, e) + ns(h, adj.nbr[k]));
          logits[k - lo] = acc / H;
        }
        softmax_inplace(logits.data(), hi - lo);
        Eigen::VectorXd m = Eigen::VectorXd::Zero(S);
        for (int k = lo; k < hi; ++k) {
          rc.beta[p][k] = logits[k - lo];
          m += logits[k - lo] * h_in[t].col(adj.nbr[k]);
        }
        rc.h_path[p].col(e) = m.array().tanh();
      }
    }

    // semantic fusion: global per-type weights, averaged over all nodes
    for (int t = 0; t < kNumNodeTypes; ++t) {
      int n = static_cast<int>(h_in[t].cols());
      rc.present[t].clear();
      rc.gamma[t].clear();
      rc.h2[t].setZero(S, n);
      if (n == 0) continue;
      for (int p : cfg.paths_for_type(static_cast<NodeType>(t)))
        if (!nc.paths[p].globally_empty) rc.present[t].push_back(p);
      if (rc.present[t].empty()) continue;
      std::vector<double> w(rc.present[t].size());
      for (size_t j = 0; j < rc.present[t].size(); ++j) {
        int p = rc.present[t][j];
        Eigen::MatrixXd c =
            ((params.sem[t].w * rc.h_path[p]).colwise() + params.sem[t].b.col(0)).array().tanh();
        w[j] = (params.sem[t].q.col(0).transpose() * c).sum() / double(n);
      }
      softmax_inplace(w.data(), static_cast<int>(w.size()));
      rc.gamma[t] = w;
      for (size_t j = 0; j < rc.present[t].size(); ++j)
        rc.h2[t] += w[j] * rc.h_path[rc.present[t][j]];
    }

    // node update
    for (int t = 0; t < kNumNodeTypes; ++t) {
      int n = static_cast<int>(h_in[t].cols());
      Eigen::MatrixXd cat1(2 * S, n);
      cat1.topRows(S) = rc.h1[t];
      cat1.bottomRows(S) = rc.h2[t];
      rc.inner[t] = (params.w1 * cat1).colwise() + params.b1.col(0);
      Eigen::MatrixXd cat2(2 * S, n);
      cat2.topRows(S) = h_in[t];
      cat2.bottomRows(S) = rc.inner[t];
      rc.pre2[t] = (params.w2 * cat2).colwise() + params.b2.col(0);
      h_in[t] = rc.pre2[t].cwiseMax(0.0);
    }
  }
  fwd.h_final = h_in;
}

void encode_backward(const HeteroGraph& g, const NeighborCache& nc, const TahinParams& params,
                     const TahinForward& fwd,
                     std::array<Eigen::MatrixXd, kNumNodeTypes>& d_final, TahinParams& grads) {
  const TahinConfig& cfg = params.cfg;
  const int S = cfg.S, H = cfg.H;

  std::array<Eigen::MatrixXd, kNumNodeTypes> d_out = d_final;

  for (int round = cfg.K - 1; round >= 0; --round) {
    const auto& rc = fwd.rounds[round];
    std::array<Eigen::MatrixXd, kNumNodeTypes> d_in;
    std::array<Eigen::MatrixXd, kNumNodeTypes> d_h1, d_h2;

    // node update backward
    for (int t = 0; t < kNumNodeTypes; ++t) {
      int n = static_cast<int>(rc.h_in[t].cols());
      d_in[t].setZero(S, n);
      d_h1[t].setZero(S, n);
      d_h2[t].setZero(S, n);
      if (n == 0 || d_out[t].size() == 0) continue;
      Eigen::MatrixXd d_pre2 =
          d_out[t].cwiseProduct((rc.pre2[t].array() > 0.0).cast<double>().matrix());
      Eigen::MatrixXd cat2(2 * S, n);
      cat2.topRows(S) = rc.h_in[t];
      cat2.bottomRows(S) = rc.inner[t];
      grads.w2 += d_pre2 * cat2.transpose();
      grads.b2.col(0) += d_pre2.rowwise().sum();
      Eigen::MatrixXd d_cat2 = params.w2.transpose() * d_pre2;
      d_in[t] += d_cat2.topRows(S);
      Eigen::MatrixXd d_inner = d_cat2.bottomRows(S);
      Eigen::MatrixXd cat1(2 * S, n);
      cat1.topRows(S) = rc.h1[t];
      cat1.bottomRows(S) = rc.h2[t];
      grads.w1 += d_inner * cat1.transpose();
      grads.b1.col(0) += d_inner.rowwise().sum();
      Eigen::MatrixXd d_cat1 = params.w1.transpose() * d_inner;
      d_h1[t] = d_cat1.topRows(S);
      d_h2[t] = d_cat1.bottomRows(S);
    }

    // semantic backward
    std::vector<Eigen::MatrixXd> d_h_path(cfg.paths.size());
    for (size_t p = 0; p < cfg.paths.size(); ++p)
      d_h_path[p].setZero(S, rc.h_path[p].cols());
    for (int t = 0; t < kNumNodeTypes; ++t) {
      int n = static_cast<int>(rc.h_in[t].cols());
      if (n == 0 || rc.present[t].empty() || d_h2[t].size() == 0) continue;
      size_t np = rc.present[t].size();
      std::vector<double> d_gamma(np, 0.0);
      for (size_t j = 0; j < np; ++j) {
        int p = rc.present[t][j];
        d_gamma[j] = d_h2[t].cwiseProduct(rc.h_path[p]).sum();
        d_h_path[p] += rc.gamma[t][j] * d_h2[t];
      }
      double dot = 0;
      for (size_t j = 0; j < np; ++j) dot += d_gamma[j] * rc.gamma[t][j];
      for (size_t j = 0; j < np; ++j) {
        double d_w = rc.gamma[t][j] * (d_gamma[j] - dot);
        if (d_w == 0.0) continue;
        int p = rc.present[t][j];
        Eigen::MatrixXd c =
            ((params.sem[t].w * rc.h_path[p]).colwise() + params.sem[t].b.col(0)).array().tanh();
        double scale = d_w / double(n);
        grads.sem[t].q.col(0) += scale * c.rowwise().sum();
        Eigen::MatrixXd d_pre =
            (scale * params.sem[t].q.col(0)).asDiagonal() *
            (1.0 - c.array().square()).matrix();
        grads.sem[t].w += d_pre * rc.h_path[p].transpose();
        grads.sem[t].b.col(0) += d_pre.rowwise().sum();
        d_h_path[p] += params.sem[t].w.transpose() * d_pre;
      }
    }

    // node-level attention backward per path
    for (size_t p = 0; p < cfg.paths.size(); ++p) {
      const auto& adj = nc.paths[p];
      int t = static_cast<int>(cfg.paths[p].head());
      int n = static_cast<int>(rc.h_in[t].cols());
      if (adj.globally_empty || n == 0 || d_h_path[p].size() == 0) continue;
      const auto& ss = rc.path_self_score[p];
      const auto& ns = rc.path_neigh_score[p];
      Eigen::MatrixXd d_ss = Eigen::MatrixXd::Zero(H, n);
      Eigen::MatrixXd d_ns = Eigen::MatrixXd::Zero(H, n);
      std::vector<double> d_beta;
      for (int e = 0; e < n; ++e) {
        int lo = adj.off[e], hi = adj.off[e + 1];
        if (lo == hi) continue;
        Eigen::VectorXd ds = d_h_path[p].col(e).cwiseProduct(
            (1.0 - rc.h_path[p].col(e).array().square()).matrix());
        d_beta.resize(hi - lo);
        double dot = 0;
        for (int k = lo; k < hi; ++k) {
          d_beta[k - lo] = ds.dot(rc.h_in[t].col(adj.nbr[k]));
          d_in[t].col(adj.nbr[k]) += rc.beta[p][k] * ds;
          dot += d_beta[k - lo] * rc.beta[p][k];
        }
        for (int k = lo; k < hi; ++k) {
          double d_logit = rc.beta[p][k] * (d_beta[k - lo] - dot);
          if (d_logit == 0.0) continue;
          int w = adj.nbr[k];
          for (int h = 0; h < H; ++h) {
            double gh = d_logit / H * leaky_relu_grad(ss(h, e) + ns(h, w));
            d_ss(h, e) += gh;
            d_ns(h, w) += gh;
          }
        }
      }
      Eigen::MatrixXd d_feat;
      head_scores_backward(rc.path_self_feat[p], params.path_attn[p].a_self, d_ss, H, d_feat,
                           grads.path_attn[p].a_self);
      grads.path_attn[p].w_self += d_feat * rc.h_in[t].transpose();
      d_in[t] += params.path_attn[p].w_self.transpose() * d_feat;
      head_scores_backward(rc.path_neigh_feat[p], params.path_attn[p].a_neigh, d_ns, H, d_feat,
                           grads.path_attn[p].a_neigh);
      grads.path_attn[p].w_neigh += d_feat * rc.h_in[t].transpose();
      d_in[t] += params.path_attn[p].w_neigh.transpose() * d_feat;
    }

    // relational backward
    std::array<Eigen::MatrixXd, kNumRelations> d_rel_ss, d_rel_ns;
    for (int r = 0; r < kNumRelations; ++r) {
      d_rel_ss[r] = Eigen::MatrixXd::Zero(H, rc.rel_self_score[r].cols());
      d_rel_ns[r] = Eigen::MatrixXd::Zero(H, rc.rel_neigh_score[r].cols());
    }
    std::vector<double> d_alpha;
    for (int t = 0; t < kNumNodeTypes; ++t) {
      int n = static_cast<int>(rc.h_in[t].cols());
      const auto& oh = nc.one_hop[t];
      if (n == 0 || d_h1[t].size() == 0) continue;
      for (int e = 0; e < n; ++e) {
        int lo = oh.off[e], hi = oh.off[e + 1];
        if (lo == hi) continue;
        Eigen::VectorXd dm =
            d_h1[t].col(e).cwiseProduct((1.0 - rc.h1[t].col(e).array().square()).matrix());
        d_alpha.resize(hi - lo);
        double dot = 0;
        for (int k = lo; k < hi; ++k) {
          int dst = static_cast<int>(kRelations[oh.rel[k]].dst);
          d_alpha[k - lo] = dm.dot(rc.h_in[dst].col(oh.nbr[k]));
          d_in[dst].col(oh.nbr[k]) += rc.alpha[t][k] * dm;
          dot += d_alpha[k - lo] * rc.alpha[t][k];
        }
        for (int k = lo; k < hi; ++k) {
          double d_logit = rc.alpha[t][k] * (d_alpha[k - lo] - dot);
          if (d_logit == 0.0) continue;
          int r = oh.rel[k];
          int w = oh.nbr[k];
          for (int h = 0; h < H; ++h) {
            double gh = d_logit / H *
                        leaky_relu_grad(rc.rel_self_score[r](h, e) + rc.rel_neigh_score[r](h, w));
            d_rel_ss[r](h, e) += gh;
            d_rel_ns[r](h, w) += gh;
          }
        }
      }
    }
    for (int r = 0; r < kNumRelations; ++r) {
      if (rc.rel_self_score[r].cols() == 0) continue;
      int src = static_cast<int>(kRelations[r].src);
      int dst = static_cast<int>(kRelations[r].dst);
      Eigen::MatrixXd d_feat;
      head_scores_backward(rc.rel_self_feat[r], params.rel_attn[r].a_self, d_rel_ss[r], H, d_feat,
                           grads.rel_attn[r].a_self);
      grads.rel_attn[r].w_self += d_feat * rc.h_in[src].transpose();
      d_in[src] += params.rel_attn[r].w_self.transpose() * d_feat;
      head_scores_backward(rc.rel_neigh_feat[r], params.rel_attn[r].a_neigh, d_rel_ns[r], H,
                           d_feat, grads.rel_attn[r].a_neigh);
      grads.rel_attn[r].w_neigh += d_feat * rc.trans_neigh[r].transpose();
      Eigen::MatrixXd d_trans = params.rel_attn[r].w_neigh.transpose() * d_feat;
      grads.proj[r] += d_trans * rc.h_in[dst].transpose();
      d_in[dst] += params.proj[r].transpose() * d_trans;
    }

    d_out = std::move(d_in);
  }

  for (int t = 0; t < kNumNodeTypes; ++t)
    if (d_out[t].size() > 0 && grads.h0[t].cols() == d_out[t].cols()) grads.h0[t] += d_out[t];
}

// ---------------------------------------------------------------------------
// per-node contract operations

std::pair<Eigen::VectorXd, std::vector<WeightedNeighbor>> relational_aggregate(
    const HeteroGraph& g, const TahinParams& params, const NodeRef& e) {
  check_params_finite(params);
  const int S = params.cfg.S, H = params.cfg.H;
  auto neighbors = one_hop_neighbors(g, e);
  if (neighbors.empty()) return {Eigen::VectorXd::Zero(S), {}};

  const Eigen::VectorXd he = params.h0[static_cast<int>(e.type)].col(e.id);
  Eigen::VectorXd logits(neighbors.size());
  int sh = S / H;
  for (size_t j = 0; j < neighbors.size(); ++j) {
    RelationKind r = relation_between(e.type, neighbors[j].type);
    const AttnNet& net = params.rel_attn[static_cast<int>(r)];
    Eigen::VectorXd fs = net.w_self * he;
    Eigen::VectorXd fn = net.w_neigh * (params.proj[static_cast<int>(r)] *
                                        params.h0[static_cast<int>(neighbors[j].type)].col(neighbors[j].id));
    double acc = 0;
    for (int h = 0; h < H; ++h)
      acc += leaky_relu(net.a_self.col(0).segment(h * sh, sh).dot(fs.segment(h * sh, sh)) +
                        net.a_neigh.col(0).segment(h * sh, sh).dot(fn.segment(h * sh, sh)));
    logits[j] = acc / H;
  }
  Eigen::VectorXd alpha = softmax(logits);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(S);
  std::vector<WeightedNeighbor> weights;
  for (size_t j = 0; j < neighbors.size(); ++j) {
    m += alpha[j] * params.h0[static_cast<int>(neighbors[j].type)].col(neighbors[j].id);
    weights.push_back({neighbors[j], alpha[j]});
  }
  return {m.array().tanh(), weights};
}

std::pair<Eigen::VectorXd, std::vector<WeightedNeighbor>> node_attention_aggregate(
    const HeteroGraph& g, const TahinParams& params, const NodeRef& e, const MetaPath& rho) {
  check_params_finite(params);
  if (rho.head() != e.type || rho.tail() != e.type)
    throw ContractError("meta-path " + rho.name + " must start and end at type " +
                        node_type_name(e.type));
  const int S = params.cfg.S, H = params.cfg.H;
  int p = params.cfg.path_index(rho.name);
  const AttnNet& net = params.path_attn[p];

  auto enumerated = metapath_neighbors(g, e, rho);  // deduplicated by construction
  if (enumerated.empty()) return {Eigen::VectorXd::Zero(S), {}};

  const Eigen::MatrixXd& table = params.h0[static_cast<int>(e.type)];
  const Eigen::VectorXd he = table.col(e.id);
  Eigen::VectorXd fs = net.w_self * he;
  int sh = S / H;
  Eigen::VectorXd logits(enumerated.size());
  for (size_t j = 0; j < enumerated.size(); ++j) {
    Eigen::VectorXd fn = net.w_neigh * table.col(enumerated[j].first.id);
    double acc = 0;
    for (int h = 0; h < H; ++h)
      acc += leaky_relu(net.a_self.col(0).segment(h * sh, sh).dot(fs.segment(h * sh, sh)) +
                        net.a_neigh.col(0).segment(h * sh, sh).dot(fn.segment(h * sh, sh)));
    logits[j] = acc / H;
  }
  Eigen::VectorXd beta = softmax(logits);
  Eigen::VectorXd m = Eigen::VectorXd::Zero(S);
  std::vector<WeightedNeighbor> weights;
  for (size_t j = 0; j < enumerated.size(); ++j) {
    m += beta[j] * table.col(enumerated[j].first.id);
    weights.push_back({enumerated[j].first, beta[j]});
  }
  return {m.array().tanh(), weights};
}

std::pair<Eigen::MatrixXd, std::vector<std::pair<std::string, double>>> semantic_fuse(
    const TahinParams& params, NodeType type,
    const std::vector<std::pair<std::string, Eigen::MatrixXd>>& tables) {
  check_params_finite(params);
  if (tables.empty()) return {Eigen::MatrixXd(), {}};
  const SemanticAttn& sem = params.sem[static_cast<int>(type)];
  int n = static_cast<int>(tables[0].second.cols());
  std::vector<double> w(tables.size());
  for (size_t j = 0; j < tables.size(); ++j) {
    if (tables[j].second.cols() != n)
      throw ContractError("per-path embedding tables disagree on node count");
    Eigen::MatrixXd c = ((sem.w * tables[j].second).colwise() + sem.b.col(0)).array().tanh();
    w[j] = (sem.q.col(0).transpose() * c).sum() / double(n);
  }
  softmax_inplace(w.data(), static_cast<int>(w.size()));
  Eigen::MatrixXd h2 = Eigen::MatrixXd::Zero(tables[0].second.rows(), n);
  std::vector<std::pair<std::string, double>> gamma;
  for (size_t j = 0; j < tables.size(); ++j) {
    h2 += w[j] * tables[j].second;
    gamma.emplace_back(tables[j].first, w[j]);
  }
  return {h2, gamma};
}

Eigen::VectorXd update_node(const TahinParams& params, const Eigen::VectorXd& h0,
                            const Eigen::VectorXd& h1, const Eigen::VectorXd& h2) {
  const int S = params.cfg.S;
  if (h0.size() != S || h1.size() != S || h2.size() != S)
    throw ContractError("update_node inputs must all have dimension S");
  Eigen::VectorXd cat1(2 * S);
  cat1 << h1, h2;
  Eigen::VectorXd inner = params.w1 * cat1 + params.b1.col(0);
  Eigen::VectorXd cat2(2 * S);
  cat2 << h0, inner;
  return (params.w2 * cat2 + params.b2.col(0)).cwiseMax(0.0);
}

double score_pair(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != v.size()) throw ContractError("score requires equal dimensions");
  return sigmoid(u.dot(v));
}

double target_loss(const Eigen::MatrixXd& users, const Eigen::MatrixXd& items,
                   const std::vector<LabeledPair>& batch, Eigen::MatrixXd* d_users,
                   Eigen::MatrixXd* d_items) {
  if (batch.empty()) throw ContractError("loss batch must be non-empty");
  double loss = 0;
  for (const auto& ex : batch) {
    double dot = users.col(ex.user).dot(items.col(ex.item));
    double yhat = sigmoid(dot);
    bool clamped = yhat < kProbClamp || yhat > 1.0 - kProbClamp;
    yhat = std::clamp(yhat, kProbClamp, 1.0 - kProbClamp);
    loss -= ex.y * std::log(yhat) + (1.0 - ex.y) * std::log(1.0 - yhat);
    if (d_users && d_items && !clamped) {
      double g = yhat - ex.y;
      d_users->col(ex.user) += g * items.col(ex.item);
      d_items->col(ex.item) += g * users.col(ex.user);
    }
  }
  return loss;
}

double tahin_loss_and_grad(const HeteroGraph& g, const NeighborCache& nc,
                           const TahinParams& params, const std::vector<LabeledPair>& batch,
                           TahinForward& fwd, TahinParams& grads) {
  encode_all(g, nc, params, fwd);
  const int u = static_cast<int>(NodeType::User), i = static_cast<int>(NodeType::Item);
  std::array<Eigen::MatrixXd, kNumNodeTypes> d_final;
  for (int t = 0; t < kNumNodeTypes; ++t)
    d_final[t] = Eigen::MatrixXd::Zero(fwd.h_final[t].rows(), fwd.h_final[t].cols());
  double loss = target_loss(fwd.h_final[u], fwd.h_final[i], batch, &d_final[u], &d_final[i]);
  encode_backward(g, nc, params, fwd, d_final, grads);
  return loss;
}

}  // namespace hcdir
