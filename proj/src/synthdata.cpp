#include "hcdir/synthdata.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <fstream>
#include <random>

#include "hcdir/dataset.hpp"
#include "hcdir/io.hpp"
#include "hcdir/nn.hpp"
#include "hcdir/rng.hpp"
#include "json.hpp"

namespace hcdir {

namespace {

// keyword pools for nonfinancial item descriptions, one per latent cluster
const std::vector<std::vector<std::string>> kClusterWords = {
    {"apple", "banana", "mango", "fresh", "juicy", "organic", "ripe", "sweet", "vitamin",
     "tropical", "orchard", "harvest", "citrus", "berry", "melon", "crisp", "seasonal",
     "natural", "fruit", "peach"},
    {"cotton", "jacket", "sleeve", "denim", "wool", "collar", "slim", "casual", "knit",
     "breathable", "zipper", "pocket", "lightweight", "fabric", "stitch", "hoodie", "linen",
     "tailored", "outfit", "warm"},
    {"serum", "moisturizer", "hydrating", "gentle", "cleanser", "glow", "spf", "collagen",
     "vitaminc", "soothing", "radiant", "toner", "cream", "repair", "nourish", "sensitive",
     "fragrance", "smooth", "renewal", "balm"},
    {"wireless", "battery", "bluetooth", "charger", "speaker", "portable", "screen", "camera",
     "headphone", "usb", "adapter", "smart", "rechargeable", "stereo", "hd", "compact",
     "gadget", "digital", "power", "cable"},
    {"kitchen", "storage", "ceramic", "towel", "bottle", "cleaning", "drawer", "stainless",
     "durable", "container", "mop", "basket", "shelf", "nonstick", "dishwasher", "folding",
     "household", "organizer", "hanger", "jar"},
};

const std::vector<std::string> kGenericWords = {
    "quality", "premium", "value",  "pack",   "new",    "offer",   "daily",  "home",
    "family",  "size",    "brand",  "classic", "best",  "popular", "choice", "deluxe",
    "set",     "gift",    "modern", "style",  "easy",   "extra",   "soft",   "large",
    "small",   "happy",   "bright", "simple", "useful", "handy"};

Eigen::VectorXd random_unit(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = gauss(rng);
  return v / v.norm();
}

std::string format_features(const Eigen::VectorXd& f) {
  std::string out;
  char buf[32];
  for (int i = 0; i < f.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.6f", f[i]);
    if (i) out.push_back(',');
    out += buf;
  }
  return out;
}

}  // namespace

void GenConfig::validate() const {
  if (users <= 0 || source_items <= 0 || target_items <= 0 || agents <= 0 || properties < 1)
    throw ConfigError("all entity counts must be positive (properties >= 1)");
  if (target_items > users) throw ConfigError("target item count must not exceed user count");
  if (latent_dim < 2 || clusters < 1) throw ConfigError("latent_dim >= 2 and clusters >= 1 required");
  if (source_rate <= 0 || source_rate > 1 || target_rate <= 0 || target_rate > 1)
    throw ConfigError("interaction rates must lie in (0, 1]");
  if (agent_effect < 0 || agent_effect > 1 || property_effect < 0 || property_effect > 1)
    throw ConfigError("effect strengths must lie in [0, 1]");
  if (new_customer_fraction < 0 || new_customer_fraction >= 1)
    throw ConfigError("new_customer_fraction must lie in [0, 1)");
  if (months < 1) throw ConfigError("must simulate at least one month");
  if (source_rate * source_items < 1.0)
    throw ConfigError("expected source positives per user is below 1; raise source_rate");
  if (property_catalog.empty()) throw ConfigError("property catalog must not be empty");
  if (clusters > static_cast<int>(kClusterWords.size()))
    throw ConfigError("at most " + std::to_string(kClusterWords.size()) +
                      " clusters are supported by the description pools");
}

void generate(const GenConfig& cfg, const std::filesystem::path& out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  const int k = cfg.latent_dim;
  const int64_t horizon = int64_t(cfg.months) * 30 * 86400;

  // --- latent geometry -----------------------------------------------------
  auto geo_rng = substream(cfg.seed, "gen-geometry");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Eigen::VectorXd> centers;
  for (int c = 0; c < cfg.clusters; ++c) centers.push_back(random_unit(k, geo_rng));

  // properties: clustered round-robin, concentration set by property_effect
  std::vector<Eigen::VectorXd> prop_latent(cfg.properties);
  std::vector<int> prop_cluster(cfg.properties);
  for (int p = 0; p < cfg.properties; ++p) {
    int c = p % cfg.clusters;
    prop_cluster[p] = c;
    Eigen::VectorXd v =
        cfg.property_effect * centers[c] + (1.0 - cfg.property_effect) * random_unit(k, geo_rng);
    prop_latent[p] = v / v.norm();
  }
  std::vector<std::vector<int>> cluster_props(cfg.clusters);
  for (int p = 0; p < cfg.properties; ++p) cluster_props[prop_cluster[p]].push_back(p);

  // target items: 2-6 properties drawn within one cluster; latent = mean
  auto item_rng = substream(cfg.seed, "gen-items");
  std::vector<Eigen::VectorXd> item_latent(cfg.target_items);
  std::vector<int> item_cluster(cfg.target_items);
  std::vector<std::vector<int>> item_props(cfg.target_items);
  for (int i = 0; i < cfg.target_items; ++i) {
    int c = i % cfg.clusters;
    item_cluster[i] = c;
    auto pool = cluster_props[c];
    std::shuffle(pool.begin(), pool.end(), item_rng);
    int take = std::min<int>(pool.size(),
                             2 + static_cast<int>(item_rng() % 5));  // 2..6
    item_props[i].assign(pool.begin(), pool.begin() + take);
    std::sort(item_props[i].begin(), item_props[i].end());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(k);
    for (int p : item_props[i]) mean += prop_latent[p];
    item_latent[i] = mean / double(take);
  }

  // agents: clustered latents, lognormal quality
  auto agent_rng = substream(cfg.seed, "gen-agents");
  std::lognormal_distribution<double> quality_dist(0.0, cfg.quality_sigma);
  std::vector<Eigen::VectorXd> agent_latent(cfg.agents);
  std::vector<double> agent_quality(cfg.agents);
  for (int a = 0; a < cfg.agents; ++a) {
    int c = a % cfg.clusters;
    Eigen::VectorXd v = 0.8 * centers[c] + 0.2 * random_unit(k, agent_rng);
    agent_latent[a] = v / v.norm();
    agent_quality[a] = quality_dist(agent_rng);
  }

  // users: one agent each, latent mixed from the agent's by agent_effect
  auto user_rng = substream(cfg.seed, "gen-users");
  std::uniform_int_distribution<int> agent_pick(0, cfg.agents - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> user_agent(cfg.users);
  std::vector<char> is_ncg(cfg.users);
  std::vector<Eigen::VectorXd> z(cfg.users);
  for (int u = 0; u < cfg.users; ++u) {
    user_agent[u] = agent_pick(user_rng);
    is_ncg[u] = unit(user_rng) < cfg.new_customer_fraction;
    Eigen::VectorXd raw = cfg.agent_effect * agent_latent[user_agent[u]] +
                          (1.0 - cfg.agent_effect) * random_unit(k, user_rng);
    z[u] = cfg.latent_scale * raw / raw.norm();
  }

  // source items: clustered latents + keyword descriptions
  auto src_rng = substream(cfg.seed, "gen-source-items");
  std::vector<Eigen::VectorXd> src_latent(cfg.source_items);
  std::vector<std::string> src_text(cfg.source_items);
  std::uniform_int_distribution<int> desc_len(8, 14);
  for (int j = 0; j < cfg.source_items; ++j) {
    int c = j % cfg.clusters;
    Eigen::VectorXd v = 0.7 * centers[c] + 0.3 * random_unit(k, src_rng);
    src_latent[j] = v / v.norm();
    const auto& pool = kClusterWords[c];
    int len = desc_len(src_rng);
    std::string text;
    for (int t = 0; t < len; ++t) {
      if (!text.empty()) text.push_back(' ');
      if (unit(src_rng) < 0.65)
        text += pool[src_rng() % pool.size()];
      else
        text += kGenericWords[src_rng() % kGenericWords.size()];
    }
    src_text[j] = text;
  }

  // --- consults ------------------------------------------------------------
  auto consult_rng = substream(cfg.seed, "gen-consults");
  std::vector<Interaction> consults;
  std::vector<char> consulted(cfg.users, 0);
  for (int u = 0; u < cfg.users; ++u) {
    double rate = cfg.consult_rate * agent_quality[user_agent[u]];
    std::poisson_distribution<int> n_dist(rate);
    int n = n_dist(consult_rng);
    if (n <= 0) continue;
    consulted[u] = 1;
    // first consult uniform in the first half, later ones after it: keeps the
    // first-consult time distribution identical across agent bands
    int64_t first = static_cast<int64_t>(unit(consult_rng) * horizon / 2);
    consults.push_back({u, user_agent[u], first});
    for (int c = 1; c < n; ++c) {
      int64_t ts = first + static_cast<int64_t>(unit(consult_rng) * double(horizon - first));
      consults.push_back({u, user_agent[u], ts});
    }
  }
  std::sort(consults.begin(), consults.end(), [](const Interaction& a, const Interaction& b) {
    if (a.user != b.user) return a.user < b.user;
    if (a.ts != b.ts) return a.ts < b.ts;
    return a.item < b.item;
  });

  // --- target purchases ----------------------------------------------------
  // logits before bias; bias solved so the expected volume matches target_rate
  double kappa = cfg.consult_boost * cfg.agent_effect;
  Eigen::MatrixXd logits(cfg.users, cfg.target_items);
  for (int u = 0; u < cfg.users; ++u) {
    double boost = consulted[u] ? kappa * agent_quality[user_agent[u]] : 0.0;
    double penalty = is_ncg[u] ? cfg.ncg_penalty : 0.0;
    for (int i = 0; i < cfg.target_items; ++i)
      logits(u, i) = z[u].dot(item_latent[i]) + boost - penalty;
  }
  double want = cfg.target_rate * cfg.target_items * cfg.users;
  double lo = -40, hi = 40;
  for (int iter = 0; iter < 100; ++iter) {
    double b = 0.5 * (lo + hi);
    double total = 0;
    for (int u = 0; u < cfg.users; ++u)
      for (int i = 0; i < cfg.target_items; ++i) total += sigmoid(logits(u, i) - b);
    (total > want ? lo : hi) = b;
  }
  double bias = 0.5 * (lo + hi);

  auto buy_rng = substream(cfg.seed, "gen-purchases");
  std::vector<Interaction> purchases;
  for (int u = 0; u < cfg.users; ++u)
    for (int i = 0; i < cfg.target_items; ++i)
      if (unit(buy_rng) < sigmoid(logits(u, i) - bias)) {
        int64_t ts = static_cast<int64_t>(unit(buy_rng) * horizon);
        purchases.push_back({u, i, ts});
      }

  // --- source interactions ---------------------------------------------------
  auto src_int_rng = substream(cfg.seed, "gen-source-interactions");
  std::poisson_distribution<int> src_count(cfg.source_rate * cfg.source_items);
  std::vector<Interaction> source;
  std::vector<double> weights(cfg.source_items);
  for (int u = 0; u < cfg.users; ++u) {
    if (is_ncg[u]) continue;  // new customers have no history anywhere
    Eigen::VectorXd zu = z[u] / cfg.latent_scale;
    for (int j = 0; j < cfg.source_items; ++j)
      weights[j] = std::exp(cfg.source_sharpness * zu.dot(src_latent[j]));
    std::discrete_distribution<int> pick(weights.begin(), weights.end());
    int n = std::max(1, src_count(src_int_rng));
    for (int t = 0; t < n; ++t) {
      int item = pick(src_int_rng);
      int64_t ts = static_cast<int64_t>(unit(src_int_rng) * horizon);
      source.push_back({u, item, ts});
    }
  }
  std::sort(source.begin(), source.end(), [](const Interaction& a, const Interaction& b) {
    if (a.user != b.user) return a.user < b.user;
    if (a.ts != b.ts) return a.ts < b.ts;
    return a.item < b.item;
  });

  // --- node features (portrait stand-ins) -----------------------------------
  // users: scaled latent + activity + agent quality + two distractor dims
  auto feat_rng = substream(cfg.seed, "gen-features");
  auto noisy = [&](double v, double sigma) { return v + sigma * gauss(feat_rng); };
  std::vector<Eigen::VectorXd> user_feat(cfg.users), item_feat(cfg.target_items),
      agent_feat(cfg.agents), prop_feat(cfg.properties);
  std::vector<int> src_count_per_user(cfg.users, 0);
  for (const auto& it : source) src_count_per_user[it.user]++;
  for (int u = 0; u < cfg.users; ++u) {
    Eigen::VectorXd f(k + 4);
    for (int d = 0; d < k; ++d) f[d] = noisy(2.0 * z[u][d] / cfg.latent_scale, cfg.feature_noise);
    f[k] = noisy(src_count_per_user[u] / double(cfg.source_items), 0.05);
    f[k + 1] = noisy(agent_quality[user_agent[u]] / 3.0, 0.1);
    f[k + 2] = 1.5 * gauss(feat_rng);
    f[k + 3] = 1.5 * gauss(feat_rng);
    user_feat[u] = f;
  }
  for (int i = 0; i < cfg.target_items; ++i) {
    Eigen::VectorXd f(k + 2);
    for (int d = 0; d < k; ++d) f[d] = noisy(item_latent[i][d], 0.35);
    f[k] = noisy(item_props[i].size() / 6.0, 0.05);
    f[k + 1] = gauss(feat_rng);
    item_feat[i] = f;
  }
  for (int a = 0; a < cfg.agents; ++a) {
    Eigen::VectorXd f(k + 2);
    for (int d = 0; d < k; ++d) f[d] = noisy(agent_latent[a][d], 0.15);
    f[k] = noisy(agent_quality[a] / 3.0, 0.05);
    f[k + 1] = gauss(feat_rng);
    agent_feat[a] = f;
  }
  for (int p = 0; p < cfg.properties; ++p) {
    Eigen::VectorXd f(k + 1);
    for (int d = 0; d < k; ++d) f[d] = noisy(prop_latent[p][d], 0.1);
    f[k] = gauss(feat_rng);
    prop_feat[p] = f;
  }

  // --- write files -----------------------------------------------------------
  auto prop_name = [&](int p) {
    return cfg.property_catalog[p % cfg.property_catalog.size()] + "_" +
           std::to_string(p / cfg.property_catalog.size());
  };
  {
    std::string s = "id\tfeatures\n";
    for (int u = 0; u < cfg.users; ++u)
      s += "u" + std::to_string(u) + "\t" + format_features(user_feat[u]) + "\n";
    write_text_file(out_dir / "nodes_user.tsv", s);
  }
  {
    std::string s = "id\tfeatures\n";
    for (int a = 0; a < cfg.agents; ++a)
      s += "a" + std::to_string(a) + "\t" + format_features(agent_feat[a]) + "\n";
    write_text_file(out_dir / "nodes_agent.tsv", s);
  }
  {
    std::string s = "id\tfeatures\n";
    for (int i = 0; i < cfg.target_items; ++i)
      s += "i" + std::to_string(i) + "\t" + format_features(item_feat[i]) + "\n";
    write_text_file(out_dir / "nodes_item.tsv", s);
  }
  {
    std::string s = "id\tfeatures\n";
    for (int p = 0; p < cfg.properties; ++p)
      s += prop_name(p) + "\t" + format_features(prop_feat[p]) + "\n";
    write_text_file(out_dir / "nodes_property.tsv", s);
  }
  {
    std::string s = "src_id\tdst_id\ttimestamp\n";
    auto sorted = purchases;
    std::sort(sorted.begin(), sorted.end(), [](const Interaction& a, const Interaction& b) {
      if (a.user != b.user) return a.user < b.user;
      if (a.ts != b.ts) return a.ts < b.ts;
      return a.item < b.item;
    });
    for (const auto& p : sorted)
      s += "u" + std::to_string(p.user) + "\ti" + std::to_string(p.item) + "\t" +
           std::to_string(p.ts) + "\n";
    write_text_file(out_dir / "purchase.tsv", s);
  }
  {
    std::string s = "src_id\tdst_id\n";
    for (int u = 0; u < cfg.users; ++u)
      s += "u" + std::to_string(u) + "\ta" + std::to_string(user_agent[u]) + "\n";
    write_text_file(out_dir / "served_by.tsv", s);
  }
  {
    std::string s = "src_id\tdst_id\n";
    for (int i = 0; i < cfg.target_items; ++i)
      for (int p : item_props[i]) s += "i" + std::to_string(i) + "\t" + prop_name(p) + "\n";
    write_text_file(out_dir / "possess.tsv", s);
  }
  {
    std::string s = "item_id\ttext\n";
    for (int j = 0; j < cfg.source_items; ++j)
      s += "s" + std::to_string(j) + "\t" + src_text[j] + "\n";
    write_text_file(out_dir / "item_descriptions.tsv", s);
  }
  {
    std::string s = "user_id\titem_id\ttimestamp\n";
    for (const auto& it : source)
      s += "u" + std::to_string(it.user) + "\ts" + std::to_string(it.item) + "\t" +
           std::to_string(it.ts) + "\n";
    write_text_file(out_dir / "source_interactions.tsv", s);
  }
  {
    std::string s = "user_id\tagent_id\ttimestamp\n";
    for (const auto& c : consults)
      s += "u" + std::to_string(c.user) + "\ta" + std::to_string(c.item) + "\t" +
           std::to_string(c.ts) + "\n";
    write_text_file(out_dir / "consults.tsv", s);
  }

  // ground truth for oracle tests only; training code never reads it
  nlohmann::ordered_json gt;
  gt["seed"] = cfg.seed;
  gt["latent_dim"] = k;
  gt["clusters"] = cfg.clusters;
  gt["latent_scale"] = cfg.latent_scale;
  gt["bias"] = bias;
  gt["kappa"] = kappa;
  gt["ncg_penalty"] = cfg.ncg_penalty;
  gt["agent_effect"] = cfg.agent_effect;
  gt["property_effect"] = cfg.property_effect;
  auto vec_rows = [](const std::vector<Eigen::VectorXd>& rows) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
      std::vector<double> v(r.data(), r.data() + r.size());
      out.push_back(v);
    }
    return out;
  };
  gt["cluster_centers"] = vec_rows(centers);
  gt["user_latent"] = vec_rows(z);
  gt["item_latent"] = vec_rows(item_latent);
  gt["property_latent"] = vec_rows(prop_latent);
  gt["agent_latent"] = vec_rows(agent_latent);
  gt["source_item_latent"] = vec_rows(src_latent);
  gt["agent_quality"] = agent_quality;
  gt["user_agent"] = user_agent;
  gt["item_cluster"] = item_cluster;
  gt["consulted"] = std::vector<int>(consulted.begin(), consulted.end());
  gt["is_new_customer"] = std::vector<int>(is_ncg.begin(), is_ncg.end());
  write_text_file(out_dir / "ground_truth.json", gt.dump() + "\n");
}

DescribeReport describe(const std::filesystem::path& dir) {
  DescribeReport r;
  const char* required[] = {"nodes_user.tsv",  "nodes_agent.tsv",
                            "nodes_item.tsv",  "nodes_property.tsv",
                            "purchase.tsv",    "served_by.tsv",
                            "possess.tsv",     "item_descriptions.tsv",
                            "source_interactions.tsv"};
  for (const char* f : required)
    if (!std::filesystem::exists(dir / f)) r.missing_files.push_back(f);
  if (!r.missing_files.empty()) return r;

  Dataset d = load_dataset(dir);
  for (int t = 0; t < kNumNodeTypes; ++t) r.node_counts[t] = d.graph.count(static_cast<NodeType>(t));
  for (int e = 0; e < kNumRelations; ++e)
    r.edge_counts[e] = d.graph.edge_count(static_cast<RelationKind>(e));
  r.source_items = d.n_source_items;
  r.source_interactions = static_cast<int>(d.source.size());
  r.target_interactions = static_cast<int>(d.target.size());
  r.consults = static_cast<int>(d.consults.size());
  r.overlap_users = static_cast<int>(overlap_users(d).size());
  int users = r.node_counts[0], items = r.node_counts[2];
  r.target_sparsity =
      users > 0 && items > 0 ? double(d.graph.edge_count(RelationKind::Purchase)) / (double(users) * items) : 0.0;
  auto src_seq = user_sequences(d.source, users);
  auto tgt_seq = user_sequences(d.target, users);
  int src_active = 0, tgt_active = 0;
  double src_total = 0, tgt_total = 0;
  for (const auto& s : src_seq)
    if (!s.empty()) { ++src_active; src_total += s.size(); }
  for (const auto& s : tgt_seq)
    if (!s.empty()) { ++tgt_active; tgt_total += s.size(); }
  r.mean_source_seq = src_active ? src_total / src_active : 0.0;
  r.mean_target_seq = tgt_active ? tgt_total / tgt_active : 0.0;
  return r;
}

std::string DescribeReport::to_text() const {
  if (!missing_files.empty()) {
    std::string s = "missing files:";
    for (const auto& f : missing_files) s += " " + f;
    return s + "\n";
  }
  char buf[256];
  std::string s;
  s += "node counts:\n";
  for (int t = 0; t < kNumNodeTypes; ++t) {
    std::snprintf(buf, sizeof(buf), "  %-10s %d\n", node_type_name(static_cast<NodeType>(t)),
                  node_counts[t]);
    s += buf;
  }
  s += "relation edge counts:\n";
  for (int e = 0; e < kNumRelations; ++e) {
    std::snprintf(buf, sizeof(buf), "  %-14s %d\n", kRelations[e].name, edge_counts[e]);
    s += buf;
  }
  std::snprintf(buf, sizeof(buf),
                "source items: %d\nsource interactions: %d\ntarget interactions: %d\n"
                "consult events: %d\noverlap users: %d\ntarget sparsity: %.4f\n"
                "mean source sequence length: %.2f\nmean target sequence length: %.2f\n",
                source_items, source_interactions, target_interactions, consults, overlap_users,
                target_sparsity, mean_source_seq, mean_target_seq);
  s += buf;
  return s;
}

std::string DescribeReport::to_json() const {
  nlohmann::ordered_json j;
  for (int t = 0; t < kNumNodeTypes; ++t)
    j["node_counts"][node_type_name(static_cast<NodeType>(t))] = node_counts[t];
  for (int e = 0; e < kNumRelations; ++e) j["edge_counts"][kRelations[e].name] = edge_counts[e];
  j["source_items"] = source_items;
  j["source_interactions"] = source_interactions;
  j["target_interactions"] = target_interactions;
  j["consults"] = consults;
  j["overlap_users"] = overlap_users;
  j["target_sparsity"] = target_sparsity;
  j["mean_source_seq"] = mean_source_seq;
  j["mean_target_seq"] = mean_target_seq;
  j["missing_files"] = missing_files;
  return j.dump(2) + "\n";
}

}  // namespace hcdir
