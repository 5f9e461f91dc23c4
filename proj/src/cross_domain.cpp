#include "hcdir/cross_domain.hpp"

#include <algorithm>

#include "hcdir/rng.hpp"

namespace hcdir {

namespace {
constexpr double kNormGuard = 1e-12;
}

MapperParams init_mapper(int in_dim, int out_dim, const std::vector<int>& hidden, uint64_t seed) {
  auto rng = substream(seed, "mapper-init");
  MapperParams p;
  int prev = in_dim;
  for (int h : hidden) {
    p.w.push_back(xavier_uniform(h, prev, rng));
    p.b.push_back(Eigen::MatrixXd::Zero(h, 1));
    prev = h;
  }
  p.w.push_back(xavier_uniform(out_dim, prev, rng));
  p.b.push_back(Eigen::MatrixXd::Zero(out_dim, 1));
  return p;
}

MapperParams zeros_like(const MapperParams& p) {
  MapperParams z;
  for (size_t i = 0; i < p.w.size(); ++i) {
    z.w.push_back(Eigen::MatrixXd::Zero(p.w[i].rows(), p.w[i].cols()));
    z.b.push_back(Eigen::MatrixXd::Zero(p.b[i].rows(), 1));
  }
  return z;
}

std::vector<NamedTensor> tensor_list(MapperParams& params, MapperParams& grads) {
  std::vector<NamedTensor> out;
  for (size_t i = 0; i < params.w.size(); ++i) {
    out.push_back({"mapper.w" + std::to_string(i), &params.w[i], &grads.w[i]});
    out.push_back({"mapper.b" + std::to_string(i), &params.b[i], &grads.b[i]});
  }
  return out;
}

Eigen::VectorXd map_user(const MapperParams& p, const Eigen::VectorXd& u_source) {
  if (u_source.size() != p.in_dim()) throw ContractError("mapper input dimension mismatch");
  Eigen::VectorXd h = u_source;
  for (int l = 0; l < p.depth(); ++l) {
    h = p.w[l] * h + p.b[l].col(0);
    if (l + 1 < p.depth()) h = h.array().tanh();
  }
  return h;
}

double mapping_loss(const MapperParams& p, const std::vector<MappingPair>& pairs,
                    MapperParams* grads, bool squared) {
  if (pairs.empty()) throw ContractError("mapping loss requires at least one pair");
  double loss = 0;
  std::vector<Eigen::VectorXd> acts(p.depth() + 1);
  for (const auto& pair : pairs) {
    acts[0] = pair.u_source;
    for (int l = 0; l < p.depth(); ++l) {
      acts[l + 1] = p.w[l] * acts[l] + p.b[l].col(0);
      if (l + 1 < p.depth()) acts[l + 1] = acts[l + 1].array().tanh();
    }
    Eigen::VectorXd res = acts.back() - pair.u_target;
    double sq = res.squaredNorm();
    Eigen::VectorXd d_out;
    if (squared) {
      loss += sq;
      d_out = 2.0 * res;
    } else {
      double norm = std::sqrt(sq + kNormGuard);
      loss += norm;
      d_out = res / norm;
    }
    if (!grads) continue;
    Eigen::VectorXd d = d_out;
    for (int l = p.depth() - 1; l >= 0; --l) {
      grads->w[l] += d * acts[l].transpose();
      grads->b[l].col(0) += d;
      if (l > 0) {
        d = p.w[l].transpose() * d;
        d = d.cwiseProduct((1.0 - acts[l].array().square()).matrix());
      }
    }
  }
  return loss;
}

std::vector<std::pair<int, double>> recommend_cold(const MapperParams& p,
                                                   const Eigen::VectorXd& u_source,
                                                   const Eigen::MatrixXd& item_table, int k) {
  Eigen::VectorXd u = map_user(p, u_source);
  if (u.size() != item_table.rows()) throw ContractError("item table dimension mismatch");
  int n = static_cast<int>(item_table.cols());
  std::vector<std::pair<int, double>> scored(n);
  for (int i = 0; i < n; ++i) scored[i] = {i, sigmoid(u.dot(item_table.col(i)))};
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (k < n) scored.resize(std::max(k, 0));
  return scored;
}

MapperParams train_mapper(const std::vector<MappingPair>& pairs, int in_dim, int out_dim,
                          const MapperTrainConfig& cfg, uint64_t seed,
                          const std::function<double(const MapperParams&)>& validation,
                          std::vector<std::pair<double, double>>* log) {
  if (pairs.empty()) throw ContractError("mapper training requires pairs");
  std::vector<int> hidden = cfg.hidden.empty() ? std::vector<int>{2 * out_dim} : cfg.hidden;
  MapperParams params = init_mapper(in_dim, out_dim, hidden, seed);
  MapperParams grads = zeros_like(params);
  auto tensors = tensor_list(params, grads);
  AdamOptimizer opt(cfg.lr);

  MapperParams best = params;
  double best_score = -1e300;
  int bad_epochs = 0;
  auto shuffle_rng = substream(seed, "mapper-shuffle");
  std::vector<int> order(pairs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0;
    for (size_t start = 0; start < order.size(); start += cfg.batch) {
      std::vector<MappingPair> batch;
      for (size_t i = start; i < std::min(order.size(), start + cfg.batch); ++i)
        batch.push_back(pairs[order[i]]);
      zero_grads(tensors);
      epoch_loss += mapping_loss(params, batch, &grads, cfg.squared);
      opt.step(tensors);
    }
    double score = validation ? validation(params) : -epoch_loss;
    if (log) log->emplace_back(epoch_loss, score);
    if (score > best_score) {
      best_score = score;
      best = params;
      bad_epochs = 0;
    } else if (++bad_epochs > cfg.patience) {
      break;
    }
  }
  return best;
}

}  // namespace hcdir
