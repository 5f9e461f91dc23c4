#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hcdir/nn.hpp"

namespace hcdir {

// MLP mapping source-domain user latents to target-domain latents: tanh
// hidden layers, linear output.
struct MapperParams {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::MatrixXd> b;  // n x 1 each

  int depth() const { return static_cast<int>(w.size()); }
  int in_dim() const { return static_cast<int>(w.front().cols()); }
  int out_dim() const { return static_cast<int>(w.back().rows()); }
};

MapperParams init_mapper(int in_dim, int out_dim, const std::vector<int>& hidden, uint64_t seed);
MapperParams zeros_like(const MapperParams& p);
std::vector<NamedTensor> tensor_list(MapperParams& params, MapperParams& grads);

Eigen::VectorXd map_user(const MapperParams& p, const Eigen::VectorXd& u_source);

struct MappingPair {
  Eigen::VectorXd u_source;
  Eigen::VectorXd u_target;
};

// Sum over pairs of the Euclidean distance between the mapped source latent
// and the target latent, guarded as sqrt(|r|^2 + 1e-12). With `squared` the
// plain squared-error form is used instead. Gradients accumulate into grads
// when given.
double mapping_loss(const MapperParams& p, const std::vector<MappingPair>& pairs,
                    MapperParams* grads = nullptr, bool squared = false);

// Scores every column of item_table against the mapped user and returns the
// top k (item id, sigmoid score), ties broken by ascending item id.
std::vector<std::pair<int, double>> recommend_cold(const MapperParams& p,
                                                   const Eigen::VectorXd& u_source,
                                                   const Eigen::MatrixXd& item_table, int k);

struct MapperTrainConfig {
  std::vector<int> hidden;  // filled with {2*out_dim} when empty
  double lr = 1e-3;
  int batch = 32;
  int max_epochs = 100;
  int patience = 5;
  bool squared = false;
};

// Minibatch Adam on the mapping loss with optional early stopping on a
// caller-supplied validation score (higher is better, checked per epoch).
MapperParams train_mapper(const std::vector<MappingPair>& pairs, int in_dim, int out_dim,
                          const MapperTrainConfig& cfg, uint64_t seed,
                          const std::function<double(const MapperParams&)>& validation = {},
                          std::vector<std::pair<double, double>>* log = nullptr);

}  // namespace hcdir
