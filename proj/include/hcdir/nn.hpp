#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "hcdir/types.hpp"

namespace hcdir {

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

inline double leaky_relu(double x, double slope = 0.2) { return x > 0 ? x : slope * x; }
inline double leaky_relu_grad(double x, double slope = 0.2) { return x > 0 ? 1.0 : slope; }

// Max-shifted softmax; exact shift invariance because the max shifts too.
void softmax_inplace(double* v, int n);
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

Eigen::MatrixXd xavier_uniform(int rows, int cols, std::mt19937_64& rng);

// A named view onto one parameter tensor. Models expose their full tensor
// list through this so the optimizer and the gradient checker can stay
// generic.
struct NamedTensor {
  std::string name;
  Eigen::MatrixXd* value;
  Eigen::MatrixXd* grad;
};

class AdamOptimizer {
 public:
  AdamOptimizer(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // Applies one update to every tensor from its grad, then leaves grads
  // untouched (caller zeroes them). State is keyed by position, so the tensor
  // list must be stable across steps.
  void step(const std::vector<NamedTensor>& tensors);
  void reset() { m_.clear(); v_.clear(); t_ = 0; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::vector<Eigen::MatrixXd> m_, v_;
  long t_ = 0;
};

void zero_grads(const std::vector<NamedTensor>& tensors);
bool grads_all_finite(const std::vector<NamedTensor>& tensors);

}  // namespace hcdir
