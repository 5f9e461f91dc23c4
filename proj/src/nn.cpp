#include "hcdir/nn.hpp"

namespace hcdir {

void softmax_inplace(double* v, int n) {
  if (n <= 0) return;
  double mx = v[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, v[i]);
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    v[i] = std::exp(v[i] - mx);
    sum += v[i];
  }
  for (int i = 0; i < n; ++i) v[i] /= sum;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  Eigen::VectorXd out = logits;
  softmax_inplace(out.data(), static_cast<int>(out.size()));
  return out;
}

Eigen::MatrixXd xavier_uniform(int rows, int cols, std::mt19937_64& rng) {
  double bound = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Eigen::MatrixXd m(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) m(r, c) = dist(rng);
  return m;
}

void AdamOptimizer::step(const std::vector<NamedTensor>& tensors) {
  if (m_.empty()) {
    m_.reserve(tensors.size());
    v_.reserve(tensors.size());
    for (const auto& t : tensors) {
      m_.push_back(Eigen::MatrixXd::Zero(t.value->rows(), t.value->cols()));
      v_.push_back(Eigen::MatrixXd::Zero(t.value->rows(), t.value->cols()));
    }
  }
  if (m_.size() != tensors.size()) throw ContractError("optimizer tensor list changed size");
  ++t_;
  double bc1 = 1.0 - std::pow(beta1_, t_);
  double bc2 = 1.0 - std::pow(beta2_, t_);
  for (size_t i = 0; i < tensors.size(); ++i) {
    const Eigen::MatrixXd& g = *tensors[i].grad;
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
    Eigen::MatrixXd mhat = m_[i] / bc1;
    Eigen::MatrixXd vhat = v_[i] / bc2;
    *tensors[i].value -= lr_ * (mhat.array() / (vhat.array().sqrt() + eps_)).matrix();
  }
}

void zero_grads(const std::vector<NamedTensor>& tensors) {
  for (const auto& t : tensors) t.grad->setZero();
}

bool grads_all_finite(const std::vector<NamedTensor>& tensors) {
  for (const auto& t : tensors)
    if (!t.grad->allFinite()) return false;
  return true;
}

}  // namespace hcdir
