#include "hcdir/gradcheck.hpp"

#include <cmath>

namespace hcdir {

GradcheckReport finite_difference_check(const std::vector<NamedTensor>& tensors,
                                        const std::function<double()>& loss,
                                        const std::function<void()>& compute_grads,
                                        double step) {
  compute_grads();
  std::vector<Eigen::MatrixXd> analytic;
  analytic.reserve(tensors.size());
  for (const auto& t : tensors) analytic.push_back(*t.grad);

  GradcheckReport report;
  for (size_t i = 0; i < tensors.size(); ++i) {
    Eigen::MatrixXd& value = *tensors[i].value;
    double max_diff = 0, max_scale = 0;
    for (Eigen::Index c = 0; c < value.cols(); ++c) {
      for (Eigen::Index r = 0; r < value.rows(); ++r) {
        double saved = value(r, c);
        value(r, c) = saved + step;
        double up = loss();
        value(r, c) = saved - step;
        double down = loss();
        value(r, c) = saved;
        double fd = (up - down) / (2 * step);
        double a = analytic[i](r, c);
        max_diff = std::max(max_diff, std::abs(a - fd));
        max_scale = std::max({max_scale, std::abs(a), std::abs(fd)});
      }
    }
    double rel = value.size() == 0 ? 0.0 : max_diff / std::max(max_scale, 1e-8);
    report.entries.push_back({tensors[i].name, rel, max_scale});
    if (rel > report.worst) {
      report.worst = rel;
      report.worst_tensor = tensors[i].name;
    }
  }
  return report;
}

}  // namespace hcdir
