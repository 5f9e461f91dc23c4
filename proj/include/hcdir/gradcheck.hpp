#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hcdir/nn.hpp"

namespace hcdir {

struct GradcheckEntry {
  std::string tensor;
  double rel_err;
  double analytic_scale;  // infinity norm of the analytic gradient
};

struct GradcheckReport {
  std::vector<GradcheckEntry> entries;
  double worst = 0.0;
  std::string worst_tensor;

  bool pass(double threshold = 1e-4) const { return worst < threshold; }
};

// Central finite differences vs analytic gradients, entry by entry. `loss`
// evaluates the objective at the current parameter values; `compute_grads`
// fills every tensor's grad with the analytic gradient. Relative error is the
// per-tensor infinity-norm ratio.
GradcheckReport finite_difference_check(const std::vector<NamedTensor>& tensors,
                                        const std::function<double()>& loss,
                                        const std::function<void()>& compute_grads,
                                        double step = 1e-5);

}  // namespace hcdir
