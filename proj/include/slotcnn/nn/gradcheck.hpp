#pragma once

#include <functional>
#include <string>

#include "slotcnn/nn/params.hpp"

namespace slotcnn::nn {

struct GradCheckResult {
  double max_rel_error = 0;
  std::string worst_param;
  Index worst_entry = -1;
  double analytic = 0;
  double numeric = 0;
  Index entries_checked = 0;
};

/// Evaluates the loss; when `with_grad` is set it must also leave the
/// analytic gradient in every Param::grad (after zeroing them).
using LossFn = std::function<double(bool with_grad)>;

/// Relative error between analytic and central-difference derivatives:
/// |a - n| / max(|a|, |n|, floor). The floor keeps exactly-zero gradients
/// from dividing by zero.
double relative_error(double analytic, double numeric, double floor = 1e-6);

/// Compares every entry of every parameter against
/// (f(p + eps) - f(p - eps)) / (2 eps). Throws NumericError when the loss
/// is not finite.
GradCheckResult grad_check(const LossFn& loss, ParamSet& params, double eps);

}  // namespace slotcnn::nn
