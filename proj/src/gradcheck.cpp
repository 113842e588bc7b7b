#include "slotcnn/nn/gradcheck.hpp"

#include <cmath>
#include <vector>

namespace slotcnn::nn {

namespace {

double checked(double v) {
  if (!std::isfinite(v)) throw NumericError("non-finite loss in gradient check");
  return v;
}

}  // namespace

double relative_error(double analytic, double numeric, double floor) {
  const double scale =
      std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

GradCheckResult grad_check(const LossFn& loss, ParamSet& params, double eps) {
  if (!(eps > 0)) throw ConfigError("gradient check needs eps > 0");
  params.zero_grad();
  checked(loss(true));
  std::vector<Matrix> analytic;
  for (const auto& p : params) analytic.push_back(p.grad);

  GradCheckResult result;
  size_t k = 0;
  for (auto& p : params) {
    for (Index i = 0; i < p.value.size(); ++i) {
      double& x = p.value.data()[i];
      const double saved = x;
      x = saved + eps;
      const double up = checked(loss(false));
      x = saved - eps;
      const double down = checked(loss(false));
      x = saved;
      const double numeric = (up - down) / (2 * eps);
      const double a = analytic[k].data()[i];
      const double err = relative_error(a, numeric);
      ++result.entries_checked;
      if (err > result.max_rel_error || result.worst_entry < 0) {
        result.max_rel_error = err;
        result.worst_param = p.name;
        result.worst_entry = i;
        result.analytic = a;
        result.numeric = numeric;
      }
    }
    ++k;
  }
  for (size_t j = 0; j < analytic.size(); ++j) {
    auto it = params.begin() + static_cast<std::ptrdiff_t>(j);
    it->grad = analytic[j];
  }
  return result;
}

}  // namespace slotcnn::nn
