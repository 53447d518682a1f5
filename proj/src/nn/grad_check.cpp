#include "oscphase/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace oscphase::nn {

GradCheckReport grad_check(const std::function<double()>& loss, std::span<const ParamRef> params,
                           double step) {
  GradCheckReport report;
  report.per_tensor.reserve(params.size());
  for (const ParamRef& p : params) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < p.size; ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + step;
      const double up = loss();
      p.value[i] = saved - step;
      const double down = loss();
      p.value[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = p.grad[i];
      const double denom = std::max({1e-6, std::abs(numeric), std::abs(analytic)});
      worst = std::max(worst, std::abs(numeric - analytic) / denom);
    }
    report.per_tensor.push_back(worst);
    report.max_rel_error = std::max(report.max_rel_error, worst);
  }
  return report;
}

}  // namespace oscphase::nn
