#pragma once

#include <functional>
#include <span>
#include <vector>

#include "oscphase/nn/adam.hpp"

namespace oscphase::nn {

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::vector<double> per_tensor;  // worst relative error per parameter tensor
};

// Central finite differences against the analytic gradients referenced by
// `params`. `loss` must be deterministic (dropout in eval mode) and must
// reflect the current parameter values on every call. The relative error is
// |analytic - numeric| / max(1e-6, |analytic|, |numeric|).
GradCheckReport grad_check(const std::function<double()>& loss, std::span<const ParamRef> params,
                           double step = 1e-5);

}  // namespace oscphase::nn
