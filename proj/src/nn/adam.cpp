#include "oscphase/nn/adam.hpp"

#include <cmath>

namespace oscphase::nn {

void Adam::step(std::span<const ParamRef> params) {
  if (m_.empty()) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const ParamRef& p : params) {
      m_.push_back(Eigen::VectorXd::Zero(p.size));
      v_.push_back(Eigen::VectorXd::Zero(p.size));
    }
  }
  if (params.size() != m_.size()) throw ShapeMismatch("Adam: parameter count changed");

  ++step_;
  const double corr1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  const double corr2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));

  for (std::size_t k = 0; k < params.size(); ++k) {
    const ParamRef& p = params[k];
    if (p.size != m_[k].size()) throw ShapeMismatch("Adam: parameter shape changed");
    Eigen::Map<Eigen::ArrayXd> value(p.value, p.size);
    Eigen::Map<const Eigen::ArrayXd> grad(p.grad, p.size);
    auto m = m_[k].array();
    auto v = v_[k].array();
    m = config_.beta1 * m + (1.0 - config_.beta1) * grad;
    v = config_.beta2 * v + (1.0 - config_.beta2) * grad.square();
    value -= config_.lr * (m / corr1) / ((v / corr2).sqrt() + config_.eps);
  }
}

}  // namespace oscphase::nn
