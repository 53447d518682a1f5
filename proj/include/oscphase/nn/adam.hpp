#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "oscphase/errors.hpp"

namespace oscphase::nn {

// Flat view pairing a mutable parameter tensor with its gradient.
struct ParamRef {
  double* value = nullptr;
  const double* grad = nullptr;
  Eigen::Index size = 0;
};

inline ParamRef param_ref(Eigen::MatrixXd& value, const Eigen::MatrixXd& grad) {
  if (value.rows() != grad.rows() || value.cols() != grad.cols()) {
    throw ShapeMismatch("param_ref: gradient shape does not match parameter");
  }
  return {value.data(), grad.data(), value.size()};
}

inline ParamRef param_ref(Eigen::VectorXd& value, const Eigen::VectorXd& grad) {
  if (value.size() != grad.size()) {
    throw ShapeMismatch("param_ref: gradient shape does not match parameter");
  }
  return {value.data(), grad.data(), value.size()};
}

// Bias-corrected Adam over a fixed list of tensors. Moment shapes are locked
// in by the first step.
class Adam {
 public:
  struct Config {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
  };

  Adam() = default;
  explicit Adam(const Config& config) : config_(config) {}

  void step(std::span<const ParamRef> params);

  long steps_taken() const { return step_; }
  const Config& config() const { return config_; }

 private:
  Config config_;
  long step_ = 0;
  std::vector<Eigen::VectorXd> m_;
  std::vector<Eigen::VectorXd> v_;
};

}  // namespace oscphase::nn
