#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "oscphase/errors.hpp"

namespace oscphase {

// Wrap an angle to [-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar angle) {
  return std::atan2(std::sin(angle), std::cos(angle));
}

// |arg(e^{j(theta - theta_hat)})| in [0, pi]. Symmetric, 2*pi-periodic in
// both arguments.
inline double circular_error(double theta, double theta_hat) {
  if (!std::isfinite(theta) || !std::isfinite(theta_hat)) {
    throw InvalidInput("circular_error: non-finite input");
  }
  return std::abs(wrap_angle(theta - theta_hat));
}

// Time average of the per-sample circular error.
inline double mean_circular_error(const Eigen::Ref<const Eigen::VectorXd>& truth,
                                  const Eigen::Ref<const Eigen::VectorXd>& estimate) {
  if (truth.size() != estimate.size()) {
    throw ShapeMismatch("mean_circular_error: length mismatch");
  }
  if (truth.size() < 1) {
    throw InvalidInput("mean_circular_error: empty series");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    sum += circular_error(truth[i], estimate[i]);
  }
  return sum / static_cast<double>(truth.size());
}

}  // namespace oscphase
