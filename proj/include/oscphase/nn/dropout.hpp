#pragma once

#include <Eigen/Dense>

#include "oscphase/errors.hpp"
#include "oscphase/rng.hpp"

namespace oscphase::nn {

enum class DropoutMode { train, eval };

// Inverted dropout: in train mode each unit is zeroed with probability `rate`
// and survivors are scaled by 1/(1-rate); eval mode is the identity. The mask
// (written to `mask_out` when provided) is what the backward pass multiplies by.
inline Eigen::MatrixXd dropout(const Eigen::MatrixXd& activations, double rate, DropoutMode mode,
                               Rng& rng, Eigen::MatrixXd* mask_out = nullptr) {
  if (!(rate >= 0.0) || rate >= 1.0) throw InvalidInput("dropout: rate must lie in [0, 1)");
  if (mode == DropoutMode::eval || rate == 0.0) {
    if (mask_out) *mask_out = Eigen::MatrixXd::Ones(activations.rows(), activations.cols());
    return activations;
  }
  const double scale = 1.0 / (1.0 - rate);
  Eigen::MatrixXd mask(activations.rows(), activations.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = rng.uniform() >= rate ? scale : 0.0;
  }
  if (mask_out) *mask_out = mask;
  return activations.cwiseProduct(mask);
}

}  // namespace oscphase::nn
