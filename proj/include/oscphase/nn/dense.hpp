#pragma once

#include <Eigen/Dense>

#include "oscphase/errors.hpp"
#include "oscphase/rng.hpp"

namespace oscphase::nn {

struct DenseParams {
  Eigen::MatrixXd w;  // out x in
  Eigen::VectorXd b;  // out

  Eigen::Index input_size() const { return w.cols(); }
  Eigen::Index output_size() const { return w.rows(); }

  static DenseParams init(Eigen::Index input_size, Eigen::Index output_size, Rng& rng);
};

struct DenseGrads {
  Eigen::MatrixXd w;
  Eigen::VectorXd b;
};

// y = W x + b, batch as columns.
Eigen::MatrixXd dense_forward(const DenseParams& params, const Eigen::MatrixXd& x);

DenseGrads dense_backward(const DenseParams& params, const Eigen::MatrixXd& x,
                          const Eigen::MatrixXd& d_y, Eigen::MatrixXd* d_x = nullptr);

}  // namespace oscphase::nn
