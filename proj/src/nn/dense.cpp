#include "oscphase/nn/dense.hpp"

#include <cmath>

namespace oscphase::nn {

DenseParams DenseParams::init(Eigen::Index input_size, Eigen::Index output_size, Rng& rng) {
  if (input_size < 1 || output_size < 1) throw InvalidInput("DenseParams: sizes must be positive");
  DenseParams params;
  params.w.resize(output_size, input_size);
  const double bound = 1.0 / std::sqrt(static_cast<double>(input_size));
  for (Eigen::Index r = 0; r < output_size; ++r) {
    for (Eigen::Index c = 0; c < input_size; ++c) {
      params.w(r, c) = rng.uniform(-bound, bound);
    }
  }
  params.b = Eigen::VectorXd::Zero(output_size);
  return params;
}

Eigen::MatrixXd dense_forward(const DenseParams& params, const Eigen::MatrixXd& x) {
  if (x.rows() != params.input_size()) throw ShapeMismatch("dense_forward: input size mismatch");
  Eigen::MatrixXd y = params.w * x;
  y.colwise() += params.b;
  return y;
}

DenseGrads dense_backward(const DenseParams& params, const Eigen::MatrixXd& x,
                          const Eigen::MatrixXd& d_y, Eigen::MatrixXd* d_x) {
  if (x.rows() != params.input_size() || d_y.rows() != params.output_size() ||
      x.cols() != d_y.cols()) {
    throw ShapeMismatch("dense_backward: shape mismatch");
  }
  DenseGrads grads;
  grads.w.noalias() = d_y * x.transpose();
  grads.b = d_y.rowwise().sum();
  if (d_x) d_x->noalias() = params.w.transpose() * d_y;
  return grads;
}

}  // namespace oscphase::nn
