#pragma once

#include <vector>

#include <Eigen/Dense>

#include "oscphase/errors.hpp"
#include "oscphase/rng.hpp"

namespace oscphase::nn {

// Gate blocks are stacked [input; forget; cell; output], each hidden_size rows.
struct LstmCellParams {
  Eigen::MatrixXd w_x;  // 4H x input_size
  Eigen::MatrixXd w_h;  // 4H x H
  Eigen::VectorXd b;    // 4H

  Eigen::Index input_size() const { return w_x.cols(); }
  Eigen::Index hidden_size() const { return w_h.cols(); }

  // Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights; zero biases except the
  // forget gate, which starts at 1.
  static LstmCellParams init(Eigen::Index input_size, Eigen::Index hidden_size, Rng& rng);
};

struct LstmGrads {
  Eigen::MatrixXd w_x;
  Eigen::MatrixXd w_h;
  Eigen::VectorXd b;
};

// Intermediates retained by the forward pass for exact backpropagation
// through time. `h` is the emitted hidden sequence.
struct LstmCache {
  Eigen::Index input_size = 0;
  Eigen::Index hidden_size = 0;
  std::vector<Eigen::MatrixXd> x;       // input_size x B per step
  std::vector<Eigen::MatrixXd> gate_i;  // H x B
  std::vector<Eigen::MatrixXd> gate_f;
  std::vector<Eigen::MatrixXd> gate_g;
  std::vector<Eigen::MatrixXd> gate_o;
  std::vector<Eigen::MatrixXd> c_prev;
  std::vector<Eigen::MatrixXd> tanh_c;
  std::vector<Eigen::MatrixXd> h_prev;
  std::vector<Eigen::MatrixXd> h;

  Eigen::Index steps() const { return static_cast<Eigen::Index>(x.size()); }
};

// Runs the recurrence over `inputs` (one input_size x B matrix per step) from
// zero initial hidden/cell state. Returns the final hidden state; the full
// hidden sequence lives in the cache.
Eigen::MatrixXd lstm_forward(const LstmCellParams& params,
                             const std::vector<Eigen::MatrixXd>& inputs, LstmCache* cache);

// Exact gradients of the loss with respect to parameters (and optionally the
// inputs), given per-step hidden-state gradients.
LstmGrads lstm_backward(const LstmCellParams& params, const LstmCache& cache,
                        const std::vector<Eigen::MatrixXd>& d_hidden,
                        std::vector<Eigen::MatrixXd>* d_inputs = nullptr);

// Convenience for heads that consume only the final hidden state.
LstmGrads lstm_backward_final(const LstmCellParams& params, const LstmCache& cache,
                              const Eigen::MatrixXd& d_hidden_final,
                              std::vector<Eigen::MatrixXd>* d_inputs = nullptr);

}  // namespace oscphase::nn
