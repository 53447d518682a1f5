#include "oscphase/nn/lstm.hpp"

#include <cmath>

namespace oscphase::nn {

namespace {

// Vectorized logistic; exp overflow saturates to 0/1 in double.
template <typename Block>
Eigen::MatrixXd sigmoid(const Block& z) {
  return (1.0 + (-z.array()).exp()).inverse().matrix();
}

void fill_uniform(Eigen::MatrixXd& m, double bound, Rng& rng) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = rng.uniform(-bound, bound);
    }
  }
}

}  // namespace

LstmCellParams LstmCellParams::init(Eigen::Index input_size, Eigen::Index hidden_size, Rng& rng) {
  if (input_size < 1 || hidden_size < 1) throw InvalidInput("LstmCellParams: sizes must be positive");
  LstmCellParams params;
  params.w_x.resize(4 * hidden_size, input_size);
  params.w_h.resize(4 * hidden_size, hidden_size);
  fill_uniform(params.w_x, 1.0 / std::sqrt(static_cast<double>(input_size)), rng);
  fill_uniform(params.w_h, 1.0 / std::sqrt(static_cast<double>(hidden_size)), rng);
  params.b = Eigen::VectorXd::Zero(4 * hidden_size);
  params.b.segment(hidden_size, hidden_size).setOnes();  // forget-gate bias
  return params;
}

Eigen::MatrixXd lstm_forward(const LstmCellParams& params,
                             const std::vector<Eigen::MatrixXd>& inputs, LstmCache* cache) {
  if (inputs.empty()) throw InvalidInput("lstm_forward: empty input sequence");
  const Eigen::Index hidden = params.hidden_size();
  const Eigen::Index batch = inputs.front().cols();
  if (params.w_x.rows() != 4 * hidden || params.b.size() != 4 * hidden) {
    throw ShapeMismatch("lstm_forward: inconsistent parameter shapes");
  }

  if (cache) {
    *cache = LstmCache{};
    cache->input_size = params.input_size();
    cache->hidden_size = hidden;
  }

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(hidden, batch);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(hidden, batch);
  Eigen::MatrixXd z(4 * hidden, batch);

  for (const Eigen::MatrixXd& x : inputs) {
    if (x.rows() != params.input_size() || x.cols() != batch) {
      throw ShapeMismatch("lstm_forward: input step has wrong shape");
    }
    z.noalias() = params.w_x * x;
    z.noalias() += params.w_h * h;
    z.colwise() += params.b;

    Eigen::MatrixXd gate_i = sigmoid(z.topRows(hidden));
    Eigen::MatrixXd gate_f = sigmoid(z.middleRows(hidden, hidden));
    Eigen::MatrixXd gate_g = z.middleRows(2 * hidden, hidden).array().tanh().matrix();
    Eigen::MatrixXd gate_o = sigmoid(z.middleRows(3 * hidden, hidden));

    Eigen::MatrixXd c_next = gate_f.cwiseProduct(c) + gate_i.cwiseProduct(gate_g);
    Eigen::MatrixXd tanh_c = c_next.array().tanh().matrix();
    Eigen::MatrixXd h_next = gate_o.cwiseProduct(tanh_c);

    if (cache) {
      cache->x.push_back(x);
      cache->gate_i.push_back(std::move(gate_i));
      cache->gate_f.push_back(std::move(gate_f));
      cache->gate_g.push_back(std::move(gate_g));
      cache->gate_o.push_back(std::move(gate_o));
      cache->c_prev.push_back(c);
      cache->tanh_c.push_back(tanh_c);
      cache->h_prev.push_back(h);
      cache->h.push_back(h_next);
    }
    c = std::move(c_next);
    h = std::move(h_next);
  }
  return h;
}

LstmGrads lstm_backward(const LstmCellParams& params, const LstmCache& cache,
                        const std::vector<Eigen::MatrixXd>& d_hidden,
                        std::vector<Eigen::MatrixXd>* d_inputs) {
  const Eigen::Index steps = cache.steps();
  if (steps == 0 || cache.input_size != params.input_size() ||
      cache.hidden_size != params.hidden_size()) {
    throw InvalidCache("lstm_backward: cache does not match parameters");
  }
  if (static_cast<Eigen::Index>(d_hidden.size()) != steps) {
    throw ShapeMismatch("lstm_backward: one hidden gradient per step required");
  }
  const Eigen::Index hidden = cache.hidden_size;
  const Eigen::Index batch = cache.x.front().cols();

  LstmGrads grads;
  grads.w_x = Eigen::MatrixXd::Zero(params.w_x.rows(), params.w_x.cols());
  grads.w_h = Eigen::MatrixXd::Zero(params.w_h.rows(), params.w_h.cols());
  grads.b = Eigen::VectorXd::Zero(params.b.size());
  if (d_inputs) d_inputs->assign(static_cast<std::size_t>(steps), Eigen::MatrixXd());

  Eigen::MatrixXd dh_next = Eigen::MatrixXd::Zero(hidden, batch);
  Eigen::MatrixXd dc_next = Eigen::MatrixXd::Zero(hidden, batch);
  Eigen::MatrixXd dz(4 * hidden, batch);

  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    const auto idx = static_cast<std::size_t>(t);
    const Eigen::MatrixXd& gate_i = cache.gate_i[idx];
    const Eigen::MatrixXd& gate_f = cache.gate_f[idx];
    const Eigen::MatrixXd& gate_g = cache.gate_g[idx];
    const Eigen::MatrixXd& gate_o = cache.gate_o[idx];
    const Eigen::MatrixXd& tanh_c = cache.tanh_c[idx];

    Eigen::MatrixXd dh = d_hidden[idx] + dh_next;
    Eigen::MatrixXd dc =
        dh.cwiseProduct(gate_o).cwiseProduct((1.0 - tanh_c.array().square()).matrix()) + dc_next;

    dz.topRows(hidden) = dh.cwiseProduct(tanh_c)
                             .cwiseProduct(gate_o)
                             .cwiseProduct((1.0 - gate_o.array()).matrix())
                             .eval();
    // Reuse the top block: rows [0,H) currently hold d(o-gate pre-activation).
    Eigen::MatrixXd dz_o = dz.topRows(hidden);
    dz.topRows(hidden) =
        dc.cwiseProduct(gate_g).cwiseProduct(gate_i).cwiseProduct((1.0 - gate_i.array()).matrix());
    dz.middleRows(hidden, hidden) = dc.cwiseProduct(cache.c_prev[idx])
                                        .cwiseProduct(gate_f)
                                        .cwiseProduct((1.0 - gate_f.array()).matrix());
    dz.middleRows(2 * hidden, hidden) =
        dc.cwiseProduct(gate_i).cwiseProduct((1.0 - gate_g.array().square()).matrix());
    dz.middleRows(3 * hidden, hidden) = dz_o;

    grads.w_x.noalias() += dz * cache.x[idx].transpose();
    grads.w_h.noalias() += dz * cache.h_prev[idx].transpose();
    grads.b.noalias() += dz.rowwise().sum();

    dh_next.noalias() = params.w_h.transpose() * dz;
    dc_next = dc.cwiseProduct(gate_f);
    if (d_inputs) (*d_inputs)[idx].noalias() = params.w_x.transpose() * dz;
  }
  return grads;
}

LstmGrads lstm_backward_final(const LstmCellParams& params, const LstmCache& cache,
                              const Eigen::MatrixXd& d_hidden_final,
                              std::vector<Eigen::MatrixXd>* d_inputs) {
  std::vector<Eigen::MatrixXd> d_hidden(static_cast<std::size_t>(cache.steps()));
  const Eigen::MatrixXd zero =
      Eigen::MatrixXd::Zero(d_hidden_final.rows(), d_hidden_final.cols());
  for (auto& g : d_hidden) g = zero;
  d_hidden.back() = d_hidden_final;
  return lstm_backward(params, cache, d_hidden, d_inputs);
}

}  // namespace oscphase::nn
