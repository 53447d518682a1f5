#include "oscphase/estimator.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "oscphase/circular.hpp"
#include "oscphase/nn/adam.hpp"
#include "oscphase/nn/dropout.hpp"
#include "oscphase/parallel.hpp"
#include "oscphase/rng.hpp"

namespace oscphase {

namespace {

// Gradients accumulate over this fixed number of batch chunks so results do
// not depend on how many threads execute them.
constexpr int kGradChunks = 2;

std::vector<Eigen::MatrixXd> gather_steps(std::span<const TrainingSample> samples,
                                          std::span<const std::size_t> indices,
                                          const EstimatorConfig& config) {
  std::vector<Eigen::MatrixXd> steps(static_cast<std::size_t>(config.window));
  for (Eigen::Index s = 0; s < config.window; ++s) {
    Eigen::MatrixXd& step = steps[static_cast<std::size_t>(s)];
    step.resize(config.features, static_cast<Eigen::Index>(indices.size()));
    for (std::size_t col = 0; col < indices.size(); ++col) {
      step.col(static_cast<Eigen::Index>(col)) = samples[indices[col]].input.row(s).transpose();
    }
  }
  return steps;
}

Eigen::MatrixXd gather_targets(std::span<const TrainingSample> samples,
                               std::span<const std::size_t> indices) {
  Eigen::MatrixXd targets(2, static_cast<Eigen::Index>(indices.size()));
  for (std::size_t col = 0; col < indices.size(); ++col) {
    targets.col(static_cast<Eigen::Index>(col)) = samples[indices[col]].target;
  }
  return targets;
}

double phase_from_outputs(double sin_hat, double cos_hat) {
  if (std::hypot(sin_hat, cos_hat) < 1e-9) {
    throw DegeneratePhase("estimate_phase: head output too close to the origin");
  }
  return std::atan2(sin_hat, cos_hat);
}

}  // namespace

std::vector<TrainingSample> make_windows(const Points& calibrated, const PhaseSeries& labels,
                                         const MinMaxScaler& scaler, const EstimatorConfig& config,
                                         double rate) {
  config.validate();
  const Eigen::Index total = calibrated.rows();
  if (labels.size() != total) throw ShapeMismatch("make_windows: labels/trajectory length mismatch");
  if (total < config.window) throw TooShort("make_windows: trajectory shorter than the window");

  const Points norm = scaler.apply(calibrated);
  const Points vel = discrete_velocity(norm, rate);

  std::vector<TrainingSample> samples;
  samples.reserve(static_cast<std::size_t>(total - config.window + 1));
  for (Eigen::Index t = config.window - 1; t < total; ++t) {
    TrainingSample sample;
    sample.input.resize(config.window, 6);
    for (Eigen::Index s = 0; s < config.window; ++s) {
      const Eigen::Index row = t - config.window + 1 + s;
      sample.input.row(s) << norm(row, 0), norm(row, 1), norm(row, 2), vel(row, 0), vel(row, 1),
          vel(row, 2);
    }
    sample.target << std::sin(labels.values[t]), std::cos(labels.values[t]);
    samples.push_back(std::move(sample));
  }
  return samples;
}

LstmModel train_estimator(std::span<const TrainingSample> train,
                          std::span<const TrainingSample> val, const EstimatorConfig& config,
                          TrainHistory* history, int threads) {
  config.validate();
  if (train.empty()) throw InvalidInput("train_estimator: empty training set");

  Rng root(config.seed);
  Rng init_rng = root.fork(0x1);
  LstmModel model;
  model.config = config;
  model.cell = nn::LstmCellParams::init(config.features, config.hidden, init_rng);
  model.head = nn::DenseParams::init(config.hidden, 2, init_rng);

  nn::Adam optimizer({.lr = config.learning_rate});
  if (history) history->epochs.clear();

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng epoch_rng = root.fork(0x100 + static_cast<std::uint64_t>(epoch));
    epoch_rng.shuffle(order);

    double loss_sum = 0.0;
    std::size_t seen = 0;
    std::size_t batch_index = 0;

    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batch_index) {
      const std::size_t count = std::min(static_cast<std::size_t>(config.batch_size),
                                         order.size() - start);
      const std::span<const std::size_t> batch_ids(order.data() + start, count);
      const auto batch = static_cast<Eigen::Index>(count);

      // One dropout mask for the whole batch, drawn before chunking.
      Rng mask_rng = root.fork(0x10000 + splitmix64((static_cast<std::uint64_t>(epoch) << 32) ^
                                                    batch_index));
      Eigen::MatrixXd mask(config.hidden, batch);
      if (config.dropout_rate > 0.0) {
        const double scale = 1.0 / (1.0 - config.dropout_rate);
        for (Eigen::Index i = 0; i < mask.size(); ++i) {
          mask.data()[i] = mask_rng.uniform() >= config.dropout_rate ? scale : 0.0;
        }
      } else {
        mask.setOnes();
      }

      const int chunks = static_cast<int>(std::min<std::size_t>(kGradChunks, count));
      std::vector<nn::LstmGrads> cell_grads(static_cast<std::size_t>(chunks));
      std::vector<nn::DenseGrads> head_grads(static_cast<std::size_t>(chunks));
      std::vector<double> chunk_loss(static_cast<std::size_t>(chunks), 0.0);

      parallel_tasks(chunks, threads, [&](int chunk) {
        const std::size_t lo = count * static_cast<std::size_t>(chunk) / chunks;
        const std::size_t hi = count * (static_cast<std::size_t>(chunk) + 1) / chunks;
        const std::span<const std::size_t> ids = batch_ids.subspan(lo, hi - lo);
        const auto steps = gather_steps(train, ids, config);
        const Eigen::MatrixXd targets = gather_targets(train, ids);

        nn::LstmCache cache;
        const Eigen::MatrixXd hidden = nn::lstm_forward(model.cell, steps, &cache);
        const Eigen::MatrixXd mask_block =
            mask.middleCols(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi - lo));
        const Eigen::MatrixXd dropped = hidden.cwiseProduct(mask_block);
        const Eigen::MatrixXd outputs = nn::dense_forward(model.head, dropped);

        const Eigen::MatrixXd residual = outputs - targets;
        chunk_loss[static_cast<std::size_t>(chunk)] = residual.squaredNorm();

        // Loss is the mean over the 2*batch output elements.
        const Eigen::MatrixXd d_outputs = residual / static_cast<double>(batch);
        Eigen::MatrixXd d_dropped;
        head_grads[static_cast<std::size_t>(chunk)] =
            nn::dense_backward(model.head, dropped, d_outputs, &d_dropped);
        const Eigen::MatrixXd d_hidden = d_dropped.cwiseProduct(mask_block);
        cell_grads[static_cast<std::size_t>(chunk)] =
            nn::lstm_backward_final(model.cell, cache, d_hidden);
      });

      nn::LstmGrads cell_grad = std::move(cell_grads[0]);
      nn::DenseGrads head_grad = std::move(head_grads[0]);
      double batch_loss = chunk_loss[0];
      for (int chunk = 1; chunk < chunks; ++chunk) {
        cell_grad.w_x += cell_grads[static_cast<std::size_t>(chunk)].w_x;
        cell_grad.w_h += cell_grads[static_cast<std::size_t>(chunk)].w_h;
        cell_grad.b += cell_grads[static_cast<std::size_t>(chunk)].b;
        head_grad.w += head_grads[static_cast<std::size_t>(chunk)].w;
        head_grad.b += head_grads[static_cast<std::size_t>(chunk)].b;
        batch_loss += chunk_loss[static_cast<std::size_t>(chunk)];
      }
      batch_loss /= 2.0 * static_cast<double>(batch);

      const nn::ParamRef refs[] = {
          nn::param_ref(model.cell.w_x, cell_grad.w_x), nn::param_ref(model.cell.w_h, cell_grad.w_h),
          nn::param_ref(model.cell.b, cell_grad.b),     nn::param_ref(model.head.w, head_grad.w),
          nn::param_ref(model.head.b, head_grad.b),
      };
      optimizer.step(refs);

      loss_sum += batch_loss * static_cast<double>(count);
      seen += count;
    }

    if (history) {
      EpochStats stats;
      stats.train_loss = loss_sum / static_cast<double>(seen);
      if (!val.empty()) {
        const Eigen::VectorXd predicted = estimate_phases_batched(model, val);
        double err = 0.0;
        for (std::size_t i = 0; i < val.size(); ++i) {
          const double truth = std::atan2(val[i].target[0], val[i].target[1]);
          err += circular_error(truth, predicted[static_cast<Eigen::Index>(i)]);
        }
        stats.val_error = err / static_cast<double>(val.size());
      } else {
        stats.val_error = std::numeric_limits<double>::quiet_NaN();
      }
      history->epochs.push_back(stats);
    }
  }
  return model;
}

double estimate_phase(const LstmModel& model, const Eigen::MatrixXd& window) {
  if (window.rows() != model.config.window || window.cols() != model.config.features) {
    throw ShapeMismatch("estimate_phase: window shape does not match the model");
  }
  std::vector<Eigen::MatrixXd> steps(static_cast<std::size_t>(window.rows()));
  for (Eigen::Index s = 0; s < window.rows(); ++s) {
    steps[static_cast<std::size_t>(s)] = window.row(s).transpose();
  }
  const Eigen::MatrixXd hidden = nn::lstm_forward(model.cell, steps, nullptr);
  const Eigen::MatrixXd outputs = nn::dense_forward(model.head, hidden);
  return phase_from_outputs(outputs(0, 0), outputs(1, 0));
}

Eigen::VectorXd estimate_phases(const LstmModel& model, std::span<const TrainingSample> samples) {
  Eigen::VectorXd phases(static_cast<Eigen::Index>(samples.size()));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    phases[static_cast<Eigen::Index>(i)] = estimate_phase(model, samples[i].input);
  }
  return phases;
}

Eigen::VectorXd estimate_phases_batched(const LstmModel& model,
                                        std::span<const TrainingSample> samples,
                                        Eigen::Index batch_size) {
  Eigen::VectorXd phases(static_cast<Eigen::Index>(samples.size()));
  std::vector<std::size_t> ids(static_cast<std::size_t>(batch_size));
  for (std::size_t start = 0; start < samples.size();
       start += static_cast<std::size_t>(batch_size)) {
    const std::size_t count =
        std::min(static_cast<std::size_t>(batch_size), samples.size() - start);
    ids.resize(count);
    std::iota(ids.begin(), ids.end(), start);
    const auto steps = gather_steps(samples, ids, model.config);
    const Eigen::MatrixXd hidden = nn::lstm_forward(model.cell, steps, nullptr);
    const Eigen::MatrixXd outputs = nn::dense_forward(model.head, hidden);
    for (std::size_t i = 0; i < count; ++i) {
      const auto col = static_cast<Eigen::Index>(i);
      phases[static_cast<Eigen::Index>(start + i)] =
          phase_from_outputs(outputs(0, col), outputs(1, col));
    }
  }
  return phases;
}

OnlineEstimator::OnlineEstimator(const LstmModel& model, const MinMaxScaler& scaler, double rate,
                                 std::optional<Eigen::Index> calibration_buffer)
    : model_(&model), scaler_(scaler), rate_(rate) {
  model.config.validate();
  if (calibration_buffer) calibrator_.emplace(*calibration_buffer);
  window_.setZero(model.config.window, model.config.features);
}

Eigen::Index OnlineEstimator::warmup_len() const {
  const Eigen::Index window_warmup = model_->config.window - 1;
  if (!calibrator_) return window_warmup;
  return std::max(calibrator_->buffer_len() - 1, window_warmup);
}

void OnlineEstimator::ingest(const Eigen::Vector3d& point) {
  const Eigen::Vector3d norm = scaler_.apply(point);
  const Eigen::Vector3d vel =
      prev_norm_ ? Eigen::Vector3d(((norm - *prev_norm_) * rate_)) : Eigen::Vector3d::Zero();
  prev_norm_ = norm;

  const Eigen::Index w = model_->config.window;
  if (filled_ < w) {
    window_.row(filled_) << norm.transpose(), vel.transpose();
    ++filled_;
  } else {
    window_.topRows(w - 1) = window_.bottomRows(w - 1).eval();
    window_.row(w - 1) << norm.transpose(), vel.transpose();
  }
}

std::optional<double> OnlineEstimator::push(const Eigen::Vector3d& sample) {
  ++seen_;
  if (calibrator_) {
    for (const Eigen::Vector3d& point : calibrator_->push(sample)) ingest(point);
  } else {
    ingest(sample);
  }
  if (filled_ < model_->config.window) return std::nullopt;
  return estimate_phase(*model_, window_);
}

}  // namespace oscphase
