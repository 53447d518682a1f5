#pragma once

#include <deque>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "oscphase/calibration.hpp"
#include "oscphase/dataset.hpp"
#include "oscphase/errors.hpp"
#include "oscphase/nn/dense.hpp"
#include "oscphase/nn/lstm.hpp"
#include "oscphase/trajectory.hpp"

namespace oscphase {

struct EstimatorConfig {
  Eigen::Index window = 10;
  Eigen::Index features = 6;  // 3 position + 3 velocity
  Eigen::Index hidden = 128;
  double dropout_rate = 0.2;
  int epochs = 10;
  Eigen::Index batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;

  void validate() const {
    if (window < 2) throw InvalidConfig("estimator: window must be >= 2");
    if (features != 6) throw InvalidConfig("estimator: feature width is fixed at 6");
    if (hidden < 1 || batch_size < 1 || epochs < 1) {
      throw InvalidConfig("estimator: counts must be positive");
    }
    if (!(dropout_rate >= 0.0) || dropout_rate >= 1.0) {
      throw InvalidConfig("estimator: dropout rate must lie in [0, 1)");
    }
  }
};

// One window of normalized position+velocity features and its phase target
// on the unit circle.
struct TrainingSample {
  Eigen::MatrixXd input;   // window x 6, oldest row first
  Eigen::Vector2d target;  // (sin theta, cos theta)
};

// The windowed phase estimator: LSTM cell plus a 2-output linear head.
struct LstmModel {
  nn::LstmCellParams cell;
  nn::DenseParams head;
  EstimatorConfig config;
};

// Normalizes positions with the scaler, differentiates them, and cuts one
// sample per t in [window, T].
std::vector<TrainingSample> make_windows(const Points& calibrated, const PhaseSeries& labels,
                                         const MinMaxScaler& scaler, const EstimatorConfig& config,
                                         double rate);

struct EpochStats {
  double train_loss = 0.0;
  double val_error = 0.0;  // mean circular error, radians
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
};

// Minimizes MSE on the (sin, cos) head with Adam for the configured number of
// epochs; no early stopping. Deterministic for a fixed seed regardless of the
// thread count (gradients accumulate over a fixed number of batch chunks).
LstmModel train_estimator(std::span<const TrainingSample> train,
                          std::span<const TrainingSample> val, const EstimatorConfig& config,
                          TrainHistory* history = nullptr, int threads = 1);

// Single-window inference (dropout in eval mode); atan2 of the head outputs.
double estimate_phase(const LstmModel& model, const Eigen::MatrixXd& window);

// Window-by-window inference over prepared samples; identical arithmetic to
// estimate_phase per window.
Eigen::VectorXd estimate_phases(const LstmModel& model, std::span<const TrainingSample> samples);

// Batched inference (larger matrix products, same math up to float
// reassociation); used where throughput matters and bit equality does not.
Eigen::VectorXd estimate_phases_batched(const LstmModel& model,
                                        std::span<const TrainingSample> samples,
                                        Eigen::Index batch_size = 256);

// Streaming inference: raw samples in, one phase per sample out once the
// calibration buffer (optional) and the first window fill.
class OnlineEstimator {
 public:
  OnlineEstimator(const LstmModel& model, const MinMaxScaler& scaler, double rate,
                  std::optional<Eigen::Index> calibration_buffer = std::nullopt);

  std::optional<double> push(const Eigen::Vector3d& sample);

  Eigen::Index samples_seen() const { return seen_; }
  // Number of leading samples that produce no estimate.
  Eigen::Index warmup_len() const;

 private:
  void ingest(const Eigen::Vector3d& calibrated_point);

  const LstmModel* model_;
  MinMaxScaler scaler_;
  double rate_;
  std::optional<StreamingCalibrator> calibrator_;
  Eigen::MatrixXd window_;  // window x 6
  Eigen::Index filled_ = 0;
  std::optional<Eigen::Vector3d> prev_norm_;
  Eigen::Index seen_ = 0;
};

}  // namespace oscphase
