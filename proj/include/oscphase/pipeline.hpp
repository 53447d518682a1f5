#pragma once

#include <map>
#include <optional>
#include <string>

#include "oscphase/dqn.hpp"
#include "oscphase/estimator.hpp"
#include "oscphase/io.hpp"
#include "oscphase/kuramoto.hpp"
#include "oscphase/motion_synth.hpp"

namespace oscphase {

struct DatasetGenConfig {
  int groups = 6;
  int total_trajectories = 288;  // spread round-robin over groups
  int trainval_groups = 3;       // groups 1..k feed the train/val pool
  double train_fraction = 0.7;
  double duration_s = 30.0;
  double rate_hz = 100.0;
  double noise_sigma = 0.005;  // synthesis noise for the corpus (mocap-jitter scale)
  double beta_jitter = 0.10;   // +/- fraction on the amplitudes per group
  std::string reference_csv;   // optional exemplar override
};

// Merged configuration for every stage; file values override defaults, CLI
// flags override both.
struct ExperimentConfig {
  std::uint64_t seed = 42;
  std::string out_dir = "out";
  int threads = 1;
  DatasetGenConfig dataset;
  EstimatorConfig estimator;
  KuramotoConfig kuramoto;
  AgentConfig agent;
  std::string preset = "group1";  // kuramoto regime preset for rl stages
  int eval_trials = 5;
  Eigen::Index eval_buffer = 3;       // closed-loop calibration buffer, samples
  double eval_noise_sigma = 0.005;    // closed-loop synthesis noise

  static ExperimentConfig from_values(const std::map<std::string, std::string>& values);
  nlohmann::json snapshot() const;
};

// Applies a named regime preset to a kuramoto config.
KuramotoConfig apply_preset(KuramotoConfig config, const std::string& preset);

// ---- pipeline stages (each writes its artifacts plus a run manifest) ----

struct GenResult {
  Manifest manifest;
  std::string manifest_path;
};
GenResult cmd_gen_dataset(const ExperimentConfig& config);

struct TrainResult {
  LstmModel model;
  MinMaxScaler scaler;
  TrainHistory history;
  std::string weights_path;
  std::string history_path;
};
TrainResult cmd_train(const ExperimentConfig& config, const std::string& manifest_path);

struct EstimatorBundle {
  LstmModel model;
  MinMaxScaler scaler;
};
EstimatorBundle load_estimator(const std::string& weights_path);
void save_estimator(const std::string& path, const LstmModel& model, const MinMaxScaler& scaler);

struct EvaluateOptions {
  std::string split = "test";
  std::optional<Eigen::Index> buffer;  // streaming calibration buffer
  bool write_trace = true;             // first-trajectory phase trace CSV
  std::string tag;                     // suffix for output files
};
ErrorReport cmd_evaluate(const ExperimentConfig& config, const std::string& weights_path,
                         const std::string& manifest_path, const EvaluateOptions& options);

struct RlTrainResult {
  QNetwork net;
  DqnTrainStats stats;
  std::string weights_path;
};
RlTrainResult cmd_rl_train(const ExperimentConfig& config);

QNetwork load_qnetwork(const std::string& path);
void save_qnetwork(const std::string& path, const QNetwork& net, const nlohmann::json& meta);

ClosedLoopReport cmd_rl_eval(const ExperimentConfig& config, const std::string& q_weights_path,
                             const std::string& lstm_weights_path, const std::string& mode,
                             int trials);

// Consolidates the artifacts referenced by the run manifests in the output
// directory into plot-ready per-figure CSVs and a comparison JSON.
void cmd_report(const ExperimentConfig& config);

}  // namespace oscphase
