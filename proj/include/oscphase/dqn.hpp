#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "oscphase/dataset.hpp"
#include "oscphase/errors.hpp"
#include "oscphase/estimator.hpp"
#include "oscphase/kuramoto.hpp"
#include "oscphase/motion_synth.hpp"
#include "oscphase/rng.hpp"
#include "oscphase/stats.hpp"

namespace oscphase {

enum class PhaseMode { true_phase, estimated_phase, perfect_stub };

struct AgentConfig {
  Eigen::Index actions = 11;         // discrete frequencies spanning mu +/- span*sigma
  double action_span_sigmas = 3.0;
  double gamma = 0.95;
  double eps_start = 1.0;
  double eps_end = 0.05;
  long eps_decay_steps = 5000;
  Eigen::Index replay_capacity = 10000;
  Eigen::Index batch_size = 32;
  long target_sync_interval = 100;
  int episodes = 200;
  double learning_rate = 1e-3;
  Eigen::Index hidden = 64;
  std::uint64_t seed = 0;

  void validate() const {
    if (actions < 2) throw InvalidConfig("agent: need at least 2 actions");
    if (!(gamma > 0.0) || !(gamma < 1.0)) throw InvalidConfig("agent: gamma must lie in (0, 1)");
    if (eps_start < 0.0 || eps_start > 1.0 || eps_end < 0.0 || eps_end > 1.0) {
      throw InvalidConfig("agent: epsilon bounds must lie in [0, 1]");
    }
    if (replay_capacity < 1 || batch_size < 1 || target_sync_interval < 1 || episodes < 1 ||
        hidden < 1 || eps_decay_steps < 1) {
      throw InvalidConfig("agent: counts must be positive");
    }
  }
};

// Dense 2(M-1)+1 -> hidden -> hidden -> K with rectifier nonlinearities.
struct QNetwork {
  nn::DenseParams layer1;
  nn::DenseParams layer2;
  nn::DenseParams output;

  Eigen::Index input_size() const { return layer1.input_size(); }
  Eigen::Index action_count() const { return output.output_size(); }

  static QNetwork init(Eigen::Index obs_dim, Eigen::Index hidden, Eigen::Index actions, Rng& rng);

  Eigen::MatrixXd forward(const Eigen::MatrixXd& obs) const;  // batch as columns
};

struct QNetCache {
  Eigen::MatrixXd input;
  Eigen::MatrixXd act1;  // post-relu
  Eigen::MatrixXd act2;
};

struct QNetGrads {
  nn::DenseGrads layer1;
  nn::DenseGrads layer2;
  nn::DenseGrads output;
};

Eigen::MatrixXd q_forward(const QNetwork& net, const Eigen::MatrixXd& obs, QNetCache* cache);
QNetGrads q_backward(const QNetwork& net, const QNetCache& cache, const Eigen::MatrixXd& d_q);

struct Transition {
  Eigen::VectorXd obs;
  int action = 0;
  double reward = 0.0;
  Eigen::VectorXd next_obs;
};

// Fixed-capacity ring with uniform (with replacement) seeded sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(Eigen::Index capacity);

  void push(Transition transition);
  Eigen::Index size() const { return static_cast<Eigen::Index>(storage_.size()); }
  Eigen::Index capacity() const { return capacity_; }
  const Transition& at(Eigen::Index i) const { return storage_[static_cast<std::size_t>(i)]; }
  std::vector<const Transition*> sample(Eigen::Index count, Rng& rng) const;

 private:
  Eigen::Index capacity_;
  std::vector<Transition> storage_;
  std::size_t write_ = 0;
};

// K frequencies evenly spanning mu_omega +/- span*sigma_omega.
Eigen::VectorXd action_set(const KuramotoConfig& kuramoto, const AgentConfig& agent);

// (sin(theta_i - theta_a), cos(theta_i - theta_a)) for every non-controlled i,
// then the order parameter: dimension 2(M-1)+1.
Eigen::VectorXd observation_from_phases(const Eigen::Ref<const Eigen::VectorXd>& phases,
                                        Eigen::Index controlled);

// Epsilon-greedy; ties resolve to the lowest action index.
int select_action(const QNetwork& net, const Eigen::VectorXd& obs, double epsilon, Rng& rng);

// Everything the estimated-phase observer needs to run the per-oscillator
// estimator streams.
struct EstimatorArtifacts {
  const LstmModel* model = nullptr;
  MinMaxScaler scaler;
  MotionSynthParams synth;
  Eigen::Index calibration_buffer = 3;
};

// Per-episode phase provider: true phases, online-estimated phases from
// synthesized motion, or a stub that relays the true phases through the
// estimated-phase plumbing (shared-seed control experiment).
class PhaseObserver {
 public:
  PhaseObserver(PhaseMode mode, Eigen::Index oscillators, Eigen::Index controlled,
                const EstimatorArtifacts* artifacts, std::uint64_t seed, double rate,
                bool record_traces = false);

  // Feed the true phases for the current step; returns the phases the agent
  // observes. During estimator warmup the last available estimate is held
  // (initially 0).
  const Eigen::VectorXd& update(const Eigen::Ref<const Eigen::VectorXd>& true_phases);

  // Mean circular error per oscillator over the steps where an estimate
  // existed; throws when no estimates were produced.
  Eigen::VectorXd per_oscillator_error() const;

  const std::vector<Eigen::VectorXd>& error_trace() const { return error_trace_; }
  const std::vector<Eigen::VectorXd>& phase_trace() const { return phase_trace_; }
  Points synthesized(Eigen::Index oscillator) const;

 private:
  PhaseMode mode_;
  Eigen::Index controlled_;
  const EstimatorArtifacts* artifacts_;
  std::vector<OnlineEstimator> estimators_;
  std::vector<Rng> synth_rngs_;
  Eigen::VectorXd held_;
  std::vector<double> error_sum_;
  std::vector<long> error_count_;
  bool record_traces_;
  std::vector<Eigen::VectorXd> error_trace_;
  std::vector<Eigen::VectorXd> phase_trace_;
  std::vector<std::vector<Eigen::Vector3d>> synth_points_;
};

struct DqnTrainStats {
  std::vector<double> episode_mean_r;
  long learn_steps = 0;
};

// Trains against the simulator with true-phase observations; returns the
// greedy-policy network.
QNetwork train_dqn(const KuramotoConfig& kuramoto, const AgentConfig& agent,
                   DqnTrainStats* stats = nullptr);

struct ClosedLoopTrial {
  double mean_r_true = 0.0;
  double mean_r_est = 0.0;
  Eigen::VectorXd per_osc_error;
};

struct ClosedLoopReport {
  std::vector<ClosedLoopTrial> trials;
  double mean_r_true_avg = 0.0;
  double mean_r_true_std = 0.0;
  double mean_r_est_avg = 0.0;
  double mean_r_est_std = 0.0;
  TTestResult ttest;
  double phase_error_avg = 0.0;  // across oscillators and trials
  double phase_error_std = 0.0;
  // Last-trial traces for reporting.
  SimTrace trace_true;
  SimTrace trace_est;
  Eigen::MatrixXd est_error_trace;  // steps x M
  Eigen::MatrixXd est_phase_trace;  // steps x M
  Points synthesized_example;       // synthesized stream of one oscillator
};

// Runs `trials` paired simulations (shared seeds) with true-phase and
// estimated-phase observations and compares the time-averaged order
// parameters. `mode` picks what stands in for the estimated side.
ClosedLoopReport closed_loop_eval(const QNetwork& net, const KuramotoConfig& kuramoto,
                                  const AgentConfig& agent, int trials,
                                  const EstimatorArtifacts* artifacts,
                                  PhaseMode mode = PhaseMode::estimated_phase);

}  // namespace oscphase
