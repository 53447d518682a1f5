#include "oscphase/dqn.hpp"

#include <cmath>

#include "oscphase/circular.hpp"
#include "oscphase/nn/adam.hpp"

namespace oscphase {

namespace {

constexpr std::uint64_t kInitTag = 0xA1;
constexpr std::uint64_t kPolicyTag = 0xA2;
constexpr std::uint64_t kReplayTag = 0xA3;
constexpr std::uint64_t kEnvTag = 0xA4;
constexpr std::uint64_t kSynthTag = 0xA5;

double huber_grad(double error) { return std::clamp(error, -1.0, 1.0); }

double epsilon_at(const AgentConfig& agent, long step) {
  const double frac =
      std::min(1.0, static_cast<double>(step) / static_cast<double>(agent.eps_decay_steps));
  return agent.eps_start + (agent.eps_end - agent.eps_start) * frac;
}

int greedy_action(const Eigen::VectorXd& q_values) {
  int best = 0;
  for (int k = 1; k < q_values.size(); ++k) {
    if (q_values[k] > q_values[best]) best = k;
  }
  return best;
}

}  // namespace

QNetwork QNetwork::init(Eigen::Index obs_dim, Eigen::Index hidden, Eigen::Index actions,
                        Rng& rng) {
  QNetwork net;
  net.layer1 = nn::DenseParams::init(obs_dim, hidden, rng);
  net.layer2 = nn::DenseParams::init(hidden, hidden, rng);
  net.output = nn::DenseParams::init(hidden, actions, rng);
  return net;
}

Eigen::MatrixXd QNetwork::forward(const Eigen::MatrixXd& obs) const {
  return q_forward(*this, obs, nullptr);
}

Eigen::MatrixXd q_forward(const QNetwork& net, const Eigen::MatrixXd& obs, QNetCache* cache) {
  const Eigen::MatrixXd act1 = nn::dense_forward(net.layer1, obs).cwiseMax(0.0);
  const Eigen::MatrixXd act2 = nn::dense_forward(net.layer2, act1).cwiseMax(0.0);
  Eigen::MatrixXd q = nn::dense_forward(net.output, act2);
  if (cache) {
    cache->input = obs;
    cache->act1 = act1;
    cache->act2 = act2;
  }
  return q;
}

QNetGrads q_backward(const QNetwork& net, const QNetCache& cache, const Eigen::MatrixXd& d_q) {
  QNetGrads grads;
  Eigen::MatrixXd d_act2;
  grads.output = nn::dense_backward(net.output, cache.act2, d_q, &d_act2);
  d_act2 = d_act2.cwiseProduct((cache.act2.array() > 0.0).cast<double>().matrix());
  Eigen::MatrixXd d_act1;
  grads.layer2 = nn::dense_backward(net.layer2, cache.act1, d_act2, &d_act1);
  d_act1 = d_act1.cwiseProduct((cache.act1.array() > 0.0).cast<double>().matrix());
  grads.layer1 = nn::dense_backward(net.layer1, cache.input, d_act1, nullptr);
  return grads;
}

ReplayBuffer::ReplayBuffer(Eigen::Index capacity) : capacity_(capacity) {
  if (capacity < 1) throw InvalidConfig("ReplayBuffer: capacity must be positive");
  storage_.reserve(static_cast<std::size_t>(capacity));
}

void ReplayBuffer::push(Transition transition) {
  if (size() < capacity_) {
    storage_.push_back(std::move(transition));
  } else {
    storage_[write_] = std::move(transition);
  }
  write_ = (write_ + 1) % static_cast<std::size_t>(capacity_);
}

std::vector<const Transition*> ReplayBuffer::sample(Eigen::Index count, Rng& rng) const {
  if (size() == 0) throw InvalidInput("ReplayBuffer: cannot sample from an empty buffer");
  std::vector<const Transition*> out;
  out.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index i = 0; i < count; ++i) {
    out.push_back(&storage_[static_cast<std::size_t>(rng.integer(static_cast<std::uint64_t>(size())))]);
  }
  return out;
}

Eigen::VectorXd action_set(const KuramotoConfig& kuramoto, const AgentConfig& agent) {
  const double span = agent.action_span_sigmas * kuramoto.sigma_omega;
  return Eigen::VectorXd::LinSpaced(agent.actions, kuramoto.mu_omega - span,
                                    kuramoto.mu_omega + span);
}

Eigen::VectorXd observation_from_phases(const Eigen::Ref<const Eigen::VectorXd>& phases,
                                        Eigen::Index controlled) {
  const Eigen::Index m = phases.size();
  if (controlled < 0 || controlled >= m) throw InvalidInput("observation: controlled index out of range");
  Eigen::VectorXd obs(2 * (m - 1) + 1);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (i == controlled) continue;
    const double diff = phases[i] - phases[controlled];
    obs[k++] = std::sin(diff);
    obs[k++] = std::cos(diff);
  }
  obs[k] = order_parameter(phases);
  return obs;
}

int select_action(const QNetwork& net, const Eigen::VectorXd& obs, double epsilon, Rng& rng) {
  if (obs.size() != net.input_size()) throw ShapeMismatch("select_action: observation size mismatch");
  const double u = rng.uniform();
  if (u < epsilon) {
    return static_cast<int>(rng.integer(static_cast<std::uint64_t>(net.action_count())));
  }
  const Eigen::VectorXd q = net.forward(obs);
  return greedy_action(q);
}

PhaseObserver::PhaseObserver(PhaseMode mode, Eigen::Index oscillators, Eigen::Index controlled,
                             const EstimatorArtifacts* artifacts, std::uint64_t seed, double rate,
                             bool record_traces)
    : mode_(mode),
      controlled_(controlled),
      artifacts_(artifacts),
      held_(Eigen::VectorXd::Zero(oscillators)),
      error_sum_(static_cast<std::size_t>(oscillators), 0.0),
      error_count_(static_cast<std::size_t>(oscillators), 0),
      record_traces_(record_traces) {
  if (mode_ == PhaseMode::estimated_phase) {
    if (!artifacts_ || !artifacts_->model) {
      throw InvalidConfig("PhaseObserver: estimated mode needs estimator artifacts");
    }
    Rng root(seed);
    for (Eigen::Index i = 0; i < oscillators; ++i) {
      estimators_.emplace_back(*artifacts_->model, artifacts_->scaler, rate,
                               artifacts_->calibration_buffer);
      synth_rngs_.push_back(root.fork(kSynthTag + static_cast<std::uint64_t>(i)));
    }
    if (record_traces_) {
      synth_points_.assign(static_cast<std::size_t>(oscillators), {});
    }
  }
}

Points PhaseObserver::synthesized(Eigen::Index oscillator) const {
  const auto& stream = synth_points_.at(static_cast<std::size_t>(oscillator));
  Points out(static_cast<Eigen::Index>(stream.size()), 3);
  for (std::size_t k = 0; k < stream.size(); ++k) {
    out.row(static_cast<Eigen::Index>(k)) = stream[k].transpose();
  }
  return out;
}

const Eigen::VectorXd& PhaseObserver::update(const Eigen::Ref<const Eigen::VectorXd>& true_phases) {
  switch (mode_) {
    case PhaseMode::true_phase:
    case PhaseMode::perfect_stub:
      held_ = true_phases;
      break;
    case PhaseMode::estimated_phase: {
      for (Eigen::Index i = 0; i < true_phases.size(); ++i) {
        const auto idx = static_cast<std::size_t>(i);
        const Eigen::Vector3d point =
            synthesize(true_phases[i], artifacts_->synth, synth_rngs_[idx]);
        if (record_traces_) synth_points_[idx].push_back(point);
        if (const std::optional<double> estimate = estimators_[idx].push(point)) {
          held_[i] = *estimate;
          error_sum_[idx] += circular_error(true_phases[i], *estimate);
          ++error_count_[idx];
        }
      }
      break;
    }
  }
  if (record_traces_) {
    phase_trace_.push_back(held_);
    Eigen::VectorXd err(true_phases.size());
    for (Eigen::Index i = 0; i < true_phases.size(); ++i) {
      err[i] = circular_error(true_phases[i], held_[i]);
    }
    error_trace_.push_back(std::move(err));
  }
  return held_;
}

Eigen::VectorXd PhaseObserver::per_oscillator_error() const {
  Eigen::VectorXd errors(static_cast<Eigen::Index>(error_sum_.size()));
  for (std::size_t i = 0; i < error_sum_.size(); ++i) {
    if (error_count_[i] == 0) {
      throw InvalidInput("PhaseObserver: no estimates were produced (stream shorter than warmup?)");
    }
    errors[static_cast<Eigen::Index>(i)] = error_sum_[i] / static_cast<double>(error_count_[i]);
  }
  return errors;
}

QNetwork train_dqn(const KuramotoConfig& kuramoto, const AgentConfig& agent,
                   DqnTrainStats* stats) {
  kuramoto.validate();
  agent.validate();

  const Eigen::Index m = kuramoto.oscillators;
  const Eigen::Index obs_dim = 2 * (m - 1) + 1;
  Rng root(agent.seed);
  Rng init_rng = root.fork(kInitTag);
  Rng policy_rng = root.fork(kPolicyTag);
  Rng replay_rng = root.fork(kReplayTag);

  QNetwork net = QNetwork::init(obs_dim, agent.hidden, agent.actions, init_rng);
  QNetwork target = net;
  const Eigen::VectorXd actions = action_set(kuramoto, agent);
  ReplayBuffer replay(agent.replay_capacity);
  nn::Adam optimizer({.lr = agent.learning_rate});

  const auto steps_per_episode =
      static_cast<long>(std::ceil(kuramoto.horizon_s / kuramoto.dt));
  long global_step = 0;
  if (stats) *stats = DqnTrainStats{};

  for (int episode = 0; episode < agent.episodes; ++episode) {
    Rng env_rng = Rng(kuramoto.seed).fork(kEnvTag + static_cast<std::uint64_t>(episode));
    KuramotoState state = initial_state(kuramoto, env_rng);
    Eigen::VectorXd obs = observation_from_phases(state.phases, kuramoto.controlled_index);
    double reward_sum = 0.0;

    for (long k = 0; k < steps_per_episode; ++k) {
      const double eps = epsilon_at(agent, global_step);
      const int action = select_action(net, obs, eps, policy_rng);
      step(state, kuramoto, actions[action], env_rng);
      const double reward = order_parameter(state.phases);
      Eigen::VectorXd next_obs = observation_from_phases(state.phases, kuramoto.controlled_index);
      replay.push({obs, action, reward, next_obs});
      obs = std::move(next_obs);
      reward_sum += reward;
      ++global_step;

      if (replay.size() >= agent.batch_size) {
        const auto batch = replay.sample(agent.batch_size, replay_rng);
        const auto batch_n = static_cast<Eigen::Index>(batch.size());
        Eigen::MatrixXd obs_mat(obs_dim, batch_n);
        Eigen::MatrixXd next_mat(obs_dim, batch_n);
        for (Eigen::Index b = 0; b < batch_n; ++b) {
          obs_mat.col(b) = batch[static_cast<std::size_t>(b)]->obs;
          next_mat.col(b) = batch[static_cast<std::size_t>(b)]->next_obs;
        }
        const Eigen::MatrixXd next_q = target.forward(next_mat);
        QNetCache cache;
        const Eigen::MatrixXd q = q_forward(net, obs_mat, &cache);

        Eigen::MatrixXd d_q = Eigen::MatrixXd::Zero(agent.actions, batch_n);
        for (Eigen::Index b = 0; b < batch_n; ++b) {
          const Transition& tr = *batch[static_cast<std::size_t>(b)];
          const double target_value = tr.reward + agent.gamma * next_q.col(b).maxCoeff();
          const double td_error = q(tr.action, b) - target_value;
          d_q(tr.action, b) = huber_grad(td_error) / static_cast<double>(batch_n);
        }
        const QNetGrads grads = q_backward(net, cache, d_q);
        const nn::ParamRef refs[] = {
            nn::param_ref(net.layer1.w, grads.layer1.w), nn::param_ref(net.layer1.b, grads.layer1.b),
            nn::param_ref(net.layer2.w, grads.layer2.w), nn::param_ref(net.layer2.b, grads.layer2.b),
            nn::param_ref(net.output.w, grads.output.w), nn::param_ref(net.output.b, grads.output.b),
        };
        optimizer.step(refs);
        if (stats) ++stats->learn_steps;
      }
      if (global_step % agent.target_sync_interval == 0) target = net;
    }
    if (stats) {
      stats->episode_mean_r.push_back(reward_sum / static_cast<double>(steps_per_episode));
    }
  }
  return net;
}

namespace {

double vector_mean(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double vector_std(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double sq = 0.0;
  for (double x : v) sq += (x - mean) * (x - mean);
  return std::sqrt(sq / static_cast<double>(v.size() - 1));
}

}  // namespace

ClosedLoopReport closed_loop_eval(const QNetwork& net, const KuramotoConfig& kuramoto,
                                  const AgentConfig& agent, int trials,
                                  const EstimatorArtifacts* artifacts, PhaseMode mode) {
  kuramoto.validate();
  agent.validate();
  if (trials < 1) throw InvalidInput("closed_loop_eval: need at least one trial");
  if (mode == PhaseMode::estimated_phase && (!artifacts || !artifacts->model)) {
    throw InvalidConfig("closed_loop_eval: estimated mode needs estimator artifacts");
  }

  const Eigen::VectorXd actions = action_set(kuramoto, agent);
  const double rate = 1.0 / kuramoto.dt;
  ClosedLoopReport report;

  for (int trial = 0; trial < trials; ++trial) {
    KuramotoConfig trial_config = kuramoto;
    trial_config.seed = kuramoto.seed + static_cast<std::uint64_t>(trial);
    const bool record = trial == trials - 1;

    auto run_mode = [&](PhaseObserver& observer) {
      Controller controller = [&](const KuramotoState& state) {
        const Eigen::VectorXd& observed = observer.update(state.phases);
        const Eigen::VectorXd obs = observation_from_phases(observed, trial_config.controlled_index);
        const Eigen::VectorXd q = net.forward(obs);
        int best = 0;
        for (int k = 1; k < q.size(); ++k) {
          if (q[k] > q[best]) best = k;
        }
        return actions[best];
      };
      return run(trial_config, &controller);
    };

    PhaseObserver true_observer(PhaseMode::true_phase, kuramoto.oscillators,
                                kuramoto.controlled_index, nullptr,
                                trial_config.seed, rate, false);
    auto [trace_true, metrics_true] = run_mode(true_observer);

    PhaseObserver est_observer(mode, kuramoto.oscillators, kuramoto.controlled_index, artifacts,
                               trial_config.seed, rate, record);
    auto [trace_est, metrics_est] = run_mode(est_observer);

    ClosedLoopTrial result;
    result.mean_r_true = metrics_true.mean_r;
    result.mean_r_est = metrics_est.mean_r;
    if (mode == PhaseMode::estimated_phase) {
      result.per_osc_error = est_observer.per_oscillator_error();
    } else {
      result.per_osc_error = Eigen::VectorXd::Zero(kuramoto.oscillators);
    }
    report.trials.push_back(result);

    if (record) {
      report.trace_true = std::move(trace_true);
      report.trace_est = std::move(trace_est);
      if (mode == PhaseMode::estimated_phase) {
        const auto& err = est_observer.error_trace();
        const auto& ph = est_observer.phase_trace();
        report.est_error_trace.resize(static_cast<Eigen::Index>(err.size()), kuramoto.oscillators);
        report.est_phase_trace.resize(static_cast<Eigen::Index>(ph.size()), kuramoto.oscillators);
        for (std::size_t k = 0; k < err.size(); ++k) {
          report.est_error_trace.row(static_cast<Eigen::Index>(k)) = err[k].transpose();
          report.est_phase_trace.row(static_cast<Eigen::Index>(k)) = ph[k].transpose();
        }
        const Eigen::Index example =
            kuramoto.controlled_index == 0 && kuramoto.oscillators > 1 ? 1 : 0;
        report.synthesized_example = est_observer.synthesized(example);
      }
    }
  }

  std::vector<double> r_true, r_est;
  std::vector<double> phase_errors;
  for (const ClosedLoopTrial& trial : report.trials) {
    r_true.push_back(trial.mean_r_true);
    r_est.push_back(trial.mean_r_est);
    phase_errors.push_back(trial.per_osc_error.mean());
  }
  report.mean_r_true_avg = vector_mean(r_true);
  report.mean_r_true_std = vector_std(r_true, report.mean_r_true_avg);
  report.mean_r_est_avg = vector_mean(r_est);
  report.mean_r_est_std = vector_std(r_est, report.mean_r_est_avg);
  report.phase_error_avg = vector_mean(phase_errors);
  report.phase_error_std = vector_std(phase_errors, report.phase_error_avg);
  if (trials >= 2) {
    report.ttest = welch_t_test(r_true, r_est);
  } else {
    report.ttest = {0.0, 1.0, 0.0};
  }
  return report;
}

}  // namespace oscphase
