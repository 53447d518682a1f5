#include "oscphase/kuramoto.hpp"

#include <cmath>
#include <complex>
#include <limits>

#include "oscphase/circular.hpp"

namespace oscphase {

KuramotoState initial_state(const KuramotoConfig& config, Rng& rng) {
  config.validate();
  KuramotoState state;
  state.phases.resize(config.oscillators);
  for (Eigen::Index i = 0; i < config.oscillators; ++i) {
    state.phases[i] = rng.uniform(-M_PI, M_PI);
  }
  state.time = 0.0;
  return state;
}

void step(KuramotoState& state, const KuramotoConfig& config,
          std::optional<double> control_omega, Rng& rng) {
  const Eigen::Index m = config.oscillators;
  Eigen::VectorXd omega(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    omega[i] = config.fixed_omega.size() > 0
                   ? config.fixed_omega[i]
                   : rng.gaussian(config.mu_omega, config.sigma_omega);
  }
  if (control_omega) omega[config.controlled_index] = *control_omega;

  const Eigen::MatrixXd adjacency = config.adjacency_or_complete();
  Eigen::VectorXd derivative = omega;
  for (Eigen::Index i = 0; i < m; ++i) {
    double coupling_sum = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (adjacency(i, j) != 0.0) {
        coupling_sum += adjacency(i, j) * std::sin(state.phases[j] - state.phases[i]);
      }
    }
    derivative[i] += config.coupling * coupling_sum;
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    state.phases[i] = wrap_angle(state.phases[i] + config.dt * derivative[i]);
  }
  state.time += config.dt;
}

double order_parameter(const Eigen::Ref<const Eigen::VectorXd>& phases) {
  if (phases.size() < 1) throw InvalidInput("order_parameter: empty phase vector");
  std::complex<double> sum(0.0, 0.0);
  for (Eigen::Index i = 0; i < phases.size(); ++i) {
    sum += std::complex<double>(std::cos(phases[i]), std::sin(phases[i]));
  }
  return std::abs(sum) / static_cast<double>(phases.size());
}

double mean_order_parameter(const Eigen::Ref<const Eigen::VectorXd>& r_trace, double dt) {
  if (r_trace.size() < 1) throw InvalidInput("mean_order_parameter: empty trace");
  (void)dt;  // uniform weights: Riemann sum divided by total duration
  return r_trace.mean();
}

std::pair<SimTrace, SyncMetrics> run(const KuramotoConfig& config, const Controller* controller) {
  config.validate();
  Rng rng(config.seed);
  KuramotoState state = initial_state(config, rng);
  const auto steps = static_cast<Eigen::Index>(std::ceil(config.horizon_s / config.dt));

  SimTrace trace;
  trace.t.resize(steps + 1);
  trace.phases.resize(steps + 1, config.oscillators);
  trace.r.resize(steps + 1);
  trace.control.resize(steps + 1);
  trace.t[0] = 0.0;
  trace.phases.row(0) = state.phases.transpose();
  trace.r[0] = order_parameter(state.phases);
  trace.control[0] = std::numeric_limits<double>::quiet_NaN();

  SyncMetrics metrics;
  metrics.r_trace.resize(steps);

  for (Eigen::Index k = 0; k < steps; ++k) {
    std::optional<double> control;
    if (controller) control = (*controller)(state);
    step(state, config, control, rng);
    trace.t[k + 1] = state.time;
    trace.phases.row(k + 1) = state.phases.transpose();
    const double r = order_parameter(state.phases);
    trace.r[k + 1] = r;
    trace.control[k + 1] = control ? *control : std::numeric_limits<double>::quiet_NaN();
    metrics.r_trace[k] = r;
  }
  metrics.mean_r = mean_order_parameter(metrics.r_trace, config.dt);
  return {std::move(trace), std::move(metrics)};
}

}  // namespace oscphase
