#pragma once

#include <functional>
#include <optional>

#include <Eigen/Dense>

#include "oscphase/errors.hpp"
#include "oscphase/rng.hpp"

namespace oscphase {

struct KuramotoConfig {
  Eigen::Index oscillators = 8;
  Eigen::MatrixXd adjacency;         // empty means complete graph
  double coupling = 0.15;            // stand-in default, partially coherent at M = 8
  double mu_omega = M_PI;            // rad/s (0.5 Hz)
  double sigma_omega = 0.5;          // rad/s
  Eigen::VectorXd fixed_omega;       // optional per-oscillator constant frequencies
  double dt = 0.01;                  // seconds
  double horizon_s = 30.0;
  Eigen::Index controlled_index = 0;
  std::uint64_t seed = 0;

  Eigen::MatrixXd adjacency_or_complete() const {
    if (adjacency.size() > 0) return adjacency;
    Eigen::MatrixXd a = Eigen::MatrixXd::Ones(oscillators, oscillators);
    a.diagonal().setZero();
    return a;
  }

  void validate() const {
    if (oscillators < 1) throw InvalidConfig("kuramoto: need at least one oscillator");
    if (!(coupling >= 0.0)) throw InvalidConfig("kuramoto: coupling must be nonnegative");
    if (!(dt > 0.0)) throw InvalidConfig("kuramoto: dt must be positive");
    if (controlled_index < 0 || controlled_index >= oscillators) {
      throw InvalidConfig("kuramoto: controlled index out of range");
    }
    if (adjacency.size() > 0) {
      if (adjacency.rows() != oscillators || adjacency.cols() != oscillators) {
        throw InvalidConfig("kuramoto: adjacency must be M x M");
      }
      if (adjacency.diagonal().cwiseAbs().maxCoeff() > 0.0) {
        throw InvalidConfig("kuramoto: adjacency diagonal must be zero");
      }
    }
    if (fixed_omega.size() > 0 && fixed_omega.size() != oscillators) {
      throw InvalidConfig("kuramoto: fixed frequency list must have one entry per oscillator");
    }
  }
};

struct KuramotoState {
  Eigen::VectorXd phases;  // wrapped to [-pi, pi]
  double time = 0.0;
};

// Uniform random phases in [-pi, pi).
KuramotoState initial_state(const KuramotoConfig& config, Rng& rng);

// One explicit Euler step. Natural frequencies are redrawn per oscillator
// from N(mu, sigma^2) each step (or taken from fixed_omega); the controlled
// node uses `control_omega` when provided. All M draws are consumed every
// step so streams stay aligned between controlled and uncontrolled runs.
void step(KuramotoState& state, const KuramotoConfig& config,
          std::optional<double> control_omega, Rng& rng);

// r = |sum exp(j theta)| / M.
double order_parameter(const Eigen::Ref<const Eigen::VectorXd>& phases);

// Discrete time average of an order-parameter trace.
double mean_order_parameter(const Eigen::Ref<const Eigen::VectorXd>& r_trace, double dt);

struct SimTrace {
  Eigen::VectorXd t;       // includes the initial state at t = 0
  Eigen::MatrixXd phases;  // one row per state, M columns
  Eigen::VectorXd r;
  Eigen::VectorXd control;  // omega_a actually applied per step (NaN when uncontrolled)
};

struct SyncMetrics {
  Eigen::VectorXd r_trace;  // post-step states only
  double mean_r = 0.0;
};

using Controller = std::function<double(const KuramotoState&)>;

// Integrates ceil(horizon / dt) steps from a seeded random initial state,
// querying `controller` (when present) for the controlled node's frequency.
std::pair<SimTrace, SyncMetrics> run(const KuramotoConfig& config,
                                     const Controller* controller = nullptr);

}  // namespace oscphase
