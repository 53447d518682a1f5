#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "oscphase/errors.hpp"

namespace oscphase {

// Sample rows of a 3D point sequence: one row per sample, columns x/y/z.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3>;

// Time-stamped 3D position sequence sampled at a constant rate.
struct Trajectory {
  std::string id;
  Eigen::VectorXd t;  // seconds
  Points pos;         // meters, one row per sample
  double rate = 100.0;

  Eigen::Index size() const { return pos.rows(); }

  void validate() const {
    if (pos.rows() < 2) throw TooShort("trajectory '" + id + "': needs at least 2 samples");
    if (t.size() != pos.rows()) throw ShapeMismatch("trajectory '" + id + "': t/pos length mismatch");
    if (!(rate > 0.0)) throw InvalidInput("trajectory '" + id + "': rate must be positive");
    if (!pos.allFinite() || !t.allFinite()) {
      throw InvalidInput("trajectory '" + id + "': non-finite values");
    }
    const double dt = 1.0 / rate;
    for (Eigen::Index i = 1; i < t.size(); ++i) {
      const double spacing = t[i] - t[i - 1];
      if (!(spacing > 0.0) || std::abs(spacing - dt) > 1e-6 * dt + 1e-12) {
        throw InvalidInput("trajectory '" + id + "': timestamps not uniformly spaced at 1/rate");
      }
    }
  }
};

// Per-sample phase in [-pi, pi], paired with a trajectory of equal length.
struct PhaseSeries {
  Eigen::VectorXd values;  // radians

  Eigen::Index size() const { return values.size(); }

  void validate() const {
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      if (!std::isfinite(values[i]) || values[i] < -M_PI || values[i] > M_PI) {
        throw InvalidInput("phase series: value outside [-pi, pi]");
      }
    }
  }
};

// Build a trajectory with uniform timestamps starting at zero.
inline Trajectory make_trajectory(std::string id, Points pos, double rate) {
  Trajectory traj;
  traj.id = std::move(id);
  traj.rate = rate;
  traj.t = Eigen::VectorXd::LinSpaced(pos.rows(), 0.0, static_cast<double>(pos.rows() - 1)) / rate;
  traj.pos = std::move(pos);
  return traj;
}

}  // namespace oscphase
