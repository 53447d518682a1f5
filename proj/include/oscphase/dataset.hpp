#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oscphase/errors.hpp"
#include "oscphase/trajectory.hpp"

namespace oscphase {

struct DatasetSplit {
  std::vector<std::string> train_ids;
  std::vector<std::string> val_ids;
  std::vector<std::string> test_ids;
};

// Deterministic seeded shuffle of `ids`, then floor(fraction * L) into train
// and the remainder into validation. Test ids are left to the caller (they
// come from a separate held-out pool).
DatasetSplit split_dataset(const std::vector<std::string>& ids, double train_fraction,
                           std::uint64_t seed);

// Per-axis global min/max over a fit pool; apply maps x -> (x - min) / (max - min)
// without clamping, so unseen values land outside [0, 1].
struct MinMaxScaler {
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Ones();

  Eigen::Vector3d apply(const Eigen::Vector3d& x) const {
    return (x - min).cwiseQuotient(max - min);
  }

  Points apply(const Points& x) const {
    Points out = x.rowwise() - min.transpose();
    out.array().rowwise() /= (max - min).transpose().array();
    return out;
  }
};

MinMaxScaler minmax_fit(const std::vector<const Points*>& pool);
MinMaxScaler minmax_fit(const std::vector<Points>& pool);

// v_t = (x_t - x_{t-1}) * rate for t >= 2, v_1 = 0; output length equals input.
Points discrete_velocity(const Points& pos, double rate);

struct ErrorReport {
  struct Entry {
    std::string id;
    double mean_error = 0.0;  // radians, in [0, pi]
  };
  std::vector<Entry> per_trajectory;
  double aggregate_mean = 0.0;
  double aggregate_std = 0.0;

  static ErrorReport from_entries(std::vector<Entry> entries);
};

}  // namespace oscphase
