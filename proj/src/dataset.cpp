#include "oscphase/dataset.hpp"

#include <cmath>

#include "oscphase/rng.hpp"

namespace oscphase {

DatasetSplit split_dataset(const std::vector<std::string>& ids, double train_fraction,
                           std::uint64_t seed) {
  if (ids.empty()) throw InvalidInput("split_dataset: empty id list");
  if (!(train_fraction > 0.0) || !(train_fraction < 1.0)) {
    throw InvalidInput("split_dataset: fraction must lie in (0, 1)");
  }
  std::vector<std::string> shuffled = ids;
  Rng rng(seed);
  rng.shuffle(shuffled);
  const auto train_count =
      static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(shuffled.size())));
  DatasetSplit split;
  split.train_ids.assign(shuffled.begin(), shuffled.begin() + train_count);
  split.val_ids.assign(shuffled.begin() + train_count, shuffled.end());
  return split;
}

namespace {

MinMaxScaler fit_impl(const std::vector<const Points*>& pool) {
  if (pool.empty()) throw InvalidInput("minmax_fit: empty pool");
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (const Points* traj : pool) {
    lo = lo.cwiseMin(traj->colwise().minCoeff().transpose());
    hi = hi.cwiseMax(traj->colwise().maxCoeff().transpose());
  }
  for (int axis = 0; axis < 3; ++axis) {
    if (!(hi[axis] > lo[axis])) {
      throw DegenerateAxis("minmax_fit: zero range on axis " + std::to_string(axis));
    }
  }
  return MinMaxScaler{lo, hi};
}

}  // namespace

MinMaxScaler minmax_fit(const std::vector<const Points*>& pool) { return fit_impl(pool); }

MinMaxScaler minmax_fit(const std::vector<Points>& pool) {
  std::vector<const Points*> ptrs;
  ptrs.reserve(pool.size());
  for (const Points& traj : pool) ptrs.push_back(&traj);
  return fit_impl(ptrs);
}

Points discrete_velocity(const Points& pos, double rate) {
  if (pos.rows() < 2) throw TooShort("discrete_velocity: need at least 2 samples");
  Points vel(pos.rows(), 3);
  vel.row(0).setZero();
  vel.bottomRows(pos.rows() - 1) = (pos.bottomRows(pos.rows() - 1) - pos.topRows(pos.rows() - 1)) * rate;
  return vel;
}

ErrorReport ErrorReport::from_entries(std::vector<Entry> entries) {
  ErrorReport report;
  report.per_trajectory = std::move(entries);
  const auto n = static_cast<double>(report.per_trajectory.size());
  if (report.per_trajectory.empty()) return report;
  double sum = 0.0;
  for (const Entry& e : report.per_trajectory) sum += e.mean_error;
  report.aggregate_mean = sum / n;
  double sq = 0.0;
  for (const Entry& e : report.per_trajectory) {
    const double d = e.mean_error - report.aggregate_mean;
    sq += d * d;
  }
  report.aggregate_std = report.per_trajectory.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
  return report;
}

}  // namespace oscphase
