#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "oscphase/errors.hpp"
#include "oscphase/trajectory.hpp"

namespace oscphase {

// Rigid standardization of a trajectory: subtract the mean position, then
// rotate the principal motion axis onto e_x.
struct CalibrationTransform {
  Eigen::Vector3d mean_offset = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();

  Eigen::Vector3d apply(const Eigen::Vector3d& x) const { return rotation * (x - mean_offset); }

  // Row by row through the same arithmetic as the point overload, so batch
  // and streaming paths agree bit for bit.
  Points apply(const Points& x) const {
    Points out(x.rows(), 3);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      out.row(i) = apply(Eigen::Vector3d(x.row(i).transpose())).transpose();
    }
    return out;
  }

  // Rotation angle separating this transform's rotation from another's.
  double rotation_angle_to(const CalibrationTransform& other) const;
};

// Subtract the mean position; returns the centered points and the mean.
std::pair<Points, Eigen::Vector3d> center(const Points& pos);

// Unit eigenvector of the sample covariance with the largest eigenvalue.
// Sign fixed so the component of largest absolute value is positive
// (first such component on ties).
Eigen::Vector3d principal_direction(const Points& centered);

// Minimal rotation mapping the unit vector p onto e_x (column convention).
// Exactly the identity when p is already aligned, and the 180-degree
// rotation about e_z when p is antiparallel.
Eigen::Matrix3d alignment_rotation(const Eigen::Vector3d& p);

std::pair<Points, CalibrationTransform> calibrate(const Points& pos);

inline std::pair<Points, CalibrationTransform> calibrate(const Trajectory& traj) {
  return calibrate(traj.pos);
}

// Consumes a sample stream; fits the transform once `buffer_len` samples have
// arrived and applies the frozen transform to everything after (and to the
// buffered prefix, which is flushed at fit time).
class StreamingCalibrator {
 public:
  explicit StreamingCalibrator(Eigen::Index buffer_len);

  // Returns no points while buffering, the transformed buffer at fit time,
  // and one transformed point per call afterwards.
  std::vector<Eigen::Vector3d> push(const Eigen::Vector3d& sample);

  bool fitted() const { return transform_.has_value(); }
  Eigen::Index buffer_len() const { return buffer_len_; }
  const CalibrationTransform& transform() const;

 private:
  Eigen::Index buffer_len_;
  std::vector<Eigen::Vector3d> buffer_;
  std::optional<CalibrationTransform> transform_;
};

// Batch counterpart of the streaming path: fit on the first `buffer_len`
// rows, apply the frozen transform to the whole sequence.
std::pair<Points, CalibrationTransform> streaming_calibrate_all(const Points& pos,
                                                                Eigen::Index buffer_len);

}  // namespace oscphase
