#include "oscphase/calibration.hpp"

#include <cmath>

namespace oscphase {

namespace {

constexpr double kAlignedTol = 1e-12;  // 1 - c below this counts as aligned

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return m;
}

}  // namespace

double CalibrationTransform::rotation_angle_to(const CalibrationTransform& other) const {
  const double trace = (rotation * other.rotation.transpose()).trace();
  const double c = std::clamp((trace - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

std::pair<Points, Eigen::Vector3d> center(const Points& pos) {
  if (pos.rows() < 1) throw TooShort("center: empty point set");
  const Eigen::Vector3d mean = pos.colwise().mean().transpose();
  Points centered = pos.rowwise() - mean.transpose();
  return {std::move(centered), mean};
}

Eigen::Vector3d principal_direction(const Points& centered) {
  if (centered.rows() < 2) throw TooShort("principal_direction: need at least 2 samples");
  const Eigen::Matrix3d cov =
      centered.transpose() * centered / static_cast<double>(centered.rows());
  if (cov.cwiseAbs().maxCoeff() < 1e-24) {
    throw DegenerateTrajectory("principal_direction: zero covariance (all points identical)");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  Eigen::Vector3d p = solver.eigenvectors().col(2);  // largest eigenvalue last
  p.normalize();
  // Sign rule: component of largest absolute value made positive.
  int dominant = 0;
  p.cwiseAbs().maxCoeff(&dominant);
  if (p[dominant] < 0.0) p = -p;
  return p;
}

Eigen::Matrix3d alignment_rotation(const Eigen::Vector3d& p) {
  if (std::abs(p.norm() - 1.0) > 1e-9) {
    throw InvalidInput("alignment_rotation: direction must be a unit vector");
  }
  const Eigen::Vector3d e_x = Eigen::Vector3d::UnitX();
  const double c = p.dot(e_x);
  if (1.0 - c < kAlignedTol) {
    return Eigen::Matrix3d::Identity();
  }
  if (1.0 + c < kAlignedTol) {
    // Antiparallel: 180 degrees about e_z.
    return Eigen::Vector3d(-1.0, -1.0, 1.0).asDiagonal();
  }
  const Eigen::Vector3d v = p.cross(e_x);
  const double s2 = v.squaredNorm();
  const Eigen::Matrix3d vx = skew(v);
  return Eigen::Matrix3d::Identity() + vx + vx * vx * ((1.0 - c) / s2);
}

std::pair<Points, CalibrationTransform> calibrate(const Points& pos) {
  auto [centered, mean] = center(pos);
  const Eigen::Vector3d p = principal_direction(centered);
  CalibrationTransform transform;
  transform.mean_offset = mean;
  transform.rotation = alignment_rotation(p);
  return {transform.apply(pos), transform};
}

StreamingCalibrator::StreamingCalibrator(Eigen::Index buffer_len) : buffer_len_(buffer_len) {
  if (buffer_len < 2) throw InvalidInput("StreamingCalibrator: buffer length must be >= 2");
  buffer_.reserve(static_cast<std::size_t>(buffer_len));
}

const CalibrationTransform& StreamingCalibrator::transform() const {
  if (!transform_) throw InvalidInput("StreamingCalibrator: transform not fitted yet");
  return *transform_;
}

std::vector<Eigen::Vector3d> StreamingCalibrator::push(const Eigen::Vector3d& sample) {
  if (transform_) {
    return {transform_->apply(sample)};
  }
  buffer_.push_back(sample);
  if (static_cast<Eigen::Index>(buffer_.size()) < buffer_len_) {
    return {};  // Buffering
  }
  Points buffered(buffer_len_, 3);
  for (Eigen::Index i = 0; i < buffer_len_; ++i) buffered.row(i) = buffer_[i].transpose();
  auto [aligned, transform] = calibrate(buffered);
  transform_ = transform;
  std::vector<Eigen::Vector3d> flushed;
  flushed.reserve(buffer_.size());
  for (Eigen::Index i = 0; i < aligned.rows(); ++i) flushed.push_back(aligned.row(i).transpose());
  buffer_.clear();
  return flushed;
}

std::pair<Points, CalibrationTransform> streaming_calibrate_all(const Points& pos,
                                                                Eigen::Index buffer_len) {
  if (pos.rows() < buffer_len) {
    throw TooShort("streaming_calibrate_all: fewer samples than the buffer length");
  }
  auto [aligned_prefix, transform] = calibrate(Points(pos.topRows(buffer_len)));
  (void)aligned_prefix;
  return {transform.apply(pos), transform};
}

}  // namespace oscphase
