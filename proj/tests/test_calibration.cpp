#include <doctest.h>

#include <cmath>

#include "oscphase/calibration.hpp"
#include "oscphase/rng.hpp"

using namespace oscphase;

namespace {

// Independent oracle: classical Jacobi rotations on a symmetric 3x3 matrix.
// Returns the eigenvector of the largest eigenvalue, avoiding Eigen's solver
// on purpose.
Eigen::Vector3d jacobi_principal_axis(Eigen::Matrix3d a) {
  Eigen::Matrix3d v = Eigen::Matrix3d::Identity();
  for (int sweep = 0; sweep < 50; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < 3; ++p) {
      for (int q = p + 1; q < 3; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-30) break;
    for (int p = 0; p < 3; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (std::abs(a(p, q)) < 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
        rot(p, p) = c;
        rot(q, q) = c;
        rot(p, q) = s;
        rot(q, p) = -s;
        a = rot.transpose() * a * rot;
        v = v * rot;
      }
    }
  }
  int best = 0;
  for (int i = 1; i < 3; ++i) {
    if (a(i, i) > a(best, best)) best = i;
  }
  Eigen::Vector3d axis = v.col(best).normalized();
  int dominant = 0;
  axis.cwiseAbs().maxCoeff(&dominant);
  if (axis[dominant] < 0.0) axis = -axis;
  return axis;
}

Eigen::Vector3d random_unit(Rng& rng) {
  while (true) {
    const Eigen::Vector3d v(rng.gaussian(), rng.gaussian(), rng.gaussian());
    const double n = v.norm();
    if (n > 1e-6) return v / n;
  }
}

Eigen::Matrix3d random_rotation(Rng& rng) {
  const Eigen::Vector3d axis = random_unit(rng);
  const double angle = rng.uniform(0.0, 2.0 * M_PI);
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

Points noisy_line(const Eigen::Vector3d& direction, int count, double noise, Rng& rng) {
  Points traj(count, 3);
  for (int i = 0; i < count; ++i) {
    const double s = rng.uniform(-1.0, 1.0);
    traj.row(i) = (direction * s +
                   Eigen::Vector3d(rng.gaussian(0, noise), rng.gaussian(0, noise),
                                   rng.gaussian(0, noise)))
                      .transpose();
  }
  return traj;
}

}  // namespace

TEST_CASE("center: hand example") {
  Points traj(2, 3);
  traj << 1, 2, 3, 3, 2, 1;
  const auto [centered, mean] = center(traj);
  CHECK((mean - Eigen::Vector3d(2, 2, 2)).norm() == 0.0);
  CHECK((centered.row(0) - Eigen::RowVector3d(-1, 0, 1)).norm() == 0.0);
  CHECK((centered.row(1) - Eigen::RowVector3d(1, 0, -1)).norm() == 0.0);
}

TEST_CASE("center: already centered input is unchanged") {
  Points traj(4, 3);
  traj << 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1, 0;
  const auto [centered, mean] = center(traj);
  CHECK(mean.norm() == 0.0);
  CHECK((centered - traj).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("center: single sample maps to the origin") {
  Points traj(1, 3);
  traj << 5, 5, 5;
  const auto [centered, mean] = center(traj);
  CHECK((mean - Eigen::Vector3d(5, 5, 5)).norm() == 0.0);
  CHECK(centered.row(0).norm() == 0.0);
}

TEST_CASE("center: output mean vanishes") {
  Rng rng(1);
  Points traj(500, 3);
  for (Eigen::Index i = 0; i < traj.size(); ++i) traj.data()[i] = rng.uniform(-10, 10);
  const auto [centered, mean] = center(traj);
  CHECK(centered.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("principal_direction: axis-aligned point pairs") {
  Points x_axis(2, 3);
  x_axis << -1, 0, 0, 1, 0, 0;
  CHECK((principal_direction(x_axis) - Eigen::Vector3d::UnitX()).norm() < 1e-12);

  Points y_axis(2, 3);
  y_axis << 0, -1, 0, 0, 1, 0;
  CHECK((principal_direction(y_axis) - Eigen::Vector3d::UnitY()).norm() < 1e-12);
}

TEST_CASE("principal_direction: noisy diagonal line matches the Jacobi oracle") {
  Rng rng(7);
  const Eigen::Vector3d truth = Eigen::Vector3d(1, 1, 0).normalized();
  Points traj = noisy_line(truth, 500, 0.01, rng);
  const auto [centered, mean] = center(traj);
  const Eigen::Vector3d p = principal_direction(centered);
  CHECK((p - truth).norm() < 0.02);

  const Eigen::Matrix3d cov = centered.transpose() * centered / 500.0;
  const Eigen::Vector3d oracle = jacobi_principal_axis(cov);
  CHECK((p - oracle).norm() < 1e-9);
}

TEST_CASE("principal_direction: degenerate input rejected") {
  Points traj = Points::Constant(10, 3, 2.0);
  const auto [centered, mean] = center(traj);
  CHECK_THROWS_AS(principal_direction(centered), DegenerateTrajectory);
}

TEST_CASE("alignment_rotation: aligned case is exactly the identity") {
  const Eigen::Matrix3d r = alignment_rotation(Eigen::Vector3d::UnitX());
  CHECK((r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("alignment_rotation: hand-evaluated Rodrigues for p = e_y") {
  const Eigen::Matrix3d r = alignment_rotation(Eigen::Vector3d::UnitY());
  Eigen::Matrix3d expected;
  expected << 0, 1, 0, -1, 0, 0, 0, 0, 1;
  CHECK((r - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((r * Eigen::Vector3d::UnitY() - Eigen::Vector3d::UnitX()).norm() < 1e-12);
}

TEST_CASE("alignment_rotation: antiparallel case") {
  const Eigen::Matrix3d r = alignment_rotation(-Eigen::Vector3d::UnitX());
  const Eigen::Matrix3d expected = Eigen::Vector3d(-1, -1, 1).asDiagonal();
  CHECK((r - expected).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("alignment_rotation: non-unit input rejected") {
  CHECK_THROWS_AS(alignment_rotation(Eigen::Vector3d(1, 1, 0)), InvalidInput);
}

TEST_CASE("alignment_rotation: maps p to e_x over random unit vectors (property)") {
  Rng rng(13);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::Vector3d p = random_unit(rng);
    const Eigen::Matrix3d r = alignment_rotation(p);
    CHECK((r * p - Eigen::Vector3d::UnitX()).norm() < 1e-9);
    CHECK((r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("alignment_rotation: continuity away from the antiparallel point") {
  const Eigen::Vector3d p = Eigen::Vector3d(0.3, 0.9, 0.2).normalized();
  const Eigen::Vector3d q = (p + Eigen::Vector3d::Constant(1e-7)).normalized();
  const Eigen::Matrix3d rp = alignment_rotation(p);
  const Eigen::Matrix3d rq = alignment_rotation(q);
  CHECK((rp - rq).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("calibrate: already calibrated trajectory is unchanged") {
  // Zero mean, diagonal covariance dominated by x.
  Points traj(4, 3);
  traj << -1, 0.01, 0, 1, 0.01, 0, -0.5, -0.01, 0, 0.5, -0.01, 0;
  const auto [aligned, transform] = calibrate(traj);
  CHECK((transform.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((aligned - traj).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("calibrate: sinusoid along y at an offset lands on the x axis") {
  Points traj(200, 3);
  for (int i = 0; i < 200; ++i) {
    const double t = i / 100.0;
    traj.row(i) << 10.0, 10.0 + 0.2 * std::sin(2 * M_PI * t), 10.0;
  }
  const auto [aligned, transform] = calibrate(traj);
  CHECK(aligned.colwise().mean().cwiseAbs().maxCoeff() < 1e-9);
  // All motion on x now.
  CHECK(aligned.col(1).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(aligned.col(2).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(aligned.col(0).cwiseAbs().maxCoeff() == doctest::Approx(0.2).epsilon(1e-3));
}

TEST_CASE("calibrate: rigid-motion invariance (property)") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    Points traj(100, 3);
    for (int i = 0; i < 100; ++i) {
      const double t = i / 100.0;
      traj.row(i) << 0.3 * std::cos(2 * M_PI * t) + 0.01 * rng.gaussian(),
          0.05 * std::sin(2 * M_PI * t) + 0.01 * rng.gaussian(), 0.01 * rng.gaussian();
    }
    const Eigen::Matrix3d q = random_rotation(rng);
    const Eigen::Vector3d shift(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
    Points moved = traj * q.transpose();
    moved.rowwise() += shift.transpose();

    const auto [aligned_orig, t_orig] = calibrate(traj);
    const auto [aligned_moved, t_moved] = calibrate(moved);

    CHECK(aligned_moved.colwise().mean().cwiseAbs().maxCoeff() < 1e-9);
    const Eigen::Vector3d p = principal_direction(aligned_moved);
    CHECK(std::min((p - Eigen::Vector3d::UnitX()).norm(), (p + Eigen::Vector3d::UnitX()).norm()) <
          1e-6);
    // The e_x projection agrees up to a global sign.
    const Eigen::VectorXd proj_orig = aligned_orig.col(0);
    const Eigen::VectorXd proj_moved = aligned_moved.col(0);
    const double agree = std::min((proj_orig - proj_moved).norm(), (proj_orig + proj_moved).norm());
    CHECK(agree < 1e-6 * std::max(1.0, proj_orig.norm()));
  }
}

TEST_CASE("streaming calibrator: buffering then flush") {
  StreamingCalibrator calib(5);
  Points traj(12, 3);
  for (int i = 0; i < 12; ++i) {
    const double t = i / 10.0;
    traj.row(i) << 2.0 + std::cos(2 * M_PI * t), 3.0 + 0.1 * std::sin(2 * M_PI * t), 1.0 + 0.01 * i;
  }
  int emitted = 0;
  for (int i = 0; i < 4; ++i) {
    CHECK(calib.push(traj.row(i).transpose()).empty());  // Buffering
    CHECK_FALSE(calib.fitted());
  }
  const auto flushed = calib.push(traj.row(4).transpose());
  CHECK(flushed.size() == 5);
  CHECK(calib.fitted());
  emitted += static_cast<int>(flushed.size());
  for (int i = 5; i < 12; ++i) {
    const auto out = calib.push(traj.row(i).transpose());
    CHECK(out.size() == 1);
    ++emitted;
  }
  CHECK(emitted == 12);
}

TEST_CASE("streaming calibrator: constant stream is degenerate at fit time") {
  StreamingCalibrator calib(3);
  const Eigen::Vector3d point(1, 1, 1);
  CHECK(calib.push(point).empty());
  CHECK(calib.push(point).empty());
  CHECK_THROWS_AS(calib.push(point), DegenerateTrajectory);
}

TEST_CASE("streaming calibrator: full-period buffer approximates the batch transform") {
  Points traj(1000, 3);
  for (int i = 0; i < 1000; ++i) {
    const double t = i / 100.0;  // 0.5 Hz oscillation: 200 samples per period
    traj.row(i) << 1.0 + 0.3 * std::cos(M_PI * t), -2.0 + 0.05 * std::sin(M_PI * t), 0.7;
  }
  const auto [aligned_full, t_full] = calibrate(traj);
  const auto [aligned_stream, t_stream] = streaming_calibrate_all(traj, 400);
  CHECK(t_full.rotation_angle_to(t_stream) < 0.1);
  CHECK((t_full.mean_offset - t_stream.mean_offset).norm() < 0.05);
}

TEST_CASE("streaming_calibrate_all matches the incremental calibrator") {
  Rng rng(3);
  Points traj(50, 3);
  for (Eigen::Index i = 0; i < traj.size(); ++i) traj.data()[i] = rng.uniform(-1, 1);
  const auto [batch, transform] = streaming_calibrate_all(traj, 10);

  StreamingCalibrator calib(10);
  std::vector<Eigen::Vector3d> streamed;
  for (Eigen::Index i = 0; i < traj.rows(); ++i) {
    for (const auto& p : calib.push(traj.row(i).transpose())) streamed.push_back(p);
  }
  REQUIRE(streamed.size() == 50);
  for (std::size_t i = 0; i < streamed.size(); ++i) {
    CHECK((streamed[i].transpose() - batch.row(static_cast<Eigen::Index>(i))).norm() == 0.0);
  }
}
