#include <doctest.h>

#include <cmath>

#include "oscphase/calibration.hpp"
#include "oscphase/circular.hpp"
#include "oscphase/hilbert.hpp"
#include "oscphase/motion_synth.hpp"

using namespace oscphase;

TEST_CASE("fit_synth_params: hand examples") {
  Points reference(2, 3);
  reference << -1.0, 0.0, 1.2, 1.0, 6.0, 1.2;
  const MotionSynthParams params = fit_synth_params(reference, 0.1, 0);
  CHECK(params.alpha_x == doctest::Approx(0.0));
  CHECK(params.beta_x == doctest::Approx(1.0));
  CHECK(params.alpha_y == doctest::Approx(3.0));
  CHECK(params.beta_y == doctest::Approx(1.0));  // (6 - 0) / 6
  CHECK(params.alpha_z == doctest::Approx(1.2));
}

TEST_CASE("fit_synth_params: degenerate reference rejected") {
  Points flat_x(3, 3);
  flat_x << 1, 0, 0, 1, 1, 0, 1, 2, 0;
  CHECK_THROWS_AS(fit_synth_params(flat_x, 0.1, 0), DegenerateReference);
}

TEST_CASE("synthesize: noiseless values from the map") {
  MotionSynthParams params;
  params.alpha_x = 0.5;
  params.alpha_y = -0.25;
  params.alpha_z = 1.0;
  params.beta_x = 0.3;
  params.beta_y = 0.1;
  params.noise_sigma = 0.0;
  Rng rng(1);
  const Eigen::Vector3d at_zero = synthesize(0.0, params, rng);
  CHECK((at_zero - Eigen::Vector3d(0.8, -0.25, 1.0)).norm() < 1e-12);
  const Eigen::Vector3d at_quarter = synthesize(M_PI / 2, params, rng);
  CHECK((at_quarter - Eigen::Vector3d(0.5, -0.15, 1.0)).norm() < 1e-12);
}

TEST_CASE("synthesize: noise moments") {
  MotionSynthParams params;
  params.beta_x = 0.0;
  params.beta_y = 0.0;
  params.noise_sigma = 0.1;
  Rng rng(2);
  const int n = 100000;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  Eigen::Vector3d sq = Eigen::Vector3d::Zero();
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d p = synthesize(0.3, params, rng);
    sum += p;
    sq += p.cwiseProduct(p);
  }
  for (int axis = 0; axis < 3; ++axis) {
    const double mean = sum[axis] / n;
    const double stddev = std::sqrt(sq[axis] / n - mean * mean);
    CHECK(std::abs(mean) < 0.002);
    CHECK(stddev == doctest::Approx(0.1).epsilon(0.02));
  }
}

TEST_CASE("synthesize_trajectory: noiseless ellipse invariant") {
  MotionSynthParams params;
  params.alpha_x = 0.2;
  params.alpha_y = 0.1;
  params.alpha_z = 0.9;
  params.beta_x = 0.4;
  params.beta_y = 0.05;
  params.noise_sigma = 0.0;
  Rng rng(3);
  const Eigen::VectorXd phases = Eigen::VectorXd::LinSpaced(500, -M_PI, M_PI);
  const Trajectory traj = synthesize_trajectory(phases, params, 100.0, "ellipse", rng);
  traj.validate();
  for (Eigen::Index i = 0; i < traj.size(); ++i) {
    const double ex = (traj.pos(i, 0) - params.alpha_x) / params.beta_x;
    const double ey = (traj.pos(i, 1) - params.alpha_y) / params.beta_y;
    CHECK(ex * ex + ey * ey == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(traj.pos(i, 2) == doctest::Approx(params.alpha_z));
  }
}

TEST_CASE("synthesize_trajectory: constant phase with no noise is constant") {
  MotionSynthParams params;
  params.beta_x = 0.3;
  params.beta_y = 0.1;
  params.noise_sigma = 0.0;
  Rng rng(4);
  const Trajectory traj =
      synthesize_trajectory(Eigen::VectorXd::Constant(50, 0.4), params, 100.0, "const", rng);
  for (Eigen::Index i = 1; i < traj.size(); ++i) {
    CHECK((traj.pos.row(i) - traj.pos.row(0)).norm() == 0.0);
  }
}

TEST_CASE("synthesize_trajectory: seed determinism") {
  MotionSynthParams params;
  params.beta_x = 0.3;
  params.beta_y = 0.1;
  params.noise_sigma = 0.05;
  const Eigen::VectorXd phases = Eigen::VectorXd::LinSpaced(100, 0.0, 4.0);
  Rng rng_a(42), rng_b(42);
  const Trajectory a = synthesize_trajectory(phases, params, 100.0, "a", rng_a);
  const Trajectory b = synthesize_trajectory(phases, params, 100.0, "b", rng_b);
  CHECK((a.pos - b.pos).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("round trip: synthesize -> calibrate -> label recovers the generating phase") {
  // Forward-advancing phase, noiseless synthesis; interior samples only.
  const int n = 3000;
  Eigen::VectorXd phases(n);
  for (int t = 0; t < n; ++t) phases[t] = wrap_angle(-2.0 + M_PI * t / 100.0);

  MotionSynthParams params;
  params.alpha_x = 0.3;
  params.alpha_y = -0.2;
  params.alpha_z = 1.0;
  params.beta_x = 0.15;
  params.beta_y = 0.01;
  params.noise_sigma = 0.0;
  Rng rng(5);
  const Trajectory traj = synthesize_trajectory(phases, params, 100.0, "roundtrip", rng);

  const auto [calibrated, transform] = calibrate(traj.pos);
  const PhaseSeries labels = phase_labels(calibrated);

  double worst = 0.0;
  for (int t = n / 10; t < n - n / 10; ++t) {
    worst = std::max(worst, circular_error(labels.values[t], phases[t]));
  }
  CHECK(worst < 0.1);
}
