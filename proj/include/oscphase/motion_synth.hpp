#pragma once

#include <string>

#include <Eigen/Dense>

#include "oscphase/errors.hpp"
#include "oscphase/rng.hpp"
#include "oscphase/trajectory.hpp"

namespace oscphase {

// Phase-to-position map: an ellipse in the xy-plane at a constant height,
// plus isotropic Gaussian noise.
struct MotionSynthParams {
  double alpha_x = 0.0;  // mid-ranges, meters
  double alpha_y = 0.0;
  double alpha_z = 0.0;
  double beta_x = 0.0;  // amplitudes, meters
  double beta_y = 0.0;
  double noise_sigma = 0.1;
  std::uint64_t seed = 0;
};

// alpha_k = (min_k + max_k)/2; beta_x = (max_x - min_x)/2;
// beta_y = (max_y - min_y)/6.
MotionSynthParams fit_synth_params(const Points& reference, double noise_sigma,
                                   std::uint64_t seed);

// (alpha_x + beta_x cos(theta) + n1, alpha_y + beta_y sin(theta) + n2,
//  alpha_z + n3), n ~ N(0, sigma^2) drawn in x, y, z order.
Eigen::Vector3d synthesize(double theta, const MotionSynthParams& params, Rng& rng);

Trajectory synthesize_trajectory(const Eigen::Ref<const Eigen::VectorXd>& phases,
                                 const MotionSynthParams& params, double rate,
                                 const std::string& id, Rng& rng);

// Bundled clean reference: x amplitude 0.15 m, y amplitude 0.03 m, z constant
// 1.0 m, one full cycle. Stands in for a recorded exemplar and can be
// replaced by any trajectory CSV.
Points reference_exemplar(Eigen::Index samples = 1000);

}  // namespace oscphase
