#include "oscphase/motion_synth.hpp"

#include <cmath>

namespace oscphase {

MotionSynthParams fit_synth_params(const Points& reference, double noise_sigma,
                                   std::uint64_t seed) {
  if (reference.rows() < 1) throw InvalidInput("fit_synth_params: empty reference");
  const Eigen::Vector3d lo = reference.colwise().minCoeff().transpose();
  const Eigen::Vector3d hi = reference.colwise().maxCoeff().transpose();
  if (!(hi.x() > lo.x()) || !(hi.y() > lo.y())) {
    throw DegenerateReference("fit_synth_params: zero range on x or y");
  }
  MotionSynthParams params;
  params.alpha_x = 0.5 * (lo.x() + hi.x());
  params.alpha_y = 0.5 * (lo.y() + hi.y());
  params.alpha_z = 0.5 * (lo.z() + hi.z());
  params.beta_x = 0.5 * (hi.x() - lo.x());
  params.beta_y = (hi.y() - lo.y()) / 6.0;
  params.noise_sigma = noise_sigma;
  params.seed = seed;
  return params;
}

Eigen::Vector3d synthesize(double theta, const MotionSynthParams& params, Rng& rng) {
  if (!std::isfinite(theta)) throw InvalidInput("synthesize: non-finite phase");
  Eigen::Vector3d point;
  point.x() = params.alpha_x + params.beta_x * std::cos(theta) + rng.gaussian(0.0, params.noise_sigma);
  point.y() = params.alpha_y + params.beta_y * std::sin(theta) + rng.gaussian(0.0, params.noise_sigma);
  point.z() = params.alpha_z + rng.gaussian(0.0, params.noise_sigma);
  return point;
}

Trajectory synthesize_trajectory(const Eigen::Ref<const Eigen::VectorXd>& phases,
                                 const MotionSynthParams& params, double rate,
                                 const std::string& id, Rng& rng) {
  if (phases.size() < 1) throw InvalidInput("synthesize_trajectory: empty phase trace");
  Points pos(phases.size(), 3);
  for (Eigen::Index i = 0; i < phases.size(); ++i) {
    pos.row(i) = synthesize(phases[i], params, rng).transpose();
  }
  return make_trajectory(id, std::move(pos), rate);
}

Points reference_exemplar(Eigen::Index samples) {
  Points pos(samples, 3);
  for (Eigen::Index i = 0; i < samples; ++i) {
    const double theta = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(samples);
    pos(i, 0) = 0.15 * std::cos(theta);
    pos(i, 1) = 0.03 * std::sin(theta);
    pos(i, 2) = 1.0;
  }
  return pos;
}

}  // namespace oscphase
