#pragma once

#include <complex>

#include <Eigen/Dense>

#include "oscphase/errors.hpp"
#include "oscphase/trajectory.hpp"

namespace oscphase {

// Complex signal whose real part is the input and whose argument is the
// instantaneous phase.
struct AnalyticSignal {
  Eigen::VectorXcd values;
};

// Projection of a calibrated trajectory onto its dominant axis (the x
// coordinate), mean removed.
Eigen::VectorXd project_principal(const Points& calibrated);

// Frequency-domain analytic signal: DFT, keep DC, double the positive bins,
// keep the Nyquist bin (even N) unscaled, zero the negative bins, inverse
// DFT. Works for arbitrary N >= 4.
AnalyticSignal analytic_signal(const Eigen::VectorXd& x);

// Offline ground-truth phase labels of a calibrated trajectory.
PhaseSeries phase_labels(const Points& calibrated);

}  // namespace oscphase
