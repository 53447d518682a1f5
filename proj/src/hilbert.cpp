#include "oscphase/hilbert.hpp"

#include <cmath>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace oscphase {

Eigen::VectorXd project_principal(const Points& calibrated) {
  Eigen::VectorXd x = calibrated.col(0);
  x.array() -= x.mean();
  return x;
}

AnalyticSignal analytic_signal(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  if (n < 4) throw TooShort("analytic_signal: need at least 4 samples");
  if (!x.allFinite()) throw InvalidInput("analytic_signal: non-finite input");

  std::vector<std::complex<double>> time(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) time[static_cast<std::size_t>(i)] = {x[i], 0.0};

  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> freq;
  fft.fwd(freq, time);

  // Single-sided spectrum construction.
  const Eigen::Index half = (n + 1) / 2;  // ceil(n / 2)
  for (Eigen::Index k = 1; k < half; ++k) freq[static_cast<std::size_t>(k)] *= 2.0;
  if (n % 2 == 0) {
    // Nyquist bin stays unscaled.
    for (Eigen::Index k = n / 2 + 1; k < n; ++k) freq[static_cast<std::size_t>(k)] = 0.0;
  } else {
    for (Eigen::Index k = half; k < n; ++k) freq[static_cast<std::size_t>(k)] = 0.0;
  }

  fft.inv(time, freq);
  AnalyticSignal result;
  result.values.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) result.values[i] = time[static_cast<std::size_t>(i)];
  return result;
}

PhaseSeries phase_labels(const Points& calibrated) {
  const AnalyticSignal analytic = analytic_signal(project_principal(calibrated));
  if (analytic.values.cwiseAbs().maxCoeff() < 1e-9) {
    throw DegenerateSignal("phase_labels: analytic amplitude vanishes (constant signal?)");
  }
  PhaseSeries labels;
  labels.values.resize(analytic.values.size());
  for (Eigen::Index i = 0; i < analytic.values.size(); ++i) {
    labels.values[i] = std::arg(analytic.values[i]);
  }
  return labels;
}

}  // namespace oscphase
