#include <doctest.h>

#include <cmath>
#include <complex>

#include "oscphase/circular.hpp"
#include "oscphase/hilbert.hpp"
#include "oscphase/rng.hpp"

using namespace oscphase;

namespace {

// Independent O(N^2) DFT oracle.
Eigen::VectorXcd naive_dft(const Eigen::VectorXcd& x) {
  const Eigen::Index n = x.size();
  Eigen::VectorXcd out(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    std::complex<double> sum(0.0, 0.0);
    for (Eigen::Index t = 0; t < n; ++t) {
      const double angle = -2.0 * M_PI * static_cast<double>(k) * static_cast<double>(t) /
                           static_cast<double>(n);
      sum += x[t] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = sum;
  }
  return out;
}

// Analytic-signal oracle built on the naive DFT and the same bin rule.
Eigen::VectorXcd naive_analytic(const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::VectorXcd freq = naive_dft(x.cast<std::complex<double>>());
  const Eigen::Index half = (n + 1) / 2;
  for (Eigen::Index k = 1; k < half; ++k) freq[k] *= 2.0;
  for (Eigen::Index k = (n % 2 == 0) ? n / 2 + 1 : half; k < n; ++k) freq[k] = 0.0;
  // Inverse DFT.
  Eigen::VectorXcd out(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    std::complex<double> sum(0.0, 0.0);
    for (Eigen::Index k = 0; k < n; ++k) {
      const double angle = 2.0 * M_PI * static_cast<double>(k) * static_cast<double>(t) /
                           static_cast<double>(n);
      sum += freq[k] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[t] = sum / static_cast<double>(n);
  }
  return out;
}

}  // namespace

TEST_CASE("project_principal: x column, mean removed") {
  Points traj(100, 3);
  for (int i = 0; i < 100; ++i) {
    traj.row(i) << std::sin(2 * M_PI * i / 100.0) + 0.5, 3.0, -7.0;
  }
  const Eigen::VectorXd proj = project_principal(traj);
  CHECK(std::abs(proj.mean()) < 1e-12);
  for (int i = 0; i < 100; ++i) {
    CHECK(proj[i] == doctest::Approx(std::sin(2 * M_PI * i / 100.0)).epsilon(1e-9));
  }
}

TEST_CASE("analytic_signal: integer-frequency cosine gives the complex exponential") {
  for (const int n : {256, 1000}) {
    for (const int k : {3, 17}) {
      Eigen::VectorXd x(n);
      for (int t = 0; t < n; ++t) x[t] = std::cos(2.0 * M_PI * k * t / n);
      const AnalyticSignal analytic = analytic_signal(x);
      for (int t = 0; t < n; ++t) {
        const std::complex<double> expected(std::cos(2.0 * M_PI * k * t / n),
                                            std::sin(2.0 * M_PI * k * t / n));
        CHECK(std::abs(analytic.values[t] - expected) < 1e-9);
      }
    }
  }
}

TEST_CASE("analytic_signal: sine is the quadrature-shifted cosine") {
  const int n = 200, k = 5;
  Eigen::VectorXd x(n);
  for (int t = 0; t < n; ++t) x[t] = std::sin(2.0 * M_PI * k * t / n);
  const AnalyticSignal analytic = analytic_signal(x);
  for (int t = 0; t < n; ++t) {
    const double phase = 2.0 * M_PI * k * t / n - M_PI / 2.0;
    const std::complex<double> expected(std::cos(phase), std::sin(phase));
    CHECK(std::abs(analytic.values[t] - expected) < 1e-9);
  }
}

TEST_CASE("analytic_signal: zero input gives zero output") {
  const AnalyticSignal analytic = analytic_signal(Eigen::VectorXd::Zero(64));
  CHECK(analytic.values.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("analytic_signal: too short and non-finite inputs rejected") {
  CHECK_THROWS_AS(analytic_signal(Eigen::VectorXd::Zero(3)), TooShort);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(8);
  bad[3] = std::nan("");
  CHECK_THROWS_AS(analytic_signal(bad), InvalidInput);
}

TEST_CASE("analytic_signal: matches the naive-DFT oracle on awkward lengths") {
  Rng rng(17);
  for (const int n : {37, 100, 129}) {
    Eigen::VectorXd x(n);
    for (int t = 0; t < n; ++t) x[t] = rng.uniform(-1, 1);
    const AnalyticSignal fast = analytic_signal(x);
    const Eigen::VectorXcd oracle = naive_analytic(x);
    for (int t = 0; t < n; ++t) CHECK(std::abs(fast.values[t] - oracle[t]) < 1e-8);
  }
}

TEST_CASE("analytic_signal: real part reproduces the input (property)") {
  Rng rng(23);
  for (const int n : {64, 501}) {
    Eigen::VectorXd x(n);
    for (int t = 0; t < n; ++t) x[t] = rng.uniform(-2, 2);
    const AnalyticSignal analytic = analytic_signal(x);
    for (int t = 0; t < n; ++t) CHECK(analytic.values[t].real() == doctest::Approx(x[t]).epsilon(1e-9));
  }
}

TEST_CASE("analytic_signal: retained positive-frequency energy equals twice the AC energy") {
  Rng rng(29);
  // Odd length: no Nyquist bin, so the doubled positive bins carry exactly
  // twice the AC energy (Parseval).
  const int n = 401;
  Eigen::VectorXd x(n);
  for (int t = 0; t < n; ++t) x[t] = rng.uniform(-1, 1);
  x.array() -= x.mean();

  const AnalyticSignal analytic = analytic_signal(x);
  const double analytic_energy = analytic.values.squaredNorm();
  const double input_energy = x.squaredNorm();
  CHECK(analytic_energy == doctest::Approx(2.0 * input_energy).epsilon(1e-6));
}

TEST_CASE("fft round trip is tight up to 1e5 samples") {
  Rng rng(31);
  for (const int n : {1000, 100000}) {
    Eigen::VectorXd x(n);
    for (int t = 0; t < n; ++t) x[t] = rng.uniform(-1, 1);
    // Round trip through the analytic construction twice exercises fwd+inv.
    const AnalyticSignal a = analytic_signal(x);
    Eigen::VectorXd real_part(n);
    for (int t = 0; t < n; ++t) real_part[t] = a.values[t].real();
    CHECK((real_part - x).norm() < 1e-9 * x.norm());
  }
}

TEST_CASE("phase_labels: integer-frequency cosine is exact") {
  const int n = 1000, k = 7;
  Points traj(n, 3);
  for (int t = 0; t < n; ++t) {
    traj.row(t) << std::cos(2.0 * M_PI * k * t / n), 0.0, 0.0;
  }
  const PhaseSeries labels = phase_labels(traj);
  labels.validate();
  for (int t = 0; t < n; ++t) {
    const double expected = wrap_angle(2.0 * M_PI * k * t / n);
    CHECK(circular_error(labels.values[t], expected) < 1e-9);
  }
}

TEST_CASE("phase_labels: pure tone advances by a constant increment") {
  const int n = 512, k = 9;
  Points traj(n, 3);
  for (int t = 0; t < n; ++t) traj.row(t) << std::cos(2.0 * M_PI * k * t / n), 0, 0;
  const PhaseSeries labels = phase_labels(traj);
  const double expected_step = 2.0 * M_PI * k / n;
  for (int t = 1; t < n; ++t) {
    const double step = wrap_angle(labels.values[t] - labels.values[t - 1]);
    CHECK(step == doctest::Approx(expected_step).epsilon(1e-6));
  }
}

TEST_CASE("phase_labels: slow chirp tracked on the middle 80%") {
  const int n = 2000;
  Points traj(n, 3);
  Eigen::VectorXd true_phase(n);
  for (int t = 0; t < n; ++t) {
    const double tau = t / static_cast<double>(n);
    // Instantaneous frequency sweeping from 8 to 12 cycles per record.
    true_phase[t] = 2.0 * M_PI * (8.0 + 2.0 * tau) * tau;
    traj.row(t) << std::cos(true_phase[t]), 0, 0;
  }
  const PhaseSeries labels = phase_labels(traj);
  double worst = 0.0;
  for (int t = n / 10; t < n - n / 10; ++t) {
    worst = std::max(worst, circular_error(labels.values[t], wrap_angle(true_phase[t])));
  }
  CHECK(worst < 0.05);
}

TEST_CASE("phase_labels: constant trajectory is degenerate") {
  Points traj = Points::Constant(100, 3, 1.0);
  CHECK_THROWS_AS(phase_labels(traj), DegenerateSignal);
}
