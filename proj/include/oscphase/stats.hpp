#pragma once

#include <span>

namespace oscphase {

// Continued-fraction regularized incomplete beta function I_x(a, b).
double regularized_incomplete_beta(double a, double b, double x);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  double dof = 0.0;  // Welch-Satterthwaite degrees of freedom
};

// Welch's unequal-variance two-sample t-test, two-sided p-value. Samples of
// identical constant values compare as t = 0, p = 1.
TTestResult welch_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace oscphase
