#ifndef ICABENCH_REGRESSION_HPP
#define ICABENCH_REGRESSION_HPP

#include "icabench/types.hpp"

namespace icabench {

struct RegressionResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double p_value = 1.0;  // two-sided t-test on the slope, n-2 dof
  int n_points = 0;
};

/// Ordinary least squares of y on x. Throws ValidationError for fewer than
/// 3 points or a constant regressor.
RegressionResult regress(const Vector& x, const Vector& y);

/// Regularized incomplete beta function I_x(a, b) (continued fraction).
double incomplete_beta(double a, double b, double x);

/// Two-sided p-value of a t statistic with the given degrees of freedom.
double student_t_two_sided_p(double t, int dof);

}  // namespace icabench

#endif  // ICABENCH_REGRESSION_HPP
