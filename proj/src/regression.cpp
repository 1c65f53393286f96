#include "icabench/regression.hpp"

#include <cmath>
#include <limits>

namespace icabench {

namespace {

// Lentz continued fraction for the incomplete beta.
double betacf(double a, double b, double x) {
  const double tiny = 1e-300;
  const double eps = std::numeric_limits<double>::epsilon();
  double qab = a + b;
  double qap = a + 1.0;
  double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 10.0 * eps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, int dof) {
  const double d = static_cast<double>(dof);
  const double p = incomplete_beta(d / 2.0, 0.5, d / (d + t * t));
  // The invariant p in (0, 1] survives a zero-residual fit.
  return std::min(1.0, std::max(p, std::numeric_limits<double>::min()));
}

RegressionResult regress(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) {
    throw ValidationError("regress: x and y differ in length");
  }
  const int n = static_cast<int>(x.size());
  if (n < 3) {
    throw ValidationError("regress: need at least 3 points, got " + std::to_string(n));
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw ValidationError("regress: non-finite input");
  }
  const double x_mean = x.mean();
  const double y_mean = y.mean();
  const Vector dx = x.array() - x_mean;
  const Vector dy = y.array() - y_mean;
  const double sxx = dx.squaredNorm();
  if (!(sxx > 0.0)) {
    throw ValidationError("regress: constant regressor");
  }
  const double sxy = dx.dot(dy);
  const double syy = dy.squaredNorm();

  RegressionResult r;
  r.n_points = n;
  r.slope = sxy / sxx;
  r.intercept = y_mean - r.slope * x_mean;
  const double ss_res = std::max(0.0, syy - r.slope * sxy);
  r.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  r.r_squared = std::min(1.0, std::max(0.0, r.r_squared));

  const double dof = static_cast<double>(n - 2);
  const double se2 = ss_res / dof / sxx;
  if (se2 <= 0.0) {
    r.p_value = std::numeric_limits<double>::min();  // exact fit
  } else {
    r.p_value = student_t_two_sided_p(r.slope / std::sqrt(se2), n - 2);
  }
  return r;
}

}  // namespace icabench
