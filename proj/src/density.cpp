#include "icabench/density.hpp"

#include <cmath>

namespace icabench {

double log_cosh(double u) {
  const double a = std::abs(u);
  return a + std::log1p(std::exp(-2.0 * a)) - M_LN2;
}

namespace {

// Normalization of the sub-Gaussian density exp(-u^2/2 + log cosh u):
// integral of cosh(u) exp(-u^2/2) du = sqrt(2 pi) e^{1/2}.
const double kLogZSub = 0.5 * std::log(2.0 * M_PI) + 0.5;

// Normalization of the super-Gaussian density exp(-u^2/2 - log cosh u),
// evaluated once by Simpson quadrature.
double log_z_super() {
  static const double value = [] {
    const double half = 12.0;
    const int n = 48000;  // even
    const double h = 2.0 * half / n;
    auto f = [](double u) { return std::exp(-0.5 * u * u - log_cosh(u)); };
    double sum = f(-half) + f(half);
    for (int i = 1; i < n; ++i) {
      sum += f(-half + i * h) * (i % 2 ? 4.0 : 2.0);
    }
    return std::log(sum * h / 3.0);
  }();
  return value;
}

}  // namespace

Matrix score(const DensityModel& d, const Matrix& y) {
  if (d.kind == DensityModel::Kind::logcosh) {
    return y.array().tanh().matrix();
  }
  Matrix psi = y.array().tanh().matrix();
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    psi.row(i) = y.row(i) + d.sign_of(i) * psi.row(i);
  }
  return psi;
}

Vector score_derivative_row_mean(const DensityModel& d, const Matrix& y) {
  Vector out(y.rows());
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const double sech2_mean =
        (1.0 - y.row(i).array().tanh().square()).mean();
    out[i] = d.kind == DensityModel::Kind::logcosh
                 ? sech2_mean
                 : 1.0 + d.sign_of(i) * sech2_mean;
  }
  return out;
}

double neg_log_density_mean(const DensityModel& d, const Matrix& y) {
  const double n_samples = static_cast<double>(y.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    double row = 0.0;
    if (d.kind == DensityModel::Kind::logcosh) {
      for (Eigen::Index t = 0; t < y.cols(); ++t) {
        row += log_cosh(y(i, t));
      }
      row = row / n_samples + std::log(M_PI);
    } else {
      const double s = d.sign_of(i);
      for (Eigen::Index t = 0; t < y.cols(); ++t) {
        const double u = y(i, t);
        row += 0.5 * u * u + s * log_cosh(u);
      }
      row = row / n_samples + (s > 0.0 ? log_z_super() : kLogZSub);
    }
    total += row;
  }
  return total;
}

Vector kurtosis_signs(const Matrix& y) {
  Vector signs(y.rows());
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const auto row = y.row(i).array();
    const double mean = row.mean();
    const double m2 = (row - mean).square().mean();
    const double m4 = (row - mean).pow(4).mean();
    const double excess = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
    signs[i] = excess >= 0.0 ? 1.0 : -1.0;  // zero excess counts as super
  }
  return signs;
}

}  // namespace icabench
