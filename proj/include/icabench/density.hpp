#ifndef ICABENCH_DENSITY_HPP
#define ICABENCH_DENSITY_HPP

#include "icabench/types.hpp"

namespace icabench {

/// Source density model behind the maximum-likelihood ICA objectives.
///
/// logcosh: p(u) = 1 / (pi cosh u), score psi(u) = tanh(u).
/// extended: p_i(u) propto exp(-u^2/2 - s_i log cosh u) with per-component
/// signs s_i = +1 (super-Gaussian) or -1 (sub-Gaussian), score
/// psi_i(u) = u + s_i tanh(u). Sign of zero excess kurtosis is treated as
/// super-Gaussian.
struct DensityModel {
  enum class Kind { logcosh, extended };
  Kind kind = Kind::logcosh;
  Vector signs;  // extended only; empty means all +1

  double sign_of(Eigen::Index i) const {
    return signs.size() > i ? signs[i] : 1.0;
  }
};

/// psi applied elementwise, row i using component i's sign.
Matrix score(const DensityModel& d, const Matrix& y);

/// Row means of psi'.
Vector score_derivative_row_mean(const DensityModel& d, const Matrix& y);

/// Sample average over columns of sum_i -log p_i(y_i), in nats. Includes the
/// normalization constants, so the value is a proper negative log density.
double neg_log_density_mean(const DensityModel& d, const Matrix& y);

/// Numerically stable log cosh.
double log_cosh(double u);

/// Per-row excess kurtosis signs (+1 for >= 0) of a signal matrix.
Vector kurtosis_signs(const Matrix& y);

}  // namespace icabench

#endif  // ICABENCH_DENSITY_HPP
