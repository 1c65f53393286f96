#ifndef ICABENCH_PICARD_HPP
#define ICABENCH_PICARD_HPP

#include "icabench/decompose.hpp"
#include "icabench/density.hpp"

#include <cstdint>

namespace icabench {

struct PicardParams {
  int memory = 7;              // L-BFGS history length
  double tol = 1e-6;           // max-abs of the relative gradient at exit
  int max_iter = 500;
  int ls_max_backtracks = 10;  // step halvings before falling back
  bool extended = false;       // kurtosis-sign-switched density
  bool orthogonal = false;     // constrain W to a rotation of sphered data
  double lambda_min = 1e-7;    // eigenvalue floor of the Hessian blocks
  std::uint64_t seed = 0;
  bool random_init = false;

  void validate() const;
};

/// L-BFGS minimization of the ICA negative log likelihood in the relative
/// parameterization W <- (I + step) W, preconditioned by the moment-based
/// 2x2-block Hessian approximation, with backtracking line search. Runs on
/// sphered data; the returned W includes the sphering factor. The loss trace
/// holds the accepted-step losses (non-increasing while the density is
/// fixed).
Decomposition picard(const Dataset& ds, const PicardParams& params = {});

/// Orthogonal variant: updates move along exp(skew) rotations, so every
/// iterate satisfies W cov(x) W^T = I. Scores are sign-adapted per component
/// from a nonlinear decorrelation criterion, which covers sub- and
/// super-Gaussian sources alike.
Decomposition picard_o(const Dataset& ds, PicardParams params = {});

/// Negative log likelihood of W on the zero-meaned dataset under the given
/// density, in nats: -ln|det W| - E[sum_i ln p_i(y_i)].
double negative_log_likelihood(const Matrix& w, const Dataset& ds,
                               const DensityModel& density);

/// Relative gradient E[psi(y) y^T] - I of the likelihood at y.
Matrix relative_gradient(const Matrix& y, const DensityModel& density);

}  // namespace icabench

#endif  // ICABENCH_PICARD_HPP
