#ifndef ICABENCH_FASTICA_HPP
#define ICABENCH_FASTICA_HPP

#include "icabench/decompose.hpp"

#include <cstdint>

namespace icabench {

struct FastICAParams {
  double tol = 1e-4;
  int max_iter = 10000;
  std::uint64_t seed = 0;
  bool random_init = false;

  void validate() const;
};

/// Symmetric fixed-point FastICA with the tanh contrast on sphered data.
/// The returned W includes the sphering factor, so W cov(x) W^T = I.
/// Non-convergence within max_iter returns the last iterate with
/// converged = false.
Decomposition fastica(const Dataset& ds, const FastICAParams& params = {});

}  // namespace icabench

#endif  // ICABENCH_FASTICA_HPP
