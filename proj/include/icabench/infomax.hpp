#ifndef ICABENCH_INFOMAX_HPP
#define ICABENCH_INFOMAX_HPP

#include "icabench/decompose.hpp"

#include <cstdint>

namespace icabench {

struct InfomaxParams {
  double lrate = 0.0;            // 0 => 1e-3 / ln(n)
  double anneal_factor = 0.9;    // applied when successive updates oscillate
  double anneal_angle_deg = 60.0;
  double tol = 1e-8;             // squared Frobenius norm of per-pass weight change
  int max_iter = 100000;         // passes over the data
  int block = 0;                 // 0 => ceil(min(5 ln N, 0.3 N))
  bool extended = false;         // kurtosis-sign-switched scores
  std::uint64_t seed = 0;
  bool random_init = false;      // random orthogonal start instead of identity

  void validate() const;
};

/// Natural-gradient ascent on the Infomax objective (logistic score
/// tanh(u/2); extended mode uses u + k tanh(u) with per-component kurtosis
/// signs k). Runs on sphered data; the returned W includes the sphering
/// factor.
Decomposition infomax(const Dataset& ds, const InfomaxParams& params = {});

}  // namespace icabench

#endif  // ICABENCH_INFOMAX_HPP
