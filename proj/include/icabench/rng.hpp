#ifndef ICABENCH_RNG_HPP
#define ICABENCH_RNG_HPP

#include "icabench/types.hpp"

#include <cstdint>
#include <random>

namespace icabench {

// Seeded generator producing the same stream on every platform: the integer
// engine is bit-specified by the standard and all real-valued draws are
// derived from it by explicit arithmetic rather than std::*_distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in (0, 1), clamped away from 0 for inverse-CDF sampling.
  double uniform01_open() {
    double u = uniform01();
    return u > 0x1.0p-53 ? u : 0x1.0p-53;
  }

  /// Standard normal via inverse CDF.
  double gaussian();

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  /// In-place Fisher-Yates shuffle of an index vector.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  /// Matrix with i.i.d. standard-normal entries.
  Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols);

  /// Haar-ish random orthogonal matrix (QR of a Gaussian matrix with the
  /// sign of R's diagonal absorbed, so the result is unique per draw).
  Matrix random_orthogonal(Eigen::Index n);

 private:
  std::mt19937_64 engine_;
};

/// Inverse of the standard normal CDF (Acklam's rational approximation with
/// one Halley refinement; |error| < 1e-15 on (0,1)).
double inverse_normal_cdf(double p);

}  // namespace icabench

#endif  // ICABENCH_RNG_HPP
