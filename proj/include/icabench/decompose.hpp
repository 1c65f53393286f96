#ifndef ICABENCH_DECOMPOSE_HPP
#define ICABENCH_DECOMPOSE_HPP

#include "icabench/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace icabench {

/// Result of any decomposition algorithm. W maps zero-meaned channel data to
/// component activations; A = W^-1 holds the component maps as columns.
struct Decomposition {
  Matrix w;  // k x n unmixing (usually square)
  Matrix a;  // n x k mixing
  std::string algorithm_id;
  std::string params_digest;
  int iterations = 0;
  bool converged = true;
  double wall_time_sec = 0.0;
  std::vector<double> loss_trace;  // accepted-step losses (optimizers only)
  std::string warning;

  /// Throws if W*A deviates from the identity by more than 1e-8 or W has a
  /// non-finite or zero row.
  void validate() const;
};

/// Fills A from W (inverse, or right pseudo-inverse for wide W) and the
/// params digest, then validates.
void finalize_decomposition(Decomposition& dec, const std::string& params_text);

/// Symmetric sphering matrix S = C^{-1/2} of the covariance of zero-meaned
/// data, so cov(S x) = I. Throws NumericalError naming the deficient
/// eigenvalue index when the covariance is rank deficient.
Matrix sphere(const Matrix& centered);

/// Convenience overload: centers the dataset first.
Matrix sphere(const Dataset& ds);

/// PCA rotation: rows of W are covariance eigenvectors by descending
/// eigenvalue. k = -1 keeps all components.
Decomposition pca(const Dataset& ds, int k = -1);

struct AmuseParams {
  int lag = 1;
};

/// AMUSE: diagonalizes the symmetrized lag-tau covariance of sphered data.
/// Near-degenerate eigenvalue spacing flags converged = false (sources not
/// identifiable from this lag).
Decomposition amuse(const Dataset& ds, const AmuseParams& params = {});

/// Wraps an externally computed unmixing matrix (CSV or raw binary doubles,
/// chosen by extension) after validating it against the dataset.
Decomposition import_decomposition(const std::filesystem::path& path, const Dataset& ds);

/// Writes W to CSV (17 significant digits; re-import is bit exact) or raw
/// binary, chosen by extension.
void export_unmixing(const Matrix& w, const std::filesystem::path& path);

/// Amari performance index of P = W * A_true: 0 iff P is a scaled
/// permutation, 1/2 for a maximally mixing P (all entries equal).
double amari_index(const Matrix& w, const Matrix& a_true);

}  // namespace icabench

#endif  // ICABENCH_DECOMPOSE_HPP
