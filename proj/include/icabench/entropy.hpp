#ifndef ICABENCH_ENTROPY_HPP
#define ICABENCH_ENTROPY_HPP

#include "icabench/histogram.hpp"
#include "icabench/types.hpp"

namespace icabench {

/// Entropy of one signal, estimated from its histogram. All values in bits.
struct EntropyEstimate {
  double h = 0.0;           // differential entropy (Riemann plug-in)
  double h_discrete = 0.0;  // entropy of the bin-probability vector
  double variance = 0.0;    // asymptotic variance of h_discrete
  int bins = 0;
};

/// h = H_discrete + sum_k (b_k/N) log2(width_k). Empty bins contribute 0.
EntropyEstimate marginal_entropy(const HistogramModel& hist);

/// Plug-in asymptotic variance (1/N) [sum p (log2 p)^2 - H^2], clamped at 0.
double entropy_variance(const HistogramModel& hist);

/// Discrete joint entropy H_ij in bits, built on the two signals' marginal
/// edges.
double joint_entropy(const Eigen::Ref<const Vector>& x,
                     const Eigen::Ref<const Vector>& y, int bins, Binning strategy);

/// Pairwise mutual information H_i + H_j - H_ij in bits, clamped at 0.
/// Shared per-axis edges make the bin-width terms cancel exactly, so this
/// equals the differential-entropy form h_i + h_j - h_ij.
double pmi(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
           int bins, Binning strategy);

/// Symmetric matrix of pairwise mutual information with a zero diagonal.
struct PMIMatrix {
  Matrix values;
  int bins = 0;
  Binning strategy = Binning::equal_width;

  double mean_all_elements() const {
    return values.sum() / static_cast<double>(values.size());
  }
};

/// PMI of every unordered row pair of `rows` (channels or component
/// activations). Each pair is computed once.
PMIMatrix pmi_matrix(const Matrix& rows, int bins, Binning strategy);

/// Serialization mandated for PMI matrices.
std::string pmi_matrix_to_csv(const PMIMatrix& m);
std::string pmi_matrix_to_json(const PMIMatrix& m);

namespace detail {
double discrete_entropy_bits(const Eigen::Ref<const VectorI>& counts, long n);
}

}  // namespace icabench

#endif  // ICABENCH_ENTROPY_HPP
