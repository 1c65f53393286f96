#ifndef ICABENCH_MIR_HPP
#define ICABENCH_MIR_HPP

#include "icabench/entropy.hpp"
#include "icabench/types.hpp"

#include <optional>
#include <string>

namespace icabench {

/// Mutual information reduction of an unmixing matrix on a dataset:
/// log2|det W| + sum_i h(x_i) - sum_i h(y_i), in bits per sample.
struct MIRReport {
  double bits_per_sample = 0.0;
  double kbits_per_sec = 0.0;  // bits_per_sample * srate / 1000
  double log_det_w = 0.0;      // bits
  double sum_h_x = 0.0;        // bits
  double sum_h_y = 0.0;        // bits
  int bins = 0;
  Binning strategy = Binning::equal_width;
  std::string dataset_id;
  std::string algorithm_id;
  bool rank_reduced = false;  // true when W has fewer rows than channels
  bool mean_removed = true;
};

struct RemnantPMI {
  double channel_mean_pmi = 0.0;    // bits, mean over all n^2 matrix elements
  double component_mean_pmi = 0.0;  // bits
  double percent = 0.0;             // 100 * component / channel
};

/// Sum of per-channel differential entropies of the mean-removed data, in
/// bits. Computed once per dataset and reused across algorithms so that
/// cross-algorithm MIR differences depend only on the decomposition terms.
double channel_entropy_sum(const Dataset& ds, int bins, Binning strategy);

/// W may be k x n with k < n (rank-reducing decompositions); log|det W| is
/// then 1/2 log2 det(W W^T) and the report is flagged rank_reduced.
MIRReport mir(const Dataset& ds, const Matrix& w, int bins, Binning strategy,
              std::optional<double> cached_sum_h_x = std::nullopt);

RemnantPMI remnant_pmi(const Dataset& ds, const Matrix& w, int bins, Binning strategy);

}  // namespace icabench

#endif  // ICABENCH_MIR_HPP
