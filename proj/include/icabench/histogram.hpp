#ifndef ICABENCH_HISTOGRAM_HPP
#define ICABENCH_HISTOGRAM_HPP

#include "icabench/types.hpp"

#include <string>

namespace icabench {

enum class Binning { equal_width, equal_occupancy };

Binning binning_from_string(const std::string& s);
std::string to_string(Binning b);

/// Per-signal histogram. The density estimate counts(k) / (N * width(k))
/// integrates to one exactly.
struct HistogramModel {
  int bins = 0;
  Vector edges;     // bins + 1 strictly ascending values
  VectorI counts;   // bins entries, summing to n_samples
  long n_samples = 0;
  Binning strategy = Binning::equal_width;

  double width(int k) const { return edges[k + 1] - edges[k]; }
};

struct JointHistogram {
  int bins = 0;
  Eigen::MatrixXi counts;  // bins x bins, summing to n_samples
  Vector edges_x, edges_y;
  long n_samples = 0;
};

/// Bin edges only (shared by marginal and joint builds).
/// Equal-occupancy edges are sample quantiles; ties are broken by widening
/// a bin to the next distinct value. A signal with fewer than `bins`
/// distinct values cannot produce strictly ascending edges and raises
/// NumericalError.
Vector histogram_edges(const Eigen::Ref<const Vector>& x, int bins, Binning strategy);

/// Index of the bin containing v: the last edge <= v, clamped so values at
/// or beyond the extremes land in the first/last bin.
int bin_index(const Vector& edges, double v);

/// Bin index of every sample.
VectorI bin_indices(const Eigen::Ref<const Vector>& x, const Vector& edges);

HistogramModel build_histogram(const Eigen::Ref<const Vector>& x, int bins,
                               Binning strategy);

/// Joint histogram of two equal-length signals using each signal's own
/// marginal edges, so joint marginals match the per-signal histograms
/// exactly.
JointHistogram build_joint_histogram(const Eigen::Ref<const Vector>& x,
                                     const Eigen::Ref<const Vector>& y, int bins,
                                     Binning strategy);

}  // namespace icabench

#endif  // ICABENCH_HISTOGRAM_HPP
