#include "icabench/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace icabench {

Binning binning_from_string(const std::string& s) {
  if (s == "equal-width") return Binning::equal_width;
  if (s == "equal-occupancy") return Binning::equal_occupancy;
  throw ValidationError("unknown binning strategy '" + s + "'");
}

std::string to_string(Binning b) {
  return b == Binning::equal_width ? "equal-width" : "equal-occupancy";
}

namespace {

void check_input(const Eigen::Ref<const Vector>& x, int bins) {
  if (bins < 2) {
    throw ValidationError("histogram needs at least 2 bins, got " +
                          std::to_string(bins));
  }
  if (x.size() < bins) {
    throw ValidationError("histogram needs at least as many samples (" +
                          std::to_string(x.size()) + ") as bins (" +
                          std::to_string(bins) + ")");
  }
  if (!x.allFinite()) {
    throw ValidationError("histogram input contains non-finite values");
  }
}

Vector equal_width_edges(const Eigen::Ref<const Vector>& x, int bins) {
  double lo = x.minCoeff();
  double hi = x.maxCoeff();
  if (!(hi > lo)) {
    // Constant signal: a unit-width window keeps every bin width positive
    // and puts all mass in one bin.
    lo -= 0.5;
    hi += 0.5;
  }
  Vector edges(bins + 1);
  const double step = (hi - lo) / bins;
  for (int k = 0; k <= bins; ++k) {
    edges[k] = lo + k * step;
  }
  edges[bins] = hi;
  return edges;
}

Vector equal_occupancy_edges(const Eigen::Ref<const Vector>& x, int bins) {
  std::vector<double> sorted(x.data(), x.data() + x.size());
  std::sort(sorted.begin(), sorted.end());
  const long N = static_cast<long>(sorted.size());

  Vector edges(bins + 1);
  edges[0] = sorted.front();
  for (int k = 1; k < bins; ++k) {
    long rank = (static_cast<long>(k) * N) / bins;
    double candidate = sorted[static_cast<std::size_t>(rank)];
    if (candidate <= edges[k - 1]) {
      // Tie with the previous edge: widen to the next distinct value.
      auto it = std::upper_bound(sorted.begin() + rank, sorted.end(), edges[k - 1]);
      if (it == sorted.end()) {
        throw NumericalError(
            "equal-occupancy binning degenerate: fewer than " +
            std::to_string(bins) + " distinct values (stuck at edge " +
            std::to_string(k) + ")");
      }
      candidate = *it;
    }
    edges[k] = candidate;
  }
  if (sorted.back() <= edges[bins - 1]) {
    throw NumericalError("equal-occupancy binning degenerate: no room for last bin");
  }
  edges[bins] = sorted.back();
  return edges;
}

}  // namespace

Vector histogram_edges(const Eigen::Ref<const Vector>& x, int bins, Binning strategy) {
  check_input(x, bins);
  return strategy == Binning::equal_width ? equal_width_edges(x, bins)
                                          : equal_occupancy_edges(x, bins);
}

int bin_index(const Vector& edges, double v) {
  const int bins = static_cast<int>(edges.size()) - 1;
  const double* begin = edges.data();
  const double* end = edges.data() + edges.size();
  int k = static_cast<int>(std::upper_bound(begin, end, v) - begin) - 1;
  return std::clamp(k, 0, bins - 1);
}

VectorI bin_indices(const Eigen::Ref<const Vector>& x, const Vector& edges) {
  VectorI idx(x.size());
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    idx[t] = bin_index(edges, x[t]);
  }
  return idx;
}

HistogramModel build_histogram(const Eigen::Ref<const Vector>& x, int bins,
                               Binning strategy) {
  HistogramModel h;
  h.bins = bins;
  h.strategy = strategy;
  h.n_samples = static_cast<long>(x.size());
  h.edges = histogram_edges(x, bins, strategy);
  h.counts = VectorI::Zero(bins);
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    h.counts[bin_index(h.edges, x[t])]++;
  }
  return h;
}

JointHistogram build_joint_histogram(const Eigen::Ref<const Vector>& x,
                                     const Eigen::Ref<const Vector>& y, int bins,
                                     Binning strategy) {
  if (x.size() != y.size()) {
    throw ValidationError("joint histogram needs equal-length signals (" +
                          std::to_string(x.size()) + " vs " +
                          std::to_string(y.size()) + ")");
  }
  JointHistogram j;
  j.bins = bins;
  j.n_samples = static_cast<long>(x.size());
  j.edges_x = histogram_edges(x, bins, strategy);
  j.edges_y = histogram_edges(y, bins, strategy);
  j.counts = Eigen::MatrixXi::Zero(bins, bins);
  for (Eigen::Index t = 0; t < x.size(); ++t) {
    j.counts(bin_index(j.edges_x, x[t]), bin_index(j.edges_y, y[t]))++;
  }
  return j;
}

}  // namespace icabench
