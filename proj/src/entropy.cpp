#include "icabench/entropy.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <vector>

namespace icabench {

namespace detail {

double discrete_entropy_bits(const Eigen::Ref<const VectorI>& counts, long n) {
  double h = 0.0;
  const double dn = static_cast<double>(n);
  for (Eigen::Index k = 0; k < counts.size(); ++k) {
    if (counts[k] > 0) {
      const double p = counts[k] / dn;
      h -= p * std::log2(p);
    }
  }
  return h;
}

}  // namespace detail

EntropyEstimate marginal_entropy(const HistogramModel& hist) {
  EntropyEstimate e;
  e.bins = hist.bins;
  e.h_discrete = detail::discrete_entropy_bits(hist.counts, hist.n_samples);
  const double dn = static_cast<double>(hist.n_samples);
  double width_term = 0.0;
  for (int k = 0; k < hist.bins; ++k) {
    if (hist.counts[k] > 0) {
      width_term += (hist.counts[k] / dn) * std::log2(hist.width(k));
    }
  }
  e.h = e.h_discrete + width_term;
  e.variance = entropy_variance(hist);
  return e;
}

double entropy_variance(const HistogramModel& hist) {
  if (hist.n_samples < 2) {
    throw ValidationError("entropy variance needs at least 2 samples");
  }
  const double dn = static_cast<double>(hist.n_samples);
  double h = 0.0;
  double second = 0.0;
  for (int k = 0; k < hist.bins; ++k) {
    if (hist.counts[k] > 0) {
      const double p = hist.counts[k] / dn;
      const double lp = std::log2(p);
      h -= p * lp;
      second += p * lp * lp;
    }
  }
  return std::max(0.0, (second - h * h) / dn);
}

namespace {

// Entropy of a count multiset, summed over sorted counts. The sorted order
// makes the floating sum independent of bin layout, so transposing a joint
// histogram (swapping the pair) gives the bit-identical value.
double entropy_of_counts_sorted(std::vector<int>& counts, double n) {
  counts.erase(std::remove(counts.begin(), counts.end(), 0), counts.end());
  std::sort(counts.begin(), counts.end());
  double h = 0.0;
  for (int c : counts) {
    const double p = c / n;
    h -= p * std::log2(p);
  }
  return h;
}

double joint_entropy_from_indices(const VectorI& ix, const VectorI& iy, int bins,
                                  std::vector<int>& scratch) {
  scratch.assign(static_cast<std::size_t>(bins) * bins, 0);
  for (Eigen::Index t = 0; t < ix.size(); ++t) {
    scratch[static_cast<std::size_t>(ix[t]) * bins + iy[t]]++;
  }
  return entropy_of_counts_sorted(scratch, static_cast<double>(ix.size()));
}

}  // namespace

double joint_entropy(const Eigen::Ref<const Vector>& x,
                     const Eigen::Ref<const Vector>& y, int bins, Binning strategy) {
  const JointHistogram j = build_joint_histogram(x, y, bins, strategy);
  std::vector<int> counts;
  counts.reserve(static_cast<std::size_t>(bins) * bins);
  for (int k = 0; k < bins; ++k) {
    for (int l = 0; l < bins; ++l) {
      counts.push_back(j.counts(k, l));
    }
  }
  return entropy_of_counts_sorted(counts, static_cast<double>(j.n_samples));
}

double pmi(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y,
           int bins, Binning strategy) {
  if (x.size() != y.size()) {
    throw ValidationError("pmi needs equal-length signals");
  }
  const HistogramModel hx = build_histogram(x, bins, strategy);
  const HistogramModel hy = build_histogram(y, bins, strategy);
  const double h_i = detail::discrete_entropy_bits(hx.counts, hx.n_samples);
  const double h_j = detail::discrete_entropy_bits(hy.counts, hy.n_samples);

  VectorI ix = bin_indices(x, hx.edges);
  VectorI iy = bin_indices(y, hy.edges);
  std::vector<int> scratch;
  const double h_ij = joint_entropy_from_indices(ix, iy, bins, scratch);
  return std::max(0.0, h_i + h_j - h_ij);
}

PMIMatrix pmi_matrix(const Matrix& rows, int bins, Binning strategy) {
  const Eigen::Index n = rows.rows();
  if (n < 2) {
    throw ValidationError("pmi matrix needs at least 2 rows");
  }

  std::vector<VectorI> indices(static_cast<std::size_t>(n));
  std::vector<double> h(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    try {
      const HistogramModel hist = build_histogram(rows.row(i).transpose(), bins, strategy);
      h[static_cast<std::size_t>(i)] =
          detail::discrete_entropy_bits(hist.counts, hist.n_samples);
      indices[static_cast<std::size_t>(i)] =
          bin_indices(rows.row(i).transpose(), hist.edges);
    } catch (const Error& e) {
      throw NumericalError("pmi matrix: channel " + std::to_string(i) + ": " + e.what());
    }
  }

  PMIMatrix m;
  m.bins = bins;
  m.strategy = strategy;
  m.values = Matrix::Zero(n, n);
  std::vector<int> scratch;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double h_ij = joint_entropy_from_indices(
          indices[static_cast<std::size_t>(i)], indices[static_cast<std::size_t>(j)],
          bins, scratch);
      const double value = std::max(
          0.0, h[static_cast<std::size_t>(i)] + h[static_cast<std::size_t>(j)] - h_ij);
      m.values(i, j) = value;
      m.values(j, i) = value;
    }
  }
  return m;
}

std::string pmi_matrix_to_csv(const PMIMatrix& m) {
  std::ostringstream out;
  char buf[40];
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m.values(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::string pmi_matrix_to_json(const PMIMatrix& m) {
  nlohmann::json j;
  j["B"] = m.bins;
  j["strategy"] = to_string(m.strategy);
  auto rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    auto row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < m.values.cols(); ++k) {
      row.push_back(m.values(i, k));
    }
    rows.push_back(std::move(row));
  }
  j["matrix"] = std::move(rows);
  return j.dump(2) + "\n";
}

}  // namespace icabench
