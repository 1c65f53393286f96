#include "icabench/mir.hpp"

#include <Eigen/LU>

#include <cmath>

namespace icabench {

namespace {

double entropy_row_sum(const Matrix& rows, int bins, Binning strategy,
                       const char* what) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    try {
      sum += marginal_entropy(build_histogram(rows.row(i).transpose(), bins, strategy)).h;
    } catch (const Error& e) {
      throw NumericalError(std::string(what) + " " + std::to_string(i) + ": " + e.what());
    }
  }
  return sum;
}

double log2_abs_det(const Matrix& w) {
  if (w.rows() == w.cols()) {
    Eigen::PartialPivLU<Matrix> lu(w);
    double log_abs = 0.0;
    const auto& u = lu.matrixLU();
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      const double d = std::abs(u(i, i));
      if (!(d > 0.0) || !std::isfinite(d)) {
        throw NumericalError("unmixing matrix is singular");
      }
      log_abs += std::log2(d);
    }
    return log_abs;
  }
  // Rank-reducing W: 1/2 log2 det(W W^T).
  Matrix gram = w * w.transpose();
  Eigen::PartialPivLU<Matrix> lu(gram);
  double log_abs = 0.0;
  const auto& u = lu.matrixLU();
  for (Eigen::Index i = 0; i < gram.rows(); ++i) {
    const double d = std::abs(u(i, i));
    if (!(d > 0.0) || !std::isfinite(d)) {
      throw NumericalError("rank-reduced unmixing matrix has a degenerate row space");
    }
    log_abs += std::log2(d);
  }
  return 0.5 * log_abs;
}

void check_shapes(const Dataset& ds, const Matrix& w) {
  if (w.cols() != ds.channels()) {
    throw ValidationError("unmixing matrix has " + std::to_string(w.cols()) +
                          " columns for " + std::to_string(ds.channels()) +
                          " channels");
  }
  if (w.rows() > w.cols()) {
    throw ValidationError("unmixing matrix has more rows than channels");
  }
  if (!w.allFinite()) {
    throw ValidationError("unmixing matrix has non-finite entries");
  }
}

}  // namespace

double channel_entropy_sum(const Dataset& ds, int bins, Binning strategy) {
  ds.validate();
  const Matrix x = remove_row_means(ds.data);
  return entropy_row_sum(x, bins, strategy, "channel");
}

MIRReport mir(const Dataset& ds, const Matrix& w, int bins, Binning strategy,
              std::optional<double> cached_sum_h_x) {
  ds.validate();
  check_shapes(ds, w);

  MIRReport r;
  r.bins = bins;
  r.strategy = strategy;
  r.dataset_id = ds.id;
  r.rank_reduced = w.rows() < w.cols();
  r.log_det_w = log2_abs_det(w);

  const Matrix x = remove_row_means(ds.data);
  r.sum_h_x = cached_sum_h_x ? *cached_sum_h_x
                             : entropy_row_sum(x, bins, strategy, "channel");
  const Matrix y = w * x;
  r.sum_h_y = entropy_row_sum(y, bins, strategy, "component");

  r.bits_per_sample = r.log_det_w + r.sum_h_x - r.sum_h_y;
  r.kbits_per_sec = r.bits_per_sample * ds.srate / 1000.0;
  return r;
}

RemnantPMI remnant_pmi(const Dataset& ds, const Matrix& w, int bins, Binning strategy) {
  ds.validate();
  check_shapes(ds, w);

  const Matrix x = remove_row_means(ds.data);
  const Matrix y = w * x;

  RemnantPMI r;
  r.channel_mean_pmi = pmi_matrix(x, bins, strategy).mean_all_elements();
  r.component_mean_pmi = pmi_matrix(y, bins, strategy).mean_all_elements();
  if (!(r.channel_mean_pmi > 0.0)) {
    throw NumericalError("channel mean PMI is zero; remnant percentage undefined");
  }
  r.percent = 100.0 * r.component_mean_pmi / r.channel_mean_pmi;
  return r;
}

}  // namespace icabench
