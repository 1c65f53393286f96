#include "icabench/decompose.hpp"

#include "icabench/io.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>

namespace icabench {

void Decomposition::validate() const {
  if (!w.allFinite()) {
    throw NumericalError("decomposition '" + algorithm_id + "': W has non-finite entries");
  }
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    if (w.row(i).norm() == 0.0) {
      throw NumericalError("decomposition '" + algorithm_id + "': W row " +
                           std::to_string(i) + " is zero");
    }
  }
  const Matrix eye = Matrix::Identity(w.rows(), w.rows());
  const double dev = (w * a - eye).cwiseAbs().maxCoeff();
  if (!(dev <= 1e-8)) {
    throw NumericalError("decomposition '" + algorithm_id +
                         "': W*A deviates from identity by " + std::to_string(dev));
  }
}

void finalize_decomposition(Decomposition& dec, const std::string& params_text) {
  if (dec.w.rows() == dec.w.cols()) {
    Eigen::PartialPivLU<Matrix> lu(dec.w);
    if (std::abs(lu.determinant()) == 0.0) {
      throw NumericalError("decomposition '" + dec.algorithm_id + "': W is singular");
    }
    dec.a = lu.inverse();
  } else {
    // Right pseudo-inverse for rank-reducing W.
    Matrix gram = dec.w * dec.w.transpose();
    dec.a = dec.w.transpose() * gram.inverse();
  }
  dec.params_digest = digest(params_text);
  dec.validate();
}

Matrix sphere(const Matrix& centered) {
  const double n_samples = static_cast<double>(centered.cols());
  if (n_samples < 2) {
    throw ValidationError("sphering needs at least 2 samples");
  }
  const Matrix cov = centered * centered.transpose() / (n_samples - 1.0);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("sphering: eigendecomposition failed");
  }
  const Vector& lam = eig.eigenvalues();
  const double lam_max = lam.maxCoeff();
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (!(lam[i] > 1e-12 * lam_max)) {
      throw NumericalError("sphering: covariance rank deficient at eigenvalue index " +
                           std::to_string(i) + " (value " + std::to_string(lam[i]) + ")");
    }
  }
  return eig.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

Matrix sphere(const Dataset& ds) {
  ds.validate();
  return sphere(remove_row_means(ds.data));
}

namespace {

// Deterministic sign convention: largest-magnitude entry of each row positive.
void canonicalize_row_signs(Matrix& w) {
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    Eigen::Index j;
    w.row(i).cwiseAbs().maxCoeff(&j);
    if (w(i, j) < 0.0) {
      w.row(i) = -w.row(i);
    }
  }
}

}  // namespace

Decomposition pca(const Dataset& ds, int k) {
  ds.validate();
  const Eigen::Index n = ds.channels();
  if (k < 0) k = static_cast<int>(n);
  if (k < 1 || k > n) {
    throw ValidationError("pca: k must be in [1, " + std::to_string(n) + "]");
  }
  const Matrix x = remove_row_means(ds.data);
  const Matrix cov = x * x.transpose() / (static_cast<double>(x.cols()) - 1.0);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("pca: eigendecomposition failed");
  }

  Decomposition dec;
  dec.algorithm_id = "pca";
  dec.w.resize(k, n);
  // Eigen sorts ascending; emit rows by descending eigenvalue.
  for (int r = 0; r < k; ++r) {
    dec.w.row(r) = eig.eigenvectors().col(n - 1 - r).transpose();
  }
  canonicalize_row_signs(dec.w);
  dec.iterations = 1;
  finalize_decomposition(dec, "pca k=" + std::to_string(k));
  return dec;
}

Decomposition amuse(const Dataset& ds, const AmuseParams& params) {
  ds.validate();
  if (params.lag < 1) {
    throw ValidationError("amuse: lag must be >= 1");
  }
  const Eigen::Index N = ds.samples();
  if (N <= params.lag + 1) {
    throw ValidationError("amuse: not enough samples for lag " +
                          std::to_string(params.lag));
  }
  const Matrix x = remove_row_means(ds.data);
  const Matrix s = sphere(x);
  const Matrix xs = s * x;

  const Eigen::Index m = N - params.lag;
  const Matrix lagged = xs.leftCols(m) * xs.rightCols(m).transpose() /
                        static_cast<double>(m);
  const Matrix sym = 0.5 * (lagged + lagged.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("amuse: eigendecomposition failed");
  }

  Decomposition dec;
  dec.algorithm_id = "amuse";
  const Eigen::Index n = ds.channels();
  Matrix rot(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    rot.row(r) = eig.eigenvectors().col(n - 1 - r).transpose();
  }
  canonicalize_row_signs(rot);

  // Identifiability requires distinct lagged eigenvalues; with no time
  // structure the spectrum collapses to sampling noise around zero.
  const double gap_floor = 10.0 / std::sqrt(static_cast<double>(m));
  double min_gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    min_gap = std::min(min_gap, eig.eigenvalues()[i + 1] - eig.eigenvalues()[i]);
  }
  if (min_gap < gap_floor) {
    dec.converged = false;
    dec.warning = "degenerate lagged eigenvalues (min gap " + std::to_string(min_gap) +
                  " < " + std::to_string(gap_floor) +
                  "); sources not identifiable at lag " + std::to_string(params.lag);
  }

  dec.w = rot * s;
  dec.iterations = 1;
  finalize_decomposition(dec, "amuse lag=" + std::to_string(params.lag));
  return dec;
}

Decomposition import_decomposition(const std::filesystem::path& path, const Dataset& ds) {
  ds.validate();
  const Eigen::Index n = ds.channels();
  Matrix w;
  if (path.extension() == ".csv") {
    w = load_matrix_csv(path);
  } else {
    w = load_matrix_binary(path, n, n);
  }
  if (w.rows() != n || w.cols() != n) {
    throw ValidationError("imported matrix is " + std::to_string(w.rows()) + "x" +
                          std::to_string(w.cols()) + ", expected " + std::to_string(n) +
                          "x" + std::to_string(n) + " for dataset '" + ds.id + "'");
  }
  Decomposition dec;
  dec.algorithm_id = "import";
  dec.w = std::move(w);
  dec.iterations = 0;
  finalize_decomposition(dec, "import " + path.string());
  return dec;
}

void export_unmixing(const Matrix& w, const std::filesystem::path& path) {
  if (path.extension() == ".csv") {
    save_matrix_csv(w, path);
  } else {
    save_matrix_binary(w, path);
  }
}

double amari_index(const Matrix& w, const Matrix& a_true) {
  if (w.rows() != w.cols() || a_true.rows() != a_true.cols() ||
      w.rows() != a_true.rows()) {
    throw ValidationError("amari_index: matrices must be square and equally sized");
  }
  Eigen::FullPivLU<Matrix> lu(a_true);
  if (!lu.isInvertible()) {
    throw ValidationError("amari_index: A_true is singular");
  }
  const Matrix p = (w * a_true).cwiseAbs();
  const Eigen::Index n = p.rows();

  double rows = 0.0;
  double cols = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double row_max = p.row(i).maxCoeff();
    const double col_max = p.col(i).maxCoeff();
    if (!(row_max > 0.0) || !(col_max > 0.0)) {
      throw NumericalError("amari_index: P has a zero row or column");
    }
    rows += p.row(i).sum() / row_max - 1.0;
    cols += p.col(i).sum() / col_max - 1.0;
  }
  return (rows + cols) / (4.0 * static_cast<double>(n) * static_cast<double>(n - 1));
}

}  // namespace icabench
