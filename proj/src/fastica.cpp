#include "icabench/fastica.hpp"

#include "icabench/rng.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <sstream>

namespace icabench {

void FastICAParams::validate() const {
  if (!(tol > 0.0)) throw ValidationError("fastica: tol must be positive");
  if (max_iter < 1) throw ValidationError("fastica: max_iter must be >= 1");
}

namespace {

Matrix symmetric_decorrelation(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m * m.transpose());
  const Vector& lam = eig.eigenvalues();
  if (!(lam.minCoeff() > 0.0)) {
    throw NumericalError("fastica: update matrix lost rank during decorrelation");
  }
  return eig.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose() * m;
}

}  // namespace

Decomposition fastica(const Dataset& ds, const FastICAParams& params) {
  params.validate();
  ds.validate();
  const auto t0 = std::chrono::steady_clock::now();

  const Eigen::Index n = ds.channels();
  const double N = static_cast<double>(ds.samples());
  const Matrix x = remove_row_means(ds.data);
  const Matrix s = sphere(x);
  const Matrix xs = s * x;

  Rng rng(params.seed);
  Matrix w = params.random_init ? rng.random_orthogonal(n) : Matrix::Identity(n, n);
  w = symmetric_decorrelation(w);

  Decomposition dec;
  dec.algorithm_id = "fastica";
  dec.converged = false;

  int iter = 0;
  for (; iter < params.max_iter; ++iter) {
    const Matrix u = w * xs;
    const Matrix g = u.array().tanh().matrix();
    const Vector g_prime_mean = (1.0 - g.array().square()).rowwise().mean();
    Matrix w_new = g * xs.transpose() / N - g_prime_mean.asDiagonal() * w;
    w_new = symmetric_decorrelation(w_new);

    const double lim =
        ((w_new * w.transpose()).diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff();
    w = w_new;
    if (lim < params.tol) {
      dec.converged = true;
      ++iter;
      break;
    }
  }

  dec.iterations = iter;
  if (!dec.converged) {
    dec.warning = "fastica: no convergence within " + std::to_string(params.max_iter) +
                  " iterations";
  }
  dec.w = w * s;
  std::ostringstream ps;
  ps << "fastica tol=" << params.tol << " max_iter=" << params.max_iter
     << " seed=" << params.seed;
  finalize_decomposition(dec, ps.str());
  dec.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return dec;
}

}  // namespace icabench
