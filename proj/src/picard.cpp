#include "icabench/picard.hpp"

#include "icabench/rng.hpp"

#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

#include <chrono>
#include <cmath>
#include <deque>
#include <functional>
#include <optional>
#include <sstream>

namespace icabench {

void PicardParams::validate() const {
  if (memory < 1) throw ValidationError("picard: memory must be >= 1");
  if (!(tol > 0.0)) throw ValidationError("picard: tol must be positive");
  if (max_iter < 1) throw ValidationError("picard: max_iter must be >= 1");
  if (ls_max_backtracks < 1) throw ValidationError("picard: ls_max_backtracks must be >= 1");
  if (!(lambda_min > 0.0)) throw ValidationError("picard: lambda_min must be positive");
}

namespace {

double frobenius_dot(const Matrix& a, const Matrix& b) {
  return a.cwiseProduct(b).sum();
}

/// ln|det m|, or nullopt when m is singular / non-finite.
std::optional<double> log_abs_det(const Matrix& m) {
  if (!m.allFinite()) return std::nullopt;
  Eigen::PartialPivLU<Matrix> lu(m);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double d = std::abs(lu.matrixLU()(i, i));
    if (!(d > 0.0) || !std::isfinite(d)) return std::nullopt;
    sum += std::log(d);
  }
  return sum;
}

struct LbfgsMemory {
  std::deque<Matrix> steps;
  std::deque<Matrix> grad_diffs;
  std::deque<double> inv_curvatures;

  void clear() {
    steps.clear();
    grad_diffs.clear();
    inv_curvatures.clear();
  }

  void push(const Matrix& s, const Matrix& y, int max_len) {
    const double sy = frobenius_dot(s, y);
    if (!(sy > 1e-12 * s.norm() * y.norm())) {
      return;  // curvature condition failed; drop the pair
    }
    steps.push_back(s);
    grad_diffs.push_back(y);
    inv_curvatures.push_back(1.0 / sy);
    while (static_cast<int>(steps.size()) > max_len) {
      steps.pop_front();
      grad_diffs.pop_front();
      inv_curvatures.pop_front();
    }
  }
};

Matrix lbfgs_direction(const Matrix& grad, const LbfgsMemory& mem,
                       const std::function<Matrix(const Matrix&)>& h0_solve) {
  Matrix q = grad;
  const int len = static_cast<int>(mem.steps.size());
  std::vector<double> alpha(static_cast<std::size_t>(len));
  for (int k = len - 1; k >= 0; --k) {
    alpha[k] = mem.inv_curvatures[k] * frobenius_dot(mem.steps[k], q);
    q -= alpha[k] * mem.grad_diffs[k];
  }
  Matrix z = h0_solve(q);
  for (int k = 0; k < len; ++k) {
    const double beta = mem.inv_curvatures[k] * frobenius_dot(mem.grad_diffs[k], z);
    z += (alpha[k] - beta) * mem.steps[k];
  }
  return -z;
}

/// Solves the 2x2-block Hessian approximation: blocks [[h_ij, 1], [1, h_ji]]
/// over (i,j)/(j,i) coordinate pairs and 1 + h_ii on the diagonal, with
/// block eigenvalues floored at lambda_min.
Matrix solve_hessian_blocks(const Matrix& q, Matrix h, double lambda_min) {
  const Eigen::Index n = q.rows();
  Matrix z(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double a = h(i, j);
      double b = h(j, i);
      const double lam_min_block = 0.5 * ((a + b) - std::sqrt((a - b) * (a - b) + 4.0));
      if (lam_min_block < lambda_min) {
        const double shift = lambda_min - lam_min_block;
        a += shift;
        b += shift;
      }
      const double det = a * b - 1.0;
      z(i, j) = (b * q(i, j) - q(j, i)) / det;
      z(j, i) = (a * q(j, i) - q(i, j)) / det;
    }
    z(i, i) = q(i, i) / std::max(1.0 + h(i, i), lambda_min);
  }
  return z;
}

std::string params_text(const PicardParams& p, bool orthogonal) {
  std::ostringstream os;
  os << (orthogonal ? "picard_o" : "picard") << " m=" << p.memory << " tol=" << p.tol
     << " max_iter=" << p.max_iter << " ls=" << p.ls_max_backtracks
     << " extended=" << p.extended << " seed=" << p.seed;
  return os.str();
}

struct Prepared {
  Matrix sphering;
  Matrix xs;  // sphered, zero-mean data
  Matrix w0;  // start in sphered space
};

Prepared prepare(const Dataset& ds, const PicardParams& params) {
  ds.validate();
  Prepared p;
  const Matrix x = remove_row_means(ds.data);
  p.sphering = sphere(x);
  p.xs = p.sphering * x;
  if (params.random_init) {
    Rng rng(params.seed);
    p.w0 = rng.random_orthogonal(ds.channels());
  } else {
    p.w0 = Matrix::Identity(ds.channels(), ds.channels());
  }
  return p;
}

Decomposition fit_relative(const Dataset& ds, const PicardParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  Prepared p = prepare(ds, params);
  const Eigen::Index n = p.xs.rows();
  const double n_samples = static_cast<double>(p.xs.cols());
  const Matrix eye = Matrix::Identity(n, n);

  Matrix w = p.w0;
  double logdet = *log_abs_det(w);

  DensityModel density;
  density.kind = params.extended ? DensityModel::Kind::extended
                                 : DensityModel::Kind::logcosh;
  if (params.extended) {
    density.signs = kurtosis_signs(w * p.xs);
  }

  Decomposition dec;
  dec.algorithm_id = params.extended ? "picard_ext" : "picard";
  dec.converged = false;

  double loss = -logdet + neg_log_density_mean(density, w * p.xs);
  if (!std::isfinite(loss)) {
    throw NumericalError("picard: non-finite loss at the starting point");
  }

  LbfgsMemory mem;
  Matrix grad_old;
  Matrix step_prev;
  bool have_step = false;

  int iter = 0;
  for (; iter < params.max_iter; ++iter) {
    const Matrix y = w * p.xs;

    if (params.extended) {
      Vector signs = kurtosis_signs(y);
      if (density.signs.size() == 0 || (signs - density.signs).cwiseAbs().maxCoeff() > 0) {
        density.signs = signs;
        mem.clear();
        have_step = false;
        loss = -logdet + neg_log_density_mean(density, y);
      }
    }

    const Matrix psi_y = score(density, y);
    const Matrix grad = psi_y * y.transpose() / n_samples - eye;
    if (grad.cwiseAbs().maxCoeff() < params.tol) {
      dec.converged = true;
      break;
    }

    if (have_step) {
      mem.push(step_prev, grad - grad_old, params.memory);
    }
    grad_old = grad;

    const Vector psi_deriv_mean = score_derivative_row_mean(density, y);
    const Vector y2_mean = y.array().square().rowwise().mean();
    const Matrix hess = psi_deriv_mean * y2_mean.transpose();

    Matrix direction = lbfgs_direction(grad, mem, [&](const Matrix& q) {
      return solve_hessian_blocks(q, hess, params.lambda_min);
    });

    // Backtracking: halve until the loss decreases; if the quasi-Newton
    // direction never succeeds, flush the memory and retry along -grad.
    bool accepted = false;
    double alpha = 1.0;
    Matrix transform;
    double loss_try = 0.0, logdet_try = 0.0;
    for (int round = 0; round < 2 && !accepted; ++round) {
      alpha = 1.0;
      for (int bt = 0; bt < params.ls_max_backtracks; ++bt) {
        transform = eye + alpha * direction;
        const auto ld = log_abs_det(transform);
        if (ld) {
          logdet_try = logdet + *ld;
          loss_try = -logdet_try + neg_log_density_mean(density, transform * y);
          if (std::isfinite(loss_try) && loss_try < loss) {
            accepted = true;
            break;
          }
        }
        alpha *= 0.5;
      }
      if (!accepted && round == 0) {
        direction = -grad;
        mem.clear();
        have_step = false;
      }
    }
    if (!accepted) {
      dec.warning = "picard: line search stalled at iteration " + std::to_string(iter);
      break;
    }

    step_prev = alpha * direction;
    have_step = true;
    w = transform * w;
    logdet = logdet_try;
    loss = loss_try;
    dec.loss_trace.push_back(loss);
  }

  dec.iterations = iter;
  dec.w = w * p.sphering;
  finalize_decomposition(dec, params_text(params, false));
  dec.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return dec;
}

/// Sign-adapted loss for the orthogonal variant: sum_i s_i E[log cosh y_i].
double orthogonal_loss(const Matrix& y, const Vector& signs) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index t = 0; t < y.cols(); ++t) {
      row += log_cosh(y(i, t));
    }
    total += signs[i] * row / static_cast<double>(y.cols());
  }
  return total;
}

Decomposition fit_orthogonal(const Dataset& ds, const PicardParams& params) {
  const auto t0 = std::chrono::steady_clock::now();
  Prepared p = prepare(ds, params);
  const Eigen::Index n = p.xs.rows();
  const double n_samples = static_cast<double>(p.xs.cols());

  Matrix w = p.w0;

  Decomposition dec;
  dec.algorithm_id = "picard_o";
  dec.converged = false;

  Vector signs = Vector::Zero(n);
  double loss = 0.0;
  LbfgsMemory mem;
  Matrix grad_old;
  Matrix step_prev;
  bool have_step = false;
  bool have_loss = false;

  int iter = 0;
  for (; iter < params.max_iter; ++iter) {
    const Matrix y = w * p.xs;
    const Matrix tanh_y = y.array().tanh().matrix();
    const Vector c = y.cwiseProduct(tanh_y).rowwise().mean();          // E[y psi(y)]
    const Vector psi_deriv = (1.0 - tanh_y.array().square()).rowwise().mean().matrix();
    const Vector y2 = y.array().square().rowwise().mean();

    // Nonlinear decorrelation criterion picks the score sign per component;
    // zero lands on the super-Gaussian side.
    Vector new_signs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double kappa = c[i] - psi_deriv[i] * y2[i];
      new_signs[i] = kappa > 0.0 ? -1.0 : 1.0;
    }
    if (!have_loss || (new_signs - signs).cwiseAbs().maxCoeff() > 0) {
      signs = new_signs;
      mem.clear();
      have_step = false;
      loss = orthogonal_loss(y, signs);
      have_loss = true;
    }

    const Matrix phi = signs.asDiagonal() * tanh_y;
    const Matrix g = phi * y.transpose() / n_samples;
    const Matrix grad = 0.5 * (g - g.transpose());
    if (grad.cwiseAbs().maxCoeff() < params.tol) {
      dec.converged = true;
      break;
    }

    if (have_step) {
      mem.push(step_prev, grad - grad_old, params.memory);
    }
    grad_old = grad;

    // Curvature of the exp(skew) parameterization, one coordinate per pair.
    Matrix hess(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double hij = signs[i] * (psi_deriv[i] * y2[j] - c[i]) +
                           signs[j] * (psi_deriv[j] * y2[i] - c[j]);
        hess(i, j) = std::max(hij, params.lambda_min);
      }
    }

    Matrix direction = lbfgs_direction(grad, mem, [&](const Matrix& q) {
      return q.cwiseQuotient(hess);
    });

    bool accepted = false;
    double alpha = 1.0;
    Matrix transform;
    double loss_try = 0.0;
    for (int round = 0; round < 2 && !accepted; ++round) {
      alpha = 1.0;
      for (int bt = 0; bt < params.ls_max_backtracks; ++bt) {
        transform = (alpha * direction).exp();
        loss_try = orthogonal_loss(transform * y, signs);
        if (std::isfinite(loss_try) && loss_try < loss) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted && round == 0) {
        direction = -grad;
        mem.clear();
        have_step = false;
      }
    }
    if (!accepted) {
      dec.warning = "picard_o: line search stalled at iteration " + std::to_string(iter);
      break;
    }

    step_prev = alpha * direction;
    have_step = true;
    w = transform * w;
    loss = loss_try;
    dec.loss_trace.push_back(loss);
  }

  dec.iterations = iter;
  dec.w = w * p.sphering;
  finalize_decomposition(dec, params_text(params, true));
  dec.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return dec;
}

}  // namespace

Decomposition picard(const Dataset& ds, const PicardParams& params) {
  params.validate();
  return params.orthogonal ? fit_orthogonal(ds, params) : fit_relative(ds, params);
}

Decomposition picard_o(const Dataset& ds, PicardParams params) {
  params.orthogonal = true;
  params.validate();
  return fit_orthogonal(ds, params);
}

double negative_log_likelihood(const Matrix& w, const Dataset& ds,
                               const DensityModel& density) {
  ds.validate();
  if (w.rows() != w.cols() || w.rows() != ds.channels()) {
    throw ValidationError("negative_log_likelihood: W must be square and match the dataset");
  }
  const auto logdet = log_abs_det(w);
  if (!logdet) {
    throw NumericalError("negative_log_likelihood: W is singular");
  }
  const Matrix y = w * remove_row_means(ds.data);
  return -*logdet + neg_log_density_mean(density, y);
}

Matrix relative_gradient(const Matrix& y, const DensityModel& density) {
  const double n_samples = static_cast<double>(y.cols());
  return score(density, y) * y.transpose() / n_samples -
         Matrix::Identity(y.rows(), y.rows());
}

}  // namespace icabench
