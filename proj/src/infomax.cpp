#include "icabench/infomax.hpp"

#include "icabench/density.hpp"
#include "icabench/rng.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

namespace icabench {

void InfomaxParams::validate() const {
  if (lrate < 0.0) throw ValidationError("infomax: negative learning rate");
  if (!(anneal_factor > 0.0 && anneal_factor < 1.0)) {
    throw ValidationError("infomax: anneal factor must be in (0,1)");
  }
  if (!(tol > 0.0)) throw ValidationError("infomax: tol must be positive");
  if (max_iter < 1) throw ValidationError("infomax: max_iter must be >= 1");
  if (block < 0) throw ValidationError("infomax: negative block size");
}

namespace {

std::string params_text(const InfomaxParams& p) {
  std::ostringstream os;
  os << "infomax lrate=" << p.lrate << " tol=" << p.tol << " max_iter=" << p.max_iter
     << " block=" << p.block << " extended=" << p.extended << " seed=" << p.seed;
  return os.str();
}

}  // namespace

Decomposition infomax(const Dataset& ds, const InfomaxParams& params) {
  params.validate();
  ds.validate();
  const auto t0 = std::chrono::steady_clock::now();

  const Eigen::Index n = ds.channels();
  const Eigen::Index N = ds.samples();
  const Matrix x = remove_row_means(ds.data);
  const Matrix s = sphere(x);
  const Matrix xs = s * x;

  Rng rng(params.seed);
  Matrix w = params.random_init ? rng.random_orthogonal(n)
                                : Matrix::Identity(n, n);

  double lrate = params.lrate > 0.0
                     ? params.lrate
                     : 1e-3 / std::log(static_cast<double>(std::max<Eigen::Index>(n, 2)));
  const Eigen::Index block =
      params.block > 0
          ? params.block
          : static_cast<Eigen::Index>(std::ceil(std::min(
                5.0 * std::log(static_cast<double>(N)), 0.3 * static_cast<double>(N))));

  // Fixed subsample for the extended-mode kurtosis-sign estimate.
  std::vector<Eigen::Index> sub_idx;
  if (params.extended) {
    const Eigen::Index n_sub = std::min<Eigen::Index>(N, 10000);
    sub_idx.resize(static_cast<std::size_t>(n_sub));
    for (auto& v : sub_idx) v = static_cast<Eigen::Index>(rng.below(N));
  }
  Matrix xs_sub;
  if (params.extended) {
    xs_sub.resize(n, static_cast<Eigen::Index>(sub_idx.size()));
    for (std::size_t t = 0; t < sub_idx.size(); ++t) {
      xs_sub.col(static_cast<Eigen::Index>(t)) = xs.col(sub_idx[t]);
    }
  }
  Vector signs = Vector::Ones(n);
  if (params.extended) {
    signs = kurtosis_signs(w * xs_sub);
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(N));
  std::iota(order.begin(), order.end(), 0);

  Decomposition dec;
  dec.algorithm_id = params.extended ? "ext_infomax" : "infomax";
  const Matrix eye = Matrix::Identity(n, n);
  Matrix delta_prev = Matrix::Zero(n, n);
  bool have_prev = false;
  int restarts = 0;

  Matrix xb(n, block);
  int pass = 0;
  for (; pass < params.max_iter; ++pass) {
    const Matrix w_before = w;
    rng.shuffle(order);

    bool blew_up = false;
    for (Eigen::Index start = 0; start + block <= N; start += block) {
      for (Eigen::Index c = 0; c < block; ++c) {
        xb.col(c) = xs.col(order[static_cast<std::size_t>(start + c)]);
      }
      const Matrix u = w * xb;
      Matrix phi;
      if (params.extended) {
        phi = u + signs.asDiagonal() * u.array().tanh().matrix();
      } else {
        phi = (u * 0.5).array().tanh().matrix();
      }
      w += lrate * (eye - phi * u.transpose() / static_cast<double>(block)) * w;
      if (!w.allFinite()) {
        blew_up = true;
        break;
      }
    }

    if (blew_up) {
      if (++restarts > 5) {
        throw NumericalError("infomax: weights diverged repeatedly; last lrate " +
                             std::to_string(lrate));
      }
      w = params.random_init ? rng.random_orthogonal(n) : Matrix::Identity(n, n);
      lrate *= 0.5;
      have_prev = false;
      continue;
    }

    if (params.extended) {
      signs = kurtosis_signs(w * xs_sub);
    }

    const Matrix delta = w - w_before;
    const double wchange = delta.squaredNorm();
    if (have_prev) {
      const double denom = delta.norm() * delta_prev.norm();
      const double cosang = denom > 0.0 ? (delta.cwiseProduct(delta_prev)).sum() / denom : 1.0;
      if (cosang < std::cos(params.anneal_angle_deg * M_PI / 180.0)) {
        lrate *= params.anneal_factor;
      }
    }
    delta_prev = delta;
    have_prev = true;

    if (wchange < params.tol) {
      dec.converged = true;
      ++pass;
      break;
    }
    dec.converged = false;
  }

  dec.iterations = pass;
  dec.w = w * s;
  finalize_decomposition(dec, params_text(params));
  dec.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return dec;
}

}  // namespace icabench
