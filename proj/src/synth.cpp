#include "icabench/synth.hpp"

#include "icabench/rng.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace icabench {

SourceKind source_kind_from_string(const std::string& s) {
  if (s == "laplacian") return SourceKind::laplacian;
  if (s == "uniform") return SourceKind::uniform;
  if (s == "gaussian") return SourceKind::gaussian;
  if (s == "logistic") return SourceKind::logistic;
  if (s == "bimodal") return SourceKind::bimodal;
  throw ValidationError("unknown source kind '" + s + "'");
}

std::string to_string(SourceKind k) {
  switch (k) {
    case SourceKind::laplacian: return "laplacian";
    case SourceKind::uniform: return "uniform";
    case SourceKind::gaussian: return "gaussian";
    case SourceKind::logistic: return "logistic";
    case SourceKind::bimodal: return "bimodal";
  }
  return "?";
}

void SynthSpec::validate() const {
  if (n_sources < 2) {
    throw ValidationError("synth spec: n_sources must be >= 2, got " +
                          std::to_string(n_sources));
  }
  if (n_samples < n_sources) {
    throw ValidationError("synth spec: n_samples (" + std::to_string(n_samples) +
                          ") < n_sources (" + std::to_string(n_sources) + ")");
  }
  if (source_kinds.empty() ||
      (source_kinds.size() != 1 &&
       source_kinds.size() != static_cast<std::size_t>(n_sources))) {
    throw ValidationError("synth spec: source_kinds must have 1 or n_sources entries");
  }
  if (!(srate > 0.0)) {
    throw ValidationError("synth spec: srate must be positive");
  }
  if (mixing == MixingKind::explicit_matrix) {
    if (explicit_mixing.rows() != n_sources || explicit_mixing.cols() != n_sources) {
      throw ValidationError("synth spec: explicit mixing matrix must be n_sources x n_sources");
    }
    Eigen::FullPivLU<Matrix> lu(explicit_mixing);
    if (!lu.isInvertible()) {
      throw ValidationError("synth spec: explicit mixing matrix is singular");
    }
  }
}

SourceKind SynthSpec::kind_of(int i) const {
  return source_kinds.size() == 1 ? source_kinds[0]
                                  : source_kinds[static_cast<std::size_t>(i)];
}

namespace {

double draw_source_sample(SourceKind kind, Rng& rng) {
  switch (kind) {
    case SourceKind::laplacian: {
      // Unit-variance Laplace has scale 1/sqrt(2).
      const double b = 1.0 / std::sqrt(2.0);
      double u = rng.uniform01_open();
      return u < 0.5 ? b * std::log(2.0 * u) : -b * std::log(2.0 * (1.0 - u));
    }
    case SourceKind::uniform: {
      return std::sqrt(3.0) * (2.0 * rng.uniform01() - 1.0);
    }
    case SourceKind::gaussian:
      return rng.gaussian();
    case SourceKind::logistic: {
      // Unit-variance logistic has scale sqrt(3)/pi.
      const double s = std::sqrt(3.0) / M_PI;
      double u = rng.uniform01_open();
      return s * std::log(u / (1.0 - u));
    }
    case SourceKind::bimodal: {
      // Two Gaussian lobes at +-1 with sigma 0.3 (excess kurtosis ~ -1.68).
      double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
      return sign + 0.3 * rng.gaussian();
    }
  }
  return 0.0;
}

double condition_number(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  double smin = svd.singularValues().minCoeff();
  double smax = svd.singularValues().maxCoeff();
  return smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
}

}  // namespace

std::pair<Dataset, GroundTruth> synth_dataset(const SynthSpec& spec) {
  spec.validate();
  const int n = spec.n_sources;
  const long N = spec.n_samples;
  Rng rng(spec.seed);

  Matrix sources(n, N);
  for (int i = 0; i < n; ++i) {
    const SourceKind kind = spec.kind_of(i);
    for (long t = 0; t < N; ++t) {
      sources(i, t) = draw_source_sample(kind, rng);
    }
    // Standardize to exact sample zero mean, unit variance.
    double mean = sources.row(i).mean();
    sources.row(i).array() -= mean;
    double sd = std::sqrt(sources.row(i).squaredNorm() / static_cast<double>(N));
    if (!(sd > 0.0)) {
      throw NumericalError("synth: degenerate source " + std::to_string(i));
    }
    sources.row(i) /= sd;
  }

  Matrix mixing;
  switch (spec.mixing) {
    case MixingKind::random_orthogonal:
      mixing = rng.random_orthogonal(n);
      break;
    case MixingKind::random_general: {
      // Resample until reasonably conditioned so recovery tests are fair.
      for (int attempt = 0; attempt < 1000; ++attempt) {
        mixing = rng.gaussian_matrix(n, n);
        if (condition_number(mixing) < 100.0) break;
      }
      break;
    }
    case MixingKind::explicit_matrix:
      mixing = spec.explicit_mixing;
      break;
  }

  Dataset ds;
  ds.data = mixing * sources;
  ds.srate = spec.srate;
  ds.labels = default_labels(n);
  ds.id = spec.id.empty() ? "synth-" + std::to_string(spec.seed) : spec.id;

  if (spec.noise_db) {
    const double signal_power = ds.data.array().square().mean();
    const double noise_var = signal_power / std::pow(10.0, *spec.noise_db / 10.0);
    const double sigma = std::sqrt(noise_var);
    for (long t = 0; t < N; ++t) {
      for (int i = 0; i < n; ++i) {
        ds.data(i, t) += sigma * rng.gaussian();
      }
    }
  }

  ds.validate();
  return {std::move(ds), GroundTruth{std::move(mixing), std::move(sources)}};
}

}  // namespace icabench
