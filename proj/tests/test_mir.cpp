#include "icabench/mir.hpp"

#include "icabench/decompose.hpp"
#include "icabench/synth.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace icabench;
using namespace icabench::testing;

namespace {

Dataset wrap(const Matrix& rows, double srate = 250.0, const std::string& id = "t") {
  Dataset ds;
  ds.data = rows;
  ds.srate = srate;
  ds.labels = default_labels(static_cast<int>(rows.rows()));
  ds.id = id;
  return ds;
}

}  // namespace

TEST_CASE("identity unmixing yields exactly zero MIR and 100% remnant PMI") {
  const Matrix pair = gaussian_pair(0.6, 20000, 12);
  const Dataset ds = wrap(pair);
  const Matrix eye = Matrix::Identity(2, 2);

  const MIRReport r = mir(ds, eye, 64, Binning::equal_width);
  CHECK(r.bits_per_sample == 0.0);
  CHECK(r.log_det_w == 0.0);
  CHECK(r.sum_h_x == r.sum_h_y);

  const RemnantPMI rp = remnant_pmi(ds, eye, 64, Binning::equal_width);
  CHECK(rp.percent == 100.0);
}

TEST_CASE("diagonal scaling moves MIR by at most binning noise") {
  SynthSpec spec;
  spec.n_sources = 4;
  spec.n_samples = 50000;
  spec.seed = 17;
  const Dataset ds = synth_dataset(spec).first;
  Vector d(4);
  d << 2.0, 0.5, 7.0, 0.1;
  const MIRReport r = mir(ds, Matrix(d.asDiagonal()), 128, Binning::equal_width);
  CHECK(std::abs(r.bits_per_sample) <= 0.02);
}

TEST_CASE("whitening a correlated Gaussian pair recovers the closed-form MI") {
  const double rho = 0.9;
  const Matrix pair = gaussian_pair(rho, 200000, 2025);
  const Dataset ds = wrap(pair);
  const Matrix w = sphere(remove_row_means(ds.data));
  const MIRReport r = mir(ds, w, 128, Binning::equal_width);
  const double expected = -0.5 * std::log2(1.0 - rho * rho);  // 1.198 bits
  CHECK(std::abs(r.bits_per_sample - expected) <= 0.05);
  CHECK(r.kbits_per_sec == doctest::Approx(r.bits_per_sample * 250.0 / 1000.0));
}

TEST_CASE("MIR is exactly invariant to row permutations of W") {
  SynthSpec spec;
  spec.n_sources = 5;
  spec.n_samples = 20000;
  spec.seed = 4;
  const Dataset ds = synth_dataset(spec).first;
  Rng rng(8);
  const Matrix w = rng.gaussian_matrix(5, 5);

  Matrix perm = Matrix::Zero(5, 5);
  const int order[5] = {3, 0, 4, 1, 2};
  for (int i = 0; i < 5; ++i) perm(i, order[i]) = 1.0;

  const double a = mir(ds, w, 64, Binning::equal_width).bits_per_sample;
  const double b = mir(ds, Matrix(perm * w), 64, Binning::equal_width).bits_per_sample;
  CHECK(a == b);
}

TEST_CASE("report invariant: mir = log_det + sum_h_x - sum_h_y, kbits consistent") {
  SynthSpec spec;
  spec.n_sources = 3;
  spec.n_samples = 30000;
  spec.seed = 5;
  spec.srate = 500.0;
  const Dataset ds = synth_dataset(spec).first;
  Rng rng(10);
  const Matrix w = rng.gaussian_matrix(3, 3);
  const MIRReport r = mir(ds, w, 64, Binning::equal_occupancy);
  CHECK(r.bits_per_sample == r.log_det_w + r.sum_h_x - r.sum_h_y);
  CHECK(r.kbits_per_sec == r.bits_per_sample * 500.0 / 1000.0);
}

TEST_CASE("cached channel entropies reproduce the direct computation bit-for-bit") {
  SynthSpec spec;
  spec.n_sources = 4;
  spec.n_samples = 20000;
  spec.seed = 6;
  const Dataset ds = synth_dataset(spec).first;
  const double cached = channel_entropy_sum(ds, 128, Binning::equal_width);
  Rng rng(11);
  const Matrix w = rng.gaussian_matrix(4, 4);
  const MIRReport direct = mir(ds, w, 128, Binning::equal_width);
  const MIRReport reused = mir(ds, w, 128, Binning::equal_width, cached);
  CHECK(direct.sum_h_x == reused.sum_h_x);
  CHECK(direct.bits_per_sample == reused.bits_per_sample);
}

TEST_CASE("true unmixing drops remnant PMI to the surrogate floor") {
  SynthSpec spec;
  spec.n_sources = 4;
  spec.n_samples = 100000;
  spec.seed = 19;
  auto [ds, gt] = synth_dataset(spec);
  const Matrix w_true = gt.mixing.inverse();
  const RemnantPMI r = remnant_pmi(ds, w_true, 64, Binning::equal_width);

  // Surrogate floor: distribution of the mean-PMI statistic over source
  // sets made independent by permuting each row separately.
  std::vector<double> surrogate_means;
  for (int s = 0; s < 50; ++s) {
    Matrix permuted_sources(4, gt.sources.cols());
    permuted_sources.row(0) = gt.sources.row(0);
    for (int i = 1; i < 4; ++i) {
      permuted_sources.row(i) =
          permuted(gt.sources.row(i).transpose(), 1234 + 10 * s + i).transpose();
    }
    surrogate_means.push_back(
        pmi_matrix(permuted_sources, 64, Binning::equal_width).mean_all_elements());
  }
  double mean = 0.0;
  for (double v : surrogate_means) mean += v;
  mean /= surrogate_means.size();
  double var = 0.0;
  for (double v : surrogate_means) var += (v - mean) * (v - mean);
  var /= (surrogate_means.size() - 1);
  const double floor_percent =
      100.0 * (mean + 3.0 * std::sqrt(var)) / r.channel_mean_pmi;
  CHECK(r.percent < floor_percent);
}

TEST_CASE("random rotations keep iid Gaussian channels near 100% remnant PMI") {
  const long n = 100000;
  Matrix rows(3, n);
  for (int i = 0; i < 3; ++i) {
    rows.row(i) = iid_gaussian(n, 400 + static_cast<std::uint64_t>(i)).transpose();
  }
  const Dataset ds = wrap(rows);

  // Spread of the bias floor estimated from surrogate pairs.
  auto stat = [](const Vector& a, const Vector& b) {
    return pmi(a, b, 64, Binning::equal_width);
  };
  std::vector<double> samples;
  for (int s = 0; s < 30; ++s) {
    samples.push_back(stat(rows.row(0).transpose(),
                           permuted(rows.row(1).transpose(), 600 + s)));
  }
  double mean = 0.0;
  for (double v : samples) mean += v;
  mean /= samples.size();
  double sd = 0.0;
  for (double v : samples) sd += (v - mean) * (v - mean);
  sd = std::sqrt(sd / (samples.size() - 1));
  // Mean PMI averages 3 independent pair estimates; 3 sigma of one pair is
  // a conservative band for the ratio.
  const double band = 3.0 * sd / mean * 100.0;

  Rng rng(13);
  const Matrix rot = rng.random_orthogonal(3);
  const RemnantPMI r = remnant_pmi(ds, rot, 64, Binning::equal_width);
  CHECK(r.percent > 100.0 - band);
  CHECK(r.percent < 100.0 + band);
}

TEST_CASE("singular unmixing is rejected") {
  const Matrix pair = gaussian_pair(0.1, 1000, 3);
  const Dataset ds = wrap(pair);
  Matrix w(2, 2);
  w << 1.0, 1.0, 1.0, 1.0;
  CHECK_THROWS_AS(mir(ds, w, 16, Binning::equal_width), NumericalError);
}

TEST_CASE("rank-reducing W uses the Gram determinant and flags the report") {
  SynthSpec spec;
  spec.n_sources = 4;
  spec.n_samples = 20000;
  spec.seed = 23;
  const Dataset ds = synth_dataset(spec).first;
  const Decomposition dec = pca(ds, 2);
  const MIRReport r = mir(ds, dec.w, 64, Binning::equal_width);
  CHECK(r.rank_reduced);
  // Orthonormal rows: the Gram determinant term vanishes.
  CHECK(std::abs(r.log_det_w) <= 1e-9);
}
