#include "icabench/infomax.hpp"

#include "icabench/synth.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace icabench;

namespace {

std::pair<Dataset, GroundTruth> laplacian_mixture(int n, long samples, std::uint64_t seed) {
  SynthSpec spec;
  spec.n_sources = n;
  spec.n_samples = samples;
  spec.source_kinds = {SourceKind::laplacian};
  spec.seed = seed;
  return synth_dataset(spec);
}

}  // namespace

TEST_CASE("infomax recovers a 2-source laplacian mixture") {
  auto [ds, gt] = laplacian_mixture(2, 100000, 41);
  InfomaxParams params;
  params.tol = 1e-7;
  params.max_iter = 2000;
  params.seed = 1;
  const Decomposition dec = infomax(ds, params);
  CHECK(amari_index(dec.w, gt.mixing) < 0.05);
  CHECK(dec.converged);
}

TEST_CASE("infomax on already-unmixed sources stays near a scaled permutation") {
  SynthSpec spec;
  spec.n_sources = 3;
  spec.n_samples = 100000;
  spec.source_kinds = {SourceKind::laplacian};
  spec.mixing = MixingKind::explicit_matrix;
  spec.explicit_mixing = Matrix::Identity(3, 3);
  spec.seed = 42;
  const Dataset ds = synth_dataset(spec).first;
  InfomaxParams params;
  params.tol = 1e-7;
  params.max_iter = 2000;
  const Decomposition dec = infomax(ds, params);
  CHECK(amari_index(dec.w, Matrix::Identity(3, 3)) < 0.1);
}

TEST_CASE("extended infomax handles sub-Gaussian sources where plain fails") {
  SynthSpec spec;
  spec.n_sources = 4;
  spec.n_samples = 100000;
  spec.source_kinds = {SourceKind::uniform, SourceKind::uniform, SourceKind::laplacian,
                       SourceKind::logistic};
  spec.seed = 17;
  auto [ds, gt] = synth_dataset(spec);

  InfomaxParams plain;
  plain.tol = 1e-7;
  plain.max_iter = 1500;
  const double plain_index = amari_index(infomax(ds, plain).w, gt.mixing);
  CHECK(plain_index >= 0.05);

  InfomaxParams ext = plain;
  ext.extended = true;
  const double ext_index = amari_index(infomax(ds, ext).w, gt.mixing);
  CHECK(ext_index < 0.05);
}

TEST_CASE("infomax is deterministic for a fixed seed") {
  auto [ds, gt] = laplacian_mixture(3, 20000, 7);
  InfomaxParams params;
  params.tol = 1e-6;
  params.max_iter = 300;
  params.seed = 5;
  const Decomposition a = infomax(ds, params);
  const Decomposition b = infomax(ds, params);
  CHECK(a.w == b.w);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("infomax rejects bad parameters") {
  auto [ds, gt] = laplacian_mixture(2, 1000, 1);
  InfomaxParams params;
  params.tol = 0.0;
  CHECK_THROWS_AS(infomax(ds, params), ValidationError);
  params.tol = 1e-6;
  params.anneal_factor = 1.5;
  CHECK_THROWS_AS(infomax(ds, params), ValidationError);
}
