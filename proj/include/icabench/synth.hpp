#ifndef ICABENCH_SYNTH_HPP
#define ICABENCH_SYNTH_HPP

#include "icabench/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace icabench {

enum class SourceKind { laplacian, uniform, gaussian, logistic, bimodal };

SourceKind source_kind_from_string(const std::string& s);
std::string to_string(SourceKind k);

enum class MixingKind { random_orthogonal, random_general, explicit_matrix };

struct SynthSpec {
  int n_sources = 0;
  long n_samples = 0;
  // Either one kind (applied to every source) or one kind per source.
  std::vector<SourceKind> source_kinds{SourceKind::laplacian};
  MixingKind mixing = MixingKind::random_general;
  Matrix explicit_mixing;  // used when mixing == explicit_matrix
  std::optional<double> noise_db;
  std::uint64_t seed = 0;
  double srate = 250.0;
  std::string id;  // empty -> "synth-<seed>"

  void validate() const;
  SourceKind kind_of(int i) const;
};

struct GroundTruth {
  Matrix mixing;   // n x n, data = mixing * sources (+ noise)
  Matrix sources;  // n x N, zero mean, unit variance per row
};

/// Deterministic synthetic mixture. Sources are standardized to zero mean
/// and unit variance (sample statistics) before mixing, so data equals
/// mixing * sources exactly when no noise is requested.
std::pair<Dataset, GroundTruth> synth_dataset(const SynthSpec& spec);

}  // namespace icabench

#endif  // ICABENCH_SYNTH_HPP
