#ifndef ICABENCH_BENCH_HPP
#define ICABENCH_BENCH_HPP

#include "icabench/decompose.hpp"
#include "icabench/dipfit.hpp"
#include "icabench/mir.hpp"
#include "icabench/regression.hpp"
#include "icabench/synth.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace icabench {

struct AlgorithmSpec {
  std::string id;       // pca | infomax | ext_infomax | fastica | picard |
                        // picard_ext | picard_o | amuse | import | identity
  nlohmann::json params = nlohmann::json::object();
  std::string label;    // defaults to id

  std::string display() const { return label.empty() ? id : label; }
};

struct DatasetSpec {
  std::string path;  // non-empty: load from file
  SynthSpec synth;   // otherwise: generate

  bool is_synth() const { return path.empty(); }
};

struct BenchConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<AlgorithmSpec> algorithms;
  std::set<std::string> metrics{"mir", "pmi"};
  int bins = 128;
  Binning binning = Binning::equal_width;
  std::string montage_path;
  std::string headmodel_path;  // empty: default four-shell model
  std::vector<std::string> exclude_labels;
  std::vector<double> nd_thresholds = default_nd_thresholds();
  int repetitions = 1;  // timing runs
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir;
  double csv_srate = 0.0;

  void validate() const;
};

BenchConfig bench_config_from_json(const nlohmann::json& j);
nlohmann::json bench_config_to_json(const BenchConfig& cfg);

struct CellResult {
  std::string algorithm;
  std::string dataset;
  bool ok = false;
  std::string error;
  std::optional<MIRReport> mir;
  std::optional<RemnantPMI> remnant;
  std::optional<DipolarityReport> dip;
  int iterations = 0;
  bool converged = false;
  double decompose_sec = 0.0;
  double metrics_sec = 0.0;
};

struct AlgorithmSummary {
  std::string algorithm;
  int n_ok = 0;
  double mir_bits_mean = 0.0, mir_bits_std = 0.0;
  double mir_kbits_mean = 0.0, mir_kbits_std = 0.0;
  double remnant_percent_mean = 0.0, remnant_percent_std = 0.0;
  double nd5_mean = 0.0, nd5_std = 0.0;
  double decompose_sec_mean = 0.0;
};

struct BenchReport {
  BenchConfig config;
  std::vector<std::string> dataset_ids;
  std::vector<CellResult> cells;  // algorithm-major order
  std::vector<AlgorithmSummary> summary;
  // Per dataset: algorithm labels sorted by MIR descending, plus whether
  // every dataset reproduces the mean-MIR ordering.
  std::map<std::string, std::vector<std::string>> mir_order_by_dataset;
  bool mir_order_preserved = false;
  int threads_used = 1;
  std::string host;
  std::string created_utc;

  int error_count() const;
  const CellResult* cell(const std::string& algorithm, const std::string& dataset) const;

  /// Deterministic JSON. Timings and timestamps live in a separate
  /// "timings" section so the metric sections compare bit-for-bit across
  /// reruns.
  nlohmann::json to_json() const;
};

BenchReport bench_report_from_json(const nlohmann::json& j);

/// Runs the full algorithm x dataset grid. Failures are isolated per cell.
/// Per-dataset channel entropies and channel PMI are computed once and
/// shared across algorithms. When cfg.out_dir is set, writes
/// bench_report.json there atomically.
BenchReport run_benchmark(const BenchConfig& cfg);

struct ThresholdSweepRow {
  double threshold = 0.0;
  std::optional<RegressionResult> nd_vs_mir;
  std::optional<RegressionResult> nd_vs_remnant;
  std::string note;  // set when a regression is degenerate
};

/// Regressions of ND%(t) on mean MIR and on remnant PMI across algorithms,
/// one row per threshold.
std::vector<ThresholdSweepRow> threshold_sweep(const BenchReport& report,
                                               const std::vector<double>& thresholds);

struct ToleranceSweepCell {
  double tolerance = 0.0;
  std::string dataset;
  bool ok = false;
  std::string error;
  double mir_bits = 0.0;
  double mir_kbits = 0.0;
  int iterations = 0;
  double seconds = 0.0;
};

struct ToleranceSweepTable {
  std::string algorithm_id;
  std::vector<double> tolerances;
  std::vector<ToleranceSweepCell> cells;  // tolerance-major
  std::vector<std::pair<double, double>> mean_mir_bits;  // (tolerance, mean)
  std::map<std::string, double> reference_mean_mir_bits; // other algorithms

  nlohmann::json to_json() const;
};

/// Reruns one algorithm per stopping tolerance per dataset; other configured
/// algorithms contribute reference lines.
ToleranceSweepTable tolerance_sweep(const BenchConfig& cfg, const std::string& algorithm_id,
                                    const std::vector<double>& tolerances);

struct TimingRow {
  std::string algorithm;
  std::string dataset;
  int repetitions = 0;
  bool ok = false;
  std::string error;
  std::vector<double> samples_sec;
  double mean_sec = 0.0;
  double std_sec = 0.0;
  double metrics_sec = 0.0;  // timed separately from the decomposition
};

struct TimingTable {
  std::vector<TimingRow> rows;
  std::string host;
  int threads = 1;

  nlohmann::json to_json() const;
};

/// Wall-clock decomposition timing, forced serial to avoid contention bias.
TimingTable time_algorithms(const BenchConfig& cfg);

/// Dispatches an algorithm spec against a dataset. fallback_seed is used
/// when the params carry no seed of their own.
Decomposition run_algorithm(const AlgorithmSpec& spec, const Dataset& ds,
                            std::uint64_t fallback_seed);

Dataset resolve_dataset(const DatasetSpec& spec, double csv_srate);

/// --threads / config value, overridden by ICABENCH_THREADS when set.
int effective_threads(int configured);

}  // namespace icabench

#endif  // ICABENCH_BENCH_HPP
