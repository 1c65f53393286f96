#ifndef ICABENCH_PLOTS_HPP
#define ICABENCH_PLOTS_HPP

#include "icabench/bench.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace icabench {

enum class PlotKind {
  dipolarity_curves,  // fig1: ND% vs r.v. threshold, one curve per algorithm
  nd_scatter,         // fig2: ND5% vs MIR and vs remnant PMI, ellipses + fit
  mir_by_dataset,     // fig3: per-dataset MIR bars
  mir_difference,     // fig4: MIR difference from the best algorithm
  runtime,            // fig5: mean decomposition time bars
};

PlotKind plot_kind_from_string(const std::string& s);

/// Writes <name>.svg plus <name>.csv with the exact plotted values into
/// out_dir; returns the created files. Throws ValidationError naming the
/// figure when a required metric is missing from the report.
std::vector<std::filesystem::path> emit_plots(const BenchReport& report, PlotKind kind,
                                              const std::filesystem::path& out_dir);

/// fig6: MIR vs stopping tolerance with reference lines.
std::vector<std::filesystem::path> emit_tolerance_plot(
    const ToleranceSweepTable& table, const std::filesystem::path& out_dir);

/// fig5 variant fed by a dedicated timing run.
std::vector<std::filesystem::path> emit_runtime_plot(
    const TimingTable& table, const std::filesystem::path& out_dir);

}  // namespace icabench

#endif  // ICABENCH_PLOTS_HPP
