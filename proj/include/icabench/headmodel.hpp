#ifndef ICABENCH_HEADMODEL_HPP
#define ICABENCH_HEADMODEL_HPP

#include "icabench/types.hpp"

#include <array>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace icabench {

/// Four concentric conducting shells. radii_mm[i] is the outer radius of
/// region i, ascending; conductivities are relative (only ratios shape the
/// scalp pattern).
struct HeadModel {
  std::array<double, 4> radii_mm{71.0, 72.0, 79.0, 85.0};
  std::array<double, 4> conductivities{0.33, 0.0042, 1.0, 0.33};

  double inner_radius() const { return radii_mm[0]; }
  double outer_radius() const { return radii_mm[3]; }
  void validate() const;
};

HeadModel load_headmodel_json(const std::filesystem::path& path);
void save_headmodel_json(const HeadModel& h, const std::filesystem::path& path);

struct Electrode {
  std::string label;
  Eigen::Vector3d position_mm;
};

struct Montage {
  std::vector<Electrode> electrodes;
  std::set<std::string> exclude;  // labels omitted from fitting

  Eigen::Index size() const { return static_cast<Eigen::Index>(electrodes.size()); }
  bool is_excluded(const Electrode& e) const { return exclude.count(e.label) > 0; }
  std::vector<Eigen::Index> active_indices() const;
};

/// CSV with rows `label,x_mm,y_mm,z_mm`; '#' lines are comments.
Montage load_montage_csv(const std::filesystem::path& path);
void save_montage_csv(const Montage& m, const std::filesystem::path& path);

/// Fibonacci-spiral cap of n electrodes on the scalp sphere, covering
/// z/r >= z_min_frac. Handy for synthetic benchmarks and tests.
Montage make_spiral_montage(int n, const HeadModel& head, double z_min_frac = -0.3);

struct Dipole {
  Eigen::Vector3d position_mm = Eigen::Vector3d::Zero();
  Eigen::Vector3d moment = Eigen::Vector3d::Zero();
};

/// Legendre-series forward solution for a dipole in the innermost region of
/// four concentric shells. Montage positions must lie within 5% of the outer
/// radius; they are projected onto the scalp sphere before use.
class ForwardModel {
 public:
  ForwardModel(const HeadModel& head, const Montage& montage, int max_degree = 100);

  /// Scalp potentials at every montage electrode, average-referenced over
  /// the non-excluded ones. Truncates the series when a degree's relative
  /// contribution drops below 1e-12; throws NumericalError when max_degree
  /// terms are not enough at the requested eccentricity.
  Vector potential(const Dipole& dipole) const;

  /// n_electrodes x 3 map from moment to raw (un-referenced) potentials.
  Matrix leadfield(const Eigen::Vector3d& position_mm) const;

  const std::vector<Eigen::Index>& active() const { return active_; }
  const HeadModel& head() const { return head_; }
  Eigen::Index n_electrodes() const { return directions_.rows(); }

  /// Subtracts the mean over non-excluded electrodes from every entry.
  void average_reference(Vector& map) const;

 private:
  HeadModel head_;
  Matrix directions_;  // unit vectors, one row per electrode
  std::vector<Eigen::Index> active_;
  int max_degree_;
  Vector shell_gain_;  // per-degree gain of the four-shell stack
};

/// One-shot convenience wrapper around ForwardModel::potential.
Vector forward_potential(const Dipole& dipole, const Montage& montage,
                         const HeadModel& head, int max_degree = 100);

}  // namespace icabench

#endif  // ICABENCH_HEADMODEL_HPP
