#ifndef ICABENCH_DIPFIT_HPP
#define ICABENCH_DIPFIT_HPP

#include "icabench/decompose.hpp"
#include "icabench/headmodel.hpp"

#include <vector>

namespace icabench {

struct DipoleFitOptions {
  double grid_step_mm = 8.0;        // coarse search lattice spacing
  double search_radius_frac = 0.95; // of the innermost shell radius
  int max_degree = 100;
  int refine_max_iter = 400;        // Nelder-Mead iterations
  double refine_tol_mm = 1e-5;      // simplex diameter at which to stop
};

struct DipoleFit {
  Dipole dipole;
  double rv = 1.0;       // residual variance fraction in [0, 1]
  Vector projected_map;  // fitted forward map, average-referenced
  int fit_iterations = 0;
  bool boundary = false;  // optimum pinned at the search-radius bound
};

/// Best single equivalent dipole for a scalp map: residual-variance
/// minimization over position (coarse grid + Nelder-Mead refinement) with
/// the moment solved linearly at every candidate position. Both the map and
/// the model are average-referenced over non-excluded electrodes.
DipoleFit fit_dipole(const Vector& map, const Montage& montage, const HeadModel& head,
                     const DipoleFitOptions& opts = {});

struct DipolarityReport {
  std::vector<double> rv;              // per component; NaN where the fit failed
  std::vector<int> failed_components;  // indices skipped with errors
  std::vector<double> thresholds;
  std::vector<double> nd_percent;      // per threshold

  /// Percentage of components with rv below the threshold.
  double nd_at(double threshold) const;
};

/// Residual-variance thresholds 1%..40% in 1% steps.
std::vector<double> default_nd_thresholds();

/// Fits every column of dec.A (component scalp maps). Fit errors are
/// recorded per component instead of aborting the report. The montage must
/// either match the component maps one electrode per channel, or its
/// non-excluded electrodes must (maps that already dropped excluded
/// channels).
DipolarityReport dipolarity(const Decomposition& dec, const Montage& montage,
                            const HeadModel& head,
                            const std::vector<double>& thresholds = default_nd_thresholds(),
                            const DipoleFitOptions& opts = {});

}  // namespace icabench

#endif  // ICABENCH_DIPFIT_HPP
