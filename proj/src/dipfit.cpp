#include "icabench/dipfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace icabench {

namespace {

/// Residual variance of the best linear moment at a fixed position.
class RvObjective {
 public:
  RvObjective(const ForwardModel& fm, const Vector& map, double bound_mm)
      : fm_(fm), bound_(bound_mm) {
    const auto& active = fm.active();
    b_.resize(static_cast<Eigen::Index>(active.size()));
    for (std::size_t i = 0; i < active.size(); ++i) {
      b_[static_cast<Eigen::Index>(i)] = map[active[i]];
    }
    b_.array() -= b_.mean();
    b_norm2_ = b_.squaredNorm();
  }

  double map_power() const { return b_norm2_; }

  double rv(const Eigen::Vector3d& pos, Eigen::Vector3d* moment = nullptr) const {
    if (pos.norm() > bound_) {
      // Smooth barrier keeps the simplex inside the search ball.
      return 2.0 + (pos.norm() - bound_) / bound_;
    }
    const Matrix lead = fm_.leadfield(pos);
    Matrix la(b_.size(), 3);
    const auto& active = fm_.active();
    for (std::size_t i = 0; i < active.size(); ++i) {
      la.row(static_cast<Eigen::Index>(i)) = lead.row(active[i]);
    }
    la.rowwise() -= la.colwise().mean();
    const Eigen::Vector3d q = la.colPivHouseholderQr().solve(b_);
    if (moment) *moment = q;
    return (b_ - la * q).squaredNorm() / b_norm2_;
  }

 private:
  const ForwardModel& fm_;
  double bound_;
  Vector b_;
  double b_norm2_ = 0.0;
};

struct SimplexVertex {
  Eigen::Vector3d x;
  double f;
};

/// Nelder-Mead on the position, standard coefficients. Returns iterations.
int nelder_mead(const RvObjective& obj, Eigen::Vector3d& best, double init_step,
                int max_iter, double tol_mm) {
  std::array<SimplexVertex, 4> s;
  s[0] = {best, obj.rv(best)};
  for (int k = 0; k < 3; ++k) {
    Eigen::Vector3d v = best;
    v[k] += init_step;
    s[static_cast<std::size_t>(k + 1)] = {v, obj.rv(v)};
  }

  int iter = 0;
  for (; iter < max_iter; ++iter) {
    std::sort(s.begin(), s.end(),
              [](const SimplexVertex& a, const SimplexVertex& b) { return a.f < b.f; });
    double diameter = 0.0;
    for (int k = 1; k < 4; ++k) {
      diameter = std::max(diameter, (s[static_cast<std::size_t>(k)].x - s[0].x).norm());
    }
    if (diameter < tol_mm) break;

    const Eigen::Vector3d centroid = (s[0].x + s[1].x + s[2].x) / 3.0;
    SimplexVertex& worst = s[3];

    Eigen::Vector3d xr = centroid + (centroid - worst.x);
    const double fr = obj.rv(xr);
    if (fr < s[0].f) {
      Eigen::Vector3d xe = centroid + 2.0 * (centroid - worst.x);
      const double fe = obj.rv(xe);
      worst = fe < fr ? SimplexVertex{xe, fe} : SimplexVertex{xr, fr};
      continue;
    }
    if (fr < s[2].f) {
      worst = {xr, fr};
      continue;
    }
    Eigen::Vector3d xc = centroid + 0.5 * (worst.x - centroid);
    const double fc = obj.rv(xc);
    if (fc < worst.f) {
      worst = {xc, fc};
      continue;
    }
    for (int k = 1; k < 4; ++k) {
      auto& v = s[static_cast<std::size_t>(k)];
      v.x = s[0].x + 0.5 * (v.x - s[0].x);
      v.f = obj.rv(v.x);
    }
  }
  std::sort(s.begin(), s.end(),
            [](const SimplexVertex& a, const SimplexVertex& b) { return a.f < b.f; });
  best = s[0].x;
  return iter;
}

}  // namespace

DipoleFit fit_dipole(const Vector& map, const Montage& montage, const HeadModel& head,
                     const DipoleFitOptions& opts) {
  if (map.size() != montage.size()) {
    throw ValidationError("fit_dipole: map has " + std::to_string(map.size()) +
                          " entries for " + std::to_string(montage.size()) +
                          " electrodes");
  }
  if (!map.allFinite()) {
    throw ValidationError("fit_dipole: map has non-finite entries");
  }
  ForwardModel fm(head, montage, opts.max_degree);
  if (fm.active().size() < 6) {
    throw ValidationError("fit_dipole: need at least 6 non-excluded electrodes, have " +
                          std::to_string(fm.active().size()));
  }

  const double bound = opts.search_radius_frac * head.inner_radius();
  RvObjective obj(fm, map, bound);
  if (!(obj.map_power() > 0.0)) {
    throw NumericalError("fit_dipole: map is zero after average reference; rv undefined");
  }

  // Coarse lattice, then local refinement.
  Eigen::Vector3d best = Eigen::Vector3d::Zero();
  double best_rv = obj.rv(best);
  const double step = opts.grid_step_mm;
  for (double z = -bound; z <= bound; z += step) {
    for (double y = -bound; y <= bound; y += step) {
      for (double x = -bound; x <= bound; x += step) {
        Eigen::Vector3d p(x, y, z);
        if (p.norm() > bound) continue;
        const double r = obj.rv(p);
        if (r < best_rv) {
          best_rv = r;
          best = p;
        }
      }
    }
  }

  int iters = nelder_mead(obj, best, 0.5 * step, opts.refine_max_iter / 2,
                          opts.refine_tol_mm);
  iters += nelder_mead(obj, best, 0.5, opts.refine_max_iter - iters,
                       opts.refine_tol_mm);

  DipoleFit fit;
  fit.fit_iterations = iters;
  fit.dipole.position_mm = best;
  fit.rv = obj.rv(best, &fit.dipole.moment);
  fit.boundary = best.norm() >= bound - 1e-6;
  fit.projected_map = fm.leadfield(best) * fit.dipole.moment;
  fm.average_reference(fit.projected_map);
  return fit;
}

std::vector<double> default_nd_thresholds() {
  std::vector<double> t;
  for (int i = 1; i <= 40; ++i) {
    t.push_back(i / 100.0);
  }
  return t;
}

double DipolarityReport::nd_at(double threshold) const {
  if (rv.empty()) return 0.0;
  int hits = 0;
  for (double r : rv) {
    if (std::isfinite(r) && r < threshold) ++hits;
  }
  return 100.0 * hits / static_cast<double>(rv.size());
}

DipolarityReport dipolarity(const Decomposition& dec, const Montage& montage,
                            const HeadModel& head, const std::vector<double>& thresholds,
                            const DipoleFitOptions& opts) {
  const Eigen::Index n_rows = dec.a.rows();

  Montage fit_montage = montage;
  if (montage.size() != n_rows) {
    const auto active = montage.active_indices();
    if (static_cast<Eigen::Index>(active.size()) != n_rows) {
      throw ValidationError(
          "dipolarity: component maps have " + std::to_string(n_rows) +
          " entries; montage has " + std::to_string(montage.size()) + " electrodes (" +
          std::to_string(active.size()) + " non-excluded)");
    }
    // Maps already dropped the excluded channels.
    Montage reduced;
    for (auto i : active) {
      reduced.electrodes.push_back(montage.electrodes[static_cast<std::size_t>(i)]);
    }
    fit_montage = std::move(reduced);
  }

  DipolarityReport report;
  report.thresholds = thresholds;
  const Eigen::Index n_comp = dec.a.cols();
  report.rv.resize(static_cast<std::size_t>(n_comp),
                   std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index c = 0; c < n_comp; ++c) {
    try {
      report.rv[static_cast<std::size_t>(c)] =
          fit_dipole(dec.a.col(c), fit_montage, head, opts).rv;
    } catch (const Error&) {
      report.failed_components.push_back(static_cast<int>(c));
    }
  }
  report.nd_percent.reserve(thresholds.size());
  for (double t : thresholds) {
    report.nd_percent.push_back(report.nd_at(t));
  }
  return report;
}

}  // namespace icabench
