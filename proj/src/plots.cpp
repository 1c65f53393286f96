#include "icabench/plots.hpp"

#include "icabench/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace icabench {

namespace fs = std::filesystem;

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                          "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2"};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

/// Bare-bones SVG chart: fixed margins, linear or log10 x axis.
class Svg {
 public:
  Svg(const std::string& title, double x_min, double x_max, double y_min, double y_max,
      bool log_x = false)
      : log_x_(log_x) {
    if (log_x_) {
      x_min = std::log10(x_min);
      x_max = std::log10(x_max);
    }
    pad_range(x_min, x_max);
    pad_range(y_min, y_max);
    x_min_ = x_min;
    x_max_ = x_max;
    y_min_ = y_min;
    y_max_ = y_max;
    body_ << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='" << kH
          << "' viewBox='0 0 " << kW << " " << kH << "'>\n"
          << "<rect width='100%' height='100%' fill='white'/>\n"
          << "<text x='" << kW / 2 << "' y='18' text-anchor='middle' font-size='14'>"
          << title << "</text>\n";
    axes();
  }

  double px(double x) const {
    if (log_x_) x = std::log10(x);
    return kL + (x - x_min_) / (x_max_ - x_min_) * (kW - kL - kR);
  }
  double py(double y) const {
    return kH - kB - (y - y_min_) / (y_max_ - y_min_) * (kH - kT - kB);
  }

  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& color,
                bool dashed = false) {
    body_ << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5'";
    if (dashed) body_ << " stroke-dasharray='5,3'";
    body_ << " points='";
    for (const auto& [x, y] : pts) body_ << px(x) << "," << py(y) << " ";
    body_ << "'/>\n";
  }

  void circle(double x, double y, const std::string& color, double r = 3.5) {
    body_ << "<circle cx='" << px(x) << "' cy='" << py(y) << "' r='" << r << "' fill='"
          << color << "'/>\n";
  }

  void ellipse(double x, double y, double rx, double ry, const std::string& color) {
    const double prx = std::abs(px(x + rx) - px(x));
    const double pry = std::abs(py(y + ry) - py(y));
    body_ << "<ellipse cx='" << px(x) << "' cy='" << py(y) << "' rx='" << std::max(prx, 1.0)
          << "' ry='" << std::max(pry, 1.0) << "' fill='none' stroke='" << color
          << "'/>\n";
  }

  void bar(double x0, double x1, double y, const std::string& color) {
    const double base = py(std::max(0.0, y_min_));
    body_ << "<rect x='" << px(x0) << "' y='" << std::min(py(y), base) << "' width='"
          << px(x1) - px(x0) << "' height='" << std::abs(base - py(y)) << "' fill='" << color
          << "'/>\n";
  }

  void hline(double y, const std::string& color, const std::string& label) {
    body_ << "<line x1='" << kL << "' y1='" << py(y) << "' x2='" << kW - kR << "' y2='"
          << py(y) << "' stroke='" << color << "' stroke-dasharray='6,4'/>\n"
          << "<text x='" << kW - kR + 4 << "' y='" << py(y) + 4 << "' font-size='10' fill='"
          << color << "'>" << label << "</text>\n";
  }

  void label_axes(const std::string& x_label, const std::string& y_label) {
    body_ << "<text x='" << (kL + kW - kR) / 2 << "' y='" << kH - 8
          << "' text-anchor='middle' font-size='12'>" << x_label << "</text>\n"
          << "<text x='14' y='" << (kT + kH - kB) / 2
          << "' text-anchor='middle' font-size='12' transform='rotate(-90 14 "
          << (kT + kH - kB) / 2 << ")'>" << y_label << "</text>\n";
  }

  void legend(const std::vector<std::pair<std::string, std::string>>& entries) {
    double y = kT + 10;
    for (const auto& [name, color] : entries) {
      body_ << "<rect x='" << kW - kR - 150 << "' y='" << y - 8
            << "' width='12' height='8' fill='" << color << "'/>\n"
            << "<text x='" << kW - kR - 134 << "' y='" << y << "' font-size='10'>" << name
            << "</text>\n";
      y += 14;
    }
  }

  void annotate(double x, double y, const std::string& text) {
    body_ << "<text x='" << px(x) + 5 << "' y='" << py(y) - 4 << "' font-size='10'>" << text
          << "</text>\n";
  }

  std::string str() {
    body_ << "</svg>\n";
    return body_.str();
  }

 private:
  static constexpr double kW = 640, kH = 440, kL = 60, kR = 170, kT = 30, kB = 44;

  static void pad_range(double& lo, double& hi) {
    if (!(hi > lo)) {
      hi = lo + 1.0;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }

  void axes() {
    body_ << "<rect x='" << kL << "' y='" << kT << "' width='" << kW - kL - kR
          << "' height='" << kH - kT - kB << "' fill='none' stroke='black'/>\n";
    for (int i = 0; i <= 5; ++i) {
      const double fx = x_min_ + (x_max_ - x_min_) * i / 5.0;
      const double fy = y_min_ + (y_max_ - y_min_) * i / 5.0;
      const double sx = kL + (kW - kL - kR) * i / 5.0;
      const double sy = kH - kB - (kH - kT - kB) * i / 5.0;
      body_ << "<line x1='" << sx << "' y1='" << kH - kB << "' x2='" << sx << "' y2='"
            << kH - kB + 4 << "' stroke='black'/>\n"
            << "<text x='" << sx << "' y='" << kH - kB + 16
            << "' text-anchor='middle' font-size='10'>"
            << fmt_tick(log_x_ ? std::pow(10.0, fx) : fx) << "</text>\n"
            << "<line x1='" << kL - 4 << "' y1='" << sy << "' x2='" << kL << "' y2='" << sy
            << "' stroke='black'/>\n"
            << "<text x='" << kL - 6 << "' y='" << sy + 3
            << "' text-anchor='end' font-size='10'>" << fmt_tick(fy) << "</text>\n";
    }
  }

  std::ostringstream body_;
  bool log_x_;
  double x_min_ = 0, x_max_ = 1, y_min_ = 0, y_max_ = 1;
};

std::string color_of(std::size_t i) { return kPalette[i % 10]; }

void require(bool ok, const std::string& figure, const std::string& what) {
  if (!ok) {
    throw ValidationError(figure + ": missing " + what);
  }
}

std::vector<fs::path> write_pair(const fs::path& out_dir, const std::string& stem,
                                 const std::string& svg, const std::string& csv) {
  fs::create_directories(out_dir);
  const fs::path svg_path = out_dir / (stem + ".svg");
  const fs::path csv_path = out_dir / (stem + ".csv");
  write_file_atomic(svg_path, svg);
  write_file_atomic(csv_path, csv);
  return {svg_path, csv_path};
}

// fig1 ----------------------------------------------------------------------

std::vector<fs::path> emit_fig1(const BenchReport& report, const fs::path& out_dir) {
  const std::vector<double>* thresholds = nullptr;
  for (const auto& c : report.cells) {
    if (c.ok && c.dip) {
      thresholds = &c.dip->thresholds;
      break;
    }
  }
  require(thresholds != nullptr, "fig1 (dipolarity curves)", "dipolarity metric");

  std::vector<std::string> algos;
  std::vector<std::vector<double>> curves;  // per algorithm, per threshold
  for (const auto& s : report.summary) {
    std::vector<double> curve(thresholds->size(), 0.0);
    int n_ds = 0;
    for (const auto& c : report.cells) {
      if (c.algorithm != s.algorithm || !c.ok || !c.dip) continue;
      ++n_ds;
      for (std::size_t k = 0; k < thresholds->size(); ++k) {
        curve[k] += c.dip->nd_at((*thresholds)[k]);
      }
    }
    if (n_ds == 0) continue;
    for (auto& v : curve) v /= n_ds;
    algos.push_back(s.algorithm);
    curves.push_back(std::move(curve));
  }
  require(!algos.empty(), "fig1 (dipolarity curves)", "successful dipolarity cells");

  std::ostringstream csv;
  csv << "threshold_rv";
  for (const auto& a : algos) csv << ',' << a;
  csv << '\n';
  double y_max = 1.0;
  for (std::size_t k = 0; k < thresholds->size(); ++k) {
    csv << fmt((*thresholds)[k]);
    for (const auto& c : curves) {
      csv << ',' << fmt(c[k]);
      y_max = std::max(y_max, c[k]);
    }
    csv << '\n';
  }

  Svg svg("Near-dipolar components vs r.v. threshold", thresholds->front(),
          thresholds->back(), 0.0, y_max);
  std::vector<std::pair<std::string, std::string>> legend;
  for (std::size_t a = 0; a < algos.size(); ++a) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < thresholds->size(); ++k) {
      pts.emplace_back((*thresholds)[k], curves[a][k]);
    }
    svg.polyline(pts, color_of(a));
    legend.emplace_back(algos[a], color_of(a));
  }
  svg.legend(legend);
  svg.label_axes("residual variance threshold", "near-dipolar components (%)");
  return write_pair(out_dir, "fig1_dipolarity_curves", svg.str(), csv.str());
}

// fig2 ----------------------------------------------------------------------

std::vector<fs::path> emit_fig2_axis(const BenchReport& report, const fs::path& out_dir,
                                     bool remnant_axis) {
  const std::string figure = remnant_axis ? "fig2 (ND% vs remnant PMI)" : "fig2 (ND% vs MIR)";
  std::vector<std::string> algos;
  std::vector<double> xm, xs, ym, ys;
  for (const auto& s : report.summary) {
    if (s.n_ok == 0) continue;
    algos.push_back(s.algorithm);
    xm.push_back(remnant_axis ? s.remnant_percent_mean : s.mir_kbits_mean);
    xs.push_back(remnant_axis ? s.remnant_percent_std : s.mir_kbits_std);
    ym.push_back(s.nd5_mean);
    ys.push_back(s.nd5_std);
  }
  bool any_dip = false;
  for (const auto& c : report.cells) {
    if (c.ok && c.dip) any_dip = true;
  }
  require(any_dip, figure, "dipolarity metric");
  require(!remnant_axis || [&] {
    for (const auto& c : report.cells) {
      if (c.ok && c.remnant) return true;
    }
    return false;
  }(), figure, "pmi metric");
  require(!algos.empty(), figure, "successful cells");

  // Ellipse radii follow the plotting convention of 0.2 cross-dataset std.
  std::ostringstream csv;
  const std::string x_name = remnant_axis ? "remnant_pmi_percent" : "mir_kbits_per_sec";
  csv << "algorithm," << x_name << "_mean," << x_name << "_std,nd5_mean,nd5_std,"
      << "ellipse_rx,ellipse_ry\n";
  for (std::size_t i = 0; i < algos.size(); ++i) {
    csv << algos[i] << ',' << fmt(xm[i]) << ',' << fmt(xs[i]) << ',' << fmt(ym[i]) << ','
        << fmt(ys[i]) << ',' << fmt(0.2 * xs[i]) << ',' << fmt(0.2 * ys[i]) << '\n';
  }

  const double x_lo = *std::min_element(xm.begin(), xm.end());
  const double x_hi = *std::max_element(xm.begin(), xm.end());
  const double y_lo = *std::min_element(ym.begin(), ym.end());
  const double y_hi = *std::max_element(ym.begin(), ym.end());
  Svg svg(remnant_axis ? "ND5% vs remnant PMI" : "ND5% vs MIR", x_lo, x_hi, y_lo, y_hi);

  if (algos.size() >= 3) {
    Vector x(static_cast<Eigen::Index>(algos.size())), y(static_cast<Eigen::Index>(algos.size()));
    for (std::size_t i = 0; i < algos.size(); ++i) {
      x[static_cast<Eigen::Index>(i)] = xm[i];
      y[static_cast<Eigen::Index>(i)] = ym[i];
    }
    try {
      const RegressionResult reg = regress(x, y);
      svg.polyline({{x_lo, reg.intercept + reg.slope * x_lo},
                    {x_hi, reg.intercept + reg.slope * x_hi}},
                   "#555555", true);
      char buf[96];
      std::snprintf(buf, sizeof(buf), "R^2=%.3f, -log10(p)=%.2f", reg.r_squared,
                    -std::log10(reg.p_value));
      svg.annotate(x_lo, y_hi, buf);
    } catch (const Error&) {
      // degenerate regressor: scatter only
    }
  }
  std::vector<std::pair<std::string, std::string>> legend;
  for (std::size_t i = 0; i < algos.size(); ++i) {
    svg.circle(xm[i], ym[i], color_of(i));
    svg.ellipse(xm[i], ym[i], 0.2 * xs[i], 0.2 * ys[i], color_of(i));
    legend.emplace_back(algos[i], color_of(i));
  }
  svg.legend(legend);
  svg.label_axes(remnant_axis ? "remnant PMI (%)" : "MIR (Kbits/s)",
                 "near-dipolar components at 5% r.v. (%)");
  return write_pair(out_dir,
                    remnant_axis ? "fig2_nd_vs_remnant_pmi" : "fig2_nd_vs_mir",
                    svg.str(), csv.str());
}

// fig2 stats panel: R^2 and -log10(p) across r.v. thresholds --------------

std::vector<fs::path> emit_fig2_stats(const BenchReport& report, const fs::path& out_dir) {
  const std::vector<double>* thresholds = nullptr;
  for (const auto& c : report.cells) {
    if (c.ok && c.dip) {
      thresholds = &c.dip->thresholds;
      break;
    }
  }
  require(thresholds != nullptr, "fig2 (threshold stats)", "dipolarity metric");
  const auto rows = threshold_sweep(report, *thresholds);

  std::ostringstream csv;
  csv << "threshold_rv,r2_mir,neg_log10_p_mir,r2_remnant,neg_log10_p_remnant\n";
  std::vector<std::pair<double, double>> r2_pts, p_pts;
  for (const auto& row : rows) {
    csv << fmt(row.threshold);
    if (row.nd_vs_mir) {
      csv << ',' << fmt(row.nd_vs_mir->r_squared) << ','
          << fmt(-std::log10(row.nd_vs_mir->p_value));
      r2_pts.emplace_back(row.threshold, row.nd_vs_mir->r_squared);
      p_pts.emplace_back(row.threshold, -std::log10(row.nd_vs_mir->p_value));
    } else {
      csv << ",,";
    }
    if (row.nd_vs_remnant) {
      csv << ',' << fmt(row.nd_vs_remnant->r_squared) << ','
          << fmt(-std::log10(row.nd_vs_remnant->p_value));
    } else {
      csv << ",,";
    }
    csv << '\n';
  }

  double p_max = 1.0;
  for (const auto& [t, v] : p_pts) p_max = std::max(p_max, v);
  Svg svg("Regression strength vs r.v. threshold", thresholds->front(),
          thresholds->back(), 0.0, std::max(1.0, p_max));
  if (!r2_pts.empty()) svg.polyline(r2_pts, kPalette[1]);
  if (!p_pts.empty()) svg.polyline(p_pts, kPalette[0], true);
  svg.legend({{"R^2 (ND vs MIR)", kPalette[1]}, {"-log10 p", kPalette[0]}});
  svg.label_axes("residual variance threshold", "R^2 / -log10(p)");
  return write_pair(out_dir, "fig2_threshold_stats", svg.str(), csv.str());
}

// fig3 ----------------------------------------------------------------------

std::vector<fs::path> emit_fig3(const BenchReport& report, const fs::path& out_dir) {
  bool any = false;
  for (const auto& c : report.cells) {
    if (c.ok && c.mir) any = true;
  }
  require(any, "fig3 (MIR by dataset)", "mir metric");

  // Mean ordering for the per-dataset comparison column.
  std::vector<std::pair<double, std::string>> mean_scored;
  for (const auto& s : report.summary) {
    mean_scored.emplace_back(s.mir_bits_mean, s.algorithm);
  }
  std::stable_sort(mean_scored.begin(), mean_scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::vector<std::string> mean_order;
  for (const auto& [v, n] : mean_scored) mean_order.push_back(n);

  std::ostringstream csv;
  csv << "dataset,algorithm,mir_kbits_per_sec,rank_in_dataset,order_matches_mean\n";
  double y_max = 0.0;
  for (const auto& id : report.dataset_ids) {
    const auto it = report.mir_order_by_dataset.find(id);
    const bool matches =
        it != report.mir_order_by_dataset.end() && it->second == mean_order;
    for (const auto& c : report.cells) {
      if (c.dataset != id || !c.ok || !c.mir) continue;
      int rank = 0;
      if (it != report.mir_order_by_dataset.end()) {
        const auto pos = std::find(it->second.begin(), it->second.end(), c.algorithm);
        rank = pos == it->second.end()
                   ? 0
                   : static_cast<int>(pos - it->second.begin()) + 1;
      }
      csv << id << ',' << c.algorithm << ',' << fmt(c.mir->kbits_per_sec) << ',' << rank
          << ',' << (matches ? "true" : "false") << '\n';
      y_max = std::max(y_max, c.mir->kbits_per_sec);
    }
  }

  const std::size_t n_ds = report.dataset_ids.size();
  const std::size_t n_alg = report.summary.size();
  Svg svg("MIR by dataset", 0.0, static_cast<double>(n_ds), 0.0, y_max);
  std::vector<std::pair<std::string, std::string>> legend;
  for (std::size_t a = 0; a < n_alg; ++a) {
    legend.emplace_back(report.summary[a].algorithm, color_of(a));
    for (std::size_t d = 0; d < n_ds; ++d) {
      const CellResult* c = report.cell(report.summary[a].algorithm, report.dataset_ids[d]);
      if (!c || !c->ok || !c->mir) continue;
      const double group = static_cast<double>(d);
      const double w = 0.8 / static_cast<double>(n_alg);
      svg.bar(group + 0.1 + a * w, group + 0.1 + (a + 1) * w, c->mir->kbits_per_sec,
              color_of(a));
    }
  }
  svg.legend(legend);
  svg.label_axes("dataset index", "MIR (Kbits/s)");
  return write_pair(out_dir, "fig3_mir_by_dataset", svg.str(), csv.str());
}

// fig4 ----------------------------------------------------------------------

std::vector<fs::path> emit_fig4(const BenchReport& report, const fs::path& out_dir) {
  std::vector<std::pair<double, std::string>> scored;
  for (const auto& s : report.summary) {
    if (s.n_ok > 0) scored.emplace_back(s.mir_kbits_mean, s.algorithm);
  }
  require(!scored.empty(), "fig4 (MIR difference)", "mir metric");
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  const double best = scored.front().first;

  std::ostringstream csv;
  csv << "algorithm,mean_mir_kbits_per_sec,mir_difference_from_best\n";
  for (const auto& [v, name] : scored) {
    csv << name << ',' << fmt(v) << ',' << fmt(best - v) << '\n';
  }

  Svg svg("MIR difference from best", 0.0, static_cast<double>(scored.size()), 0.0,
          std::max(1e-12, best - scored.back().first));
  for (std::size_t i = 0; i < scored.size(); ++i) {
    svg.bar(i + 0.15, i + 0.85, best - scored[i].first, color_of(i));
    svg.annotate(static_cast<double>(i), best - scored[i].first, scored[i].second);
  }
  svg.label_axes("algorithms by descending mean MIR", "MIR difference (Kbits/s)");
  return write_pair(out_dir, "fig4_mir_difference", svg.str(), csv.str());
}

// fig5 ----------------------------------------------------------------------

std::vector<fs::path> emit_fig5(const BenchReport& report, const fs::path& out_dir) {
  require(!report.summary.empty(), "fig5 (runtime)", "summary");
  std::ostringstream csv;
  csv << "algorithm,mean_decompose_sec\n";
  double y_max = 0.0;
  for (const auto& s : report.summary) {
    csv << s.algorithm << ',' << fmt(s.decompose_sec_mean) << '\n';
    y_max = std::max(y_max, s.decompose_sec_mean);
  }
  Svg svg("Mean decomposition time", 0.0, static_cast<double>(report.summary.size()), 0.0,
          std::max(y_max, 1e-9));
  for (std::size_t i = 0; i < report.summary.size(); ++i) {
    svg.bar(i + 0.15, i + 0.85, report.summary[i].decompose_sec_mean, color_of(i));
    svg.annotate(static_cast<double>(i), report.summary[i].decompose_sec_mean,
                 report.summary[i].algorithm);
  }
  svg.label_axes("algorithm", "seconds");
  return write_pair(out_dir, "fig5_runtime", svg.str(), csv.str());
}

}  // namespace

PlotKind plot_kind_from_string(const std::string& s) {
  if (s == "fig1" || s == "dipolarity-curves") return PlotKind::dipolarity_curves;
  if (s == "fig2" || s == "nd-scatter") return PlotKind::nd_scatter;
  if (s == "fig3" || s == "mir-by-dataset") return PlotKind::mir_by_dataset;
  if (s == "fig4" || s == "mir-difference") return PlotKind::mir_difference;
  if (s == "fig5" || s == "runtime") return PlotKind::runtime;
  throw ValidationError("unknown plot kind '" + s +
                        "' (fig1..fig5; fig6 comes from a tolerance sweep file)");
}

std::vector<fs::path> emit_plots(const BenchReport& report, PlotKind kind,
                                 const fs::path& out_dir) {
  switch (kind) {
    case PlotKind::dipolarity_curves:
      return emit_fig1(report, out_dir);
    case PlotKind::nd_scatter: {
      auto files = emit_fig2_axis(report, out_dir, false);
      auto more = emit_fig2_axis(report, out_dir, true);
      files.insert(files.end(), more.begin(), more.end());
      auto stats = emit_fig2_stats(report, out_dir);
      files.insert(files.end(), stats.begin(), stats.end());
      return files;
    }
    case PlotKind::mir_by_dataset:
      return emit_fig3(report, out_dir);
    case PlotKind::mir_difference:
      return emit_fig4(report, out_dir);
    case PlotKind::runtime:
      return emit_fig5(report, out_dir);
  }
  throw ValidationError("unhandled plot kind");
}

std::vector<fs::path> emit_tolerance_plot(const ToleranceSweepTable& table,
                                          const fs::path& out_dir) {
  if (table.mean_mir_bits.empty()) {
    throw ValidationError("fig6 (MIR vs tolerance): empty sweep table");
  }
  std::ostringstream csv;
  csv << "tolerance,mean_mir_bits_per_sample";
  for (const auto& [name, v] : table.reference_mean_mir_bits) {
    csv << ",ref_" << name;
  }
  csv << '\n';
  double y_lo = std::numeric_limits<double>::infinity(), y_hi = -y_lo;
  for (const auto& [tol, mean] : table.mean_mir_bits) {
    csv << fmt(tol) << ',' << fmt(mean);
    y_lo = std::min(y_lo, mean);
    y_hi = std::max(y_hi, mean);
    for (const auto& [name, v] : table.reference_mean_mir_bits) {
      csv << ',' << fmt(v);
      y_lo = std::min(y_lo, v);
      y_hi = std::max(y_hi, v);
    }
    csv << '\n';
  }

  Svg svg("MIR vs stopping tolerance (" + table.algorithm_id + ")",
          table.mean_mir_bits.back().first, table.mean_mir_bits.front().first, y_lo, y_hi,
          /*log_x=*/true);
  std::vector<std::pair<double, double>> pts;
  for (const auto& [tol, mean] : table.mean_mir_bits) pts.emplace_back(tol, mean);
  svg.polyline(pts, kPalette[1]);
  for (const auto& [tol, mean] : table.mean_mir_bits) svg.circle(tol, mean, kPalette[1]);
  std::size_t i = 2;
  for (const auto& [name, v] : table.reference_mean_mir_bits) {
    svg.hline(v, color_of(i++), name);
  }
  svg.label_axes("stopping tolerance", "mean MIR (bits/sample)");
  return write_pair(out_dir, "fig6_mir_vs_tolerance", svg.str(), csv.str());
}

std::vector<fs::path> emit_runtime_plot(const TimingTable& table, const fs::path& out_dir) {
  if (table.rows.empty()) {
    throw ValidationError("fig5 (runtime): empty timing table");
  }
  std::ostringstream csv;
  csv << "algorithm,dataset,repetitions,mean_sec,std_sec,metrics_sec\n";
  std::vector<std::string> algos;
  std::vector<double> means;
  for (const auto& r : table.rows) {
    csv << r.algorithm << ',' << r.dataset << ',' << r.repetitions << ',' << fmt(r.mean_sec)
        << ',' << fmt(r.std_sec) << ',' << fmt(r.metrics_sec) << '\n';
    const auto it = std::find(algos.begin(), algos.end(), r.algorithm);
    if (it == algos.end()) {
      algos.push_back(r.algorithm);
      means.push_back(r.ok ? r.mean_sec : 0.0);
    } else if (r.ok) {
      means[static_cast<std::size_t>(it - algos.begin())] =
          0.5 * (means[static_cast<std::size_t>(it - algos.begin())] + r.mean_sec);
    }
  }
  double y_max = 1e-9;
  for (double m : means) y_max = std::max(y_max, m);
  Svg svg("Mean decomposition time (" + table.host + ")", 0.0,
          static_cast<double>(algos.size()), 0.0, y_max);
  for (std::size_t i = 0; i < algos.size(); ++i) {
    svg.bar(i + 0.15, i + 0.85, means[i], color_of(i));
    svg.annotate(static_cast<double>(i), means[i], algos[i]);
  }
  svg.label_axes("algorithm", "seconds");
  return write_pair(out_dir, "fig5_runtime", svg.str(), csv.str());
}

}  // namespace icabench
