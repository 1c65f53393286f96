#include "icabench/bench.hpp"

#include "icabench/io.hpp"
#include "icabench/plots.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace icabench;
namespace fs = std::filesystem;

namespace {

BenchConfig mini_config() {
  BenchConfig cfg;
  for (std::uint64_t seed : {1, 2}) {
    DatasetSpec d;
    d.synth.n_sources = 4;
    d.synth.n_samples = 20000;
    d.synth.source_kinds = {SourceKind::laplacian};
    d.synth.seed = seed;
    d.synth.id = "mix" + std::to_string(seed);
    cfg.datasets.push_back(std::move(d));
  }
  cfg.algorithms.push_back({"pca", nlohmann::json::object(), ""});
  cfg.algorithms.push_back({"picard", nlohmann::json{{"tol", 1e-5}}, ""});
  cfg.algorithms.push_back({"identity", nlohmann::json::object(), ""});
  cfg.metrics = {"mir", "pmi"};
  cfg.bins = 64;
  cfg.seed = 9;
  return cfg;
}

std::string results_fingerprint(const BenchReport& report) {
  nlohmann::json j = report.to_json();
  j.erase("timings");
  return j.dump();
}

/// Fabricated report with dipolarity numbers, for sweep/plot logic tests.
BenchReport fake_dipolar_report() {
  BenchReport report;
  report.dataset_ids = {"d1", "d2"};
  const std::vector<std::string> algos = {"alpha", "beta", "gamma"};
  const double mir_base[3] = {40.0, 42.0, 44.0};
  const double nd_base[3] = {5.0, 15.0, 25.0};
  std::vector<double> thresholds = default_nd_thresholds();
  for (int a = 0; a < 3; ++a) {
    AlgorithmSummary s;
    s.algorithm = algos[static_cast<std::size_t>(a)];
    std::vector<double> kb, nd, rp;
    for (int d = 0; d < 2; ++d) {
      CellResult cell;
      cell.algorithm = s.algorithm;
      cell.dataset = report.dataset_ids[static_cast<std::size_t>(d)];
      cell.ok = true;
      MIRReport m;
      m.kbits_per_sec = mir_base[a] + d;
      m.bits_per_sample = m.kbits_per_sec * 4.0;
      cell.mir = m;
      RemnantPMI r;
      r.percent = 90.0 - 10.0 * a + d;
      cell.remnant = r;
      DipolarityReport dip;
      dip.thresholds = thresholds;
      // rv values spread so ND at 5% grows with the algorithm's MIR.
      for (int c = 0; c < 10; ++c) {
        dip.rv.push_back(0.03 + 0.02 * c - 0.012 * a + 0.001 * d);
      }
      for (double t : thresholds) dip.nd_percent.push_back(dip.nd_at(t));
      cell.dip = dip;
      kb.push_back(m.kbits_per_sec);
      nd.push_back(dip.nd_at(0.05));
      rp.push_back(r.percent);
      report.cells.push_back(std::move(cell));
    }
    s.n_ok = 2;
    s.mir_kbits_mean = (kb[0] + kb[1]) / 2;
    s.mir_bits_mean = s.mir_kbits_mean * 4.0;
    s.mir_kbits_std = std::sqrt(0.5);
    s.nd5_mean = (nd[0] + nd[1]) / 2;
    s.nd5_std = std::abs(nd[0] - nd[1]) / std::sqrt(2.0);
    s.remnant_percent_mean = (rp[0] + rp[1]) / 2;
    s.remnant_percent_std = std::sqrt(0.5);
    report.summary.push_back(std::move(s));
  }
  report.mir_order_by_dataset["d1"] = {"gamma", "beta", "alpha"};
  report.mir_order_by_dataset["d2"] = {"gamma", "beta", "alpha"};
  report.mir_order_preserved = true;
  return report;
}

}  // namespace

TEST_CASE("benchmark grid: identity is the floor, ICA beats PCA") {
  const BenchConfig cfg = mini_config();
  const BenchReport report = run_benchmark(cfg);
  CHECK(report.error_count() == 0);

  for (const auto& id : report.dataset_ids) {
    const CellResult* identity = report.cell("identity", id);
    REQUIRE(identity);
    CHECK(identity->mir->bits_per_sample == 0.0);
    CHECK(identity->remnant->percent == 100.0);

    const CellResult* picard_cell = report.cell("picard", id);
    const CellResult* pca_cell = report.cell("pca", id);
    REQUIRE(picard_cell);
    REQUIRE(pca_cell);
    // A maximum-likelihood unmixing recovers strictly more MI than a
    // rotation on super-Gaussian mixtures.
    CHECK(picard_cell->mir->bits_per_sample > pca_cell->mir->bits_per_sample);
    CHECK(picard_cell->remnant->percent < pca_cell->remnant->percent);
  }
}

TEST_CASE("benchmark is deterministic: identical metric sections across reruns") {
  const BenchConfig cfg = mini_config();
  const BenchReport a = run_benchmark(cfg);
  const BenchReport b = run_benchmark(cfg);
  CHECK(results_fingerprint(a) == results_fingerprint(b));
}

TEST_CASE("thread count does not change metric values") {
  BenchConfig cfg = mini_config();
  const std::string serial = results_fingerprint(run_benchmark(cfg));
  cfg.threads = 4;
  const std::string parallel = results_fingerprint(run_benchmark(cfg));
  // The config echo includes the thread count; compare the results section.
  const auto results_of = [](const std::string& s) {
    auto j = nlohmann::json::parse(s);
    return j.at("results").dump();
  };
  CHECK(results_of(serial) == results_of(parallel));
}

TEST_CASE("summary means are recomputable from the cells") {
  const BenchReport report = run_benchmark(mini_config());
  for (const auto& s : report.summary) {
    double sum = 0.0;
    int n = 0;
    for (const auto& c : report.cells) {
      if (c.algorithm == s.algorithm && c.ok && c.mir) {
        sum += c.mir->bits_per_sample;
        ++n;
      }
    }
    REQUIRE(n == s.n_ok);
    CHECK(std::abs(s.mir_bits_mean - sum / n) < 1e-12);
  }
}

TEST_CASE("cell failures are isolated and counted") {
  BenchConfig cfg = mini_config();
  cfg.algorithms.push_back({"import", nlohmann::json{{"path", "/nonexistent.csv"}}, ""});
  const BenchReport report = run_benchmark(cfg);
  CHECK(report.error_count() == 2);  // one failed cell per dataset
  for (const auto& c : report.cells) {
    if (c.algorithm == "import") {
      CHECK_FALSE(c.ok);
      CHECK(!c.error.empty());
    } else {
      CHECK(c.ok);
    }
  }
}

TEST_CASE("config json round trip preserves every field") {
  BenchConfig cfg = mini_config();
  cfg.metrics = {"mir", "pmi", "dipolarity"};
  cfg.montage_path = "m.csv";
  cfg.exclude_labels = {"E01", "E02"};
  cfg.nd_thresholds = {0.05, 0.10};
  cfg.threads = 3;
  cfg.out_dir = "/tmp/x";
  const BenchConfig back = bench_config_from_json(bench_config_to_json(cfg));
  CHECK(bench_config_to_json(back) == bench_config_to_json(cfg));
}

TEST_CASE("bench report json round trips through the plot loader") {
  const BenchReport report = run_benchmark(mini_config());
  const BenchReport back = bench_report_from_json(report.to_json());
  CHECK(back.cells.size() == report.cells.size());
  CHECK(back.mir_order_preserved == report.mir_order_preserved);
  const CellResult* cell = back.cell("picard", "mix1");
  REQUIRE(cell);
  CHECK(cell->mir->bits_per_sample ==
        report.cell("picard", "mix1")->mir->bits_per_sample);
}

TEST_CASE("threshold sweep emits one row per threshold with regressions") {
  const BenchReport report = fake_dipolar_report();
  const std::vector<double> thresholds = {0.05, 0.10, 0.20};
  const auto rows = threshold_sweep(report, thresholds);
  REQUIRE(rows.size() == 3);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].threshold == thresholds[k]);
    REQUIRE(rows[k].nd_vs_mir.has_value());
    CHECK(rows[k].nd_vs_mir->r_squared >= 0.0);
    CHECK(rows[k].nd_vs_mir->r_squared <= 1.0);
    REQUIRE(rows[k].nd_vs_remnant.has_value());
  }
  // The fabricated data is built collinear-ish: ND grows with MIR.
  CHECK(rows[0].nd_vs_mir->slope > 0.0);
}

TEST_CASE("threshold sweep requires the dipolarity metric") {
  const BenchReport report = run_benchmark(mini_config());
  CHECK_THROWS_AS(threshold_sweep(report, {0.05}), ValidationError);
}

TEST_CASE("identical component maps flag the regression as degenerate") {
  BenchReport report = fake_dipolar_report();
  // Force every algorithm onto the same rv values: constant ND regressor.
  for (auto& c : report.cells) {
    DipolarityReport dip;
    dip.thresholds = default_nd_thresholds();
    for (int k = 0; k < 10; ++k) dip.rv.push_back(0.03 + 0.02 * k);
    for (double t : dip.thresholds) dip.nd_percent.push_back(dip.nd_at(t));
    c.dip = dip;
  }
  const auto rows = threshold_sweep(report, {0.05, 0.10});
  for (const auto& row : rows) {
    CHECK_FALSE(row.nd_vs_mir.has_value());
    CHECK_FALSE(row.nd_vs_remnant.has_value());
    CHECK(row.note.find("constant") != std::string::npos);
  }
}

TEST_CASE("fig2 stats panel emits R^2 and -log10(p) columns per threshold") {
  const fs::path dir = fs::temp_directory_path() / "icabench_plot_tests_stats";
  fs::remove_all(dir);
  const BenchReport report = fake_dipolar_report();
  emit_plots(report, PlotKind::nd_scatter, dir);
  std::ifstream csv(dir / "fig2_threshold_stats.csv");
  REQUIRE(csv.good());
  std::string line;
  std::getline(csv, line);
  CHECK(line == "threshold_rv,r2_mir,neg_log10_p_mir,r2_remnant,neg_log10_p_remnant");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == static_cast<int>(default_nd_thresholds().size()));
}

TEST_CASE("tolerance sweep shape, echo and reference lines") {
  BenchConfig cfg = mini_config();
  cfg.datasets.resize(1);
  const std::vector<double> tols = {1e-1, 1e-3};
  const ToleranceSweepTable table = tolerance_sweep(cfg, "picard", tols);
  CHECK(table.tolerances == tols);
  REQUIRE(table.cells.size() == 2);  // |tolerances| x |datasets|
  for (const auto& c : table.cells) {
    CHECK(c.ok);
  }
  CHECK(table.cells[0].tolerance == 1e-1);
  CHECK(table.cells[1].tolerance == 1e-3);
  // Tighter stopping cannot lose much MIR.
  CHECK(table.mean_mir_bits[1].second >= table.mean_mir_bits[0].second - 0.01);
  CHECK(table.reference_mean_mir_bits.count("pca") == 1);
  CHECK(table.reference_mean_mir_bits.count("identity") == 1);

  CHECK_THROWS_AS(tolerance_sweep(cfg, "picard", {1e-3, 1e-1}), ValidationError);
  CHECK_THROWS_AS(tolerance_sweep(cfg, "nope", tols), ValidationError);
}

TEST_CASE("timing table: repetitions, separate metric timing") {
  BenchConfig cfg = mini_config();
  cfg.datasets.resize(1);
  cfg.algorithms = {{"identity", nlohmann::json::object(), ""},
                    {"pca", nlohmann::json::object(), ""}};
  cfg.repetitions = 3;
  const TimingTable table = time_algorithms(cfg);
  REQUIRE(table.rows.size() == 2);
  for (const auto& row : table.rows) {
    CHECK(row.ok);
    CHECK(row.repetitions == 3);
    CHECK(row.samples_sec.size() == 3);
    CHECK(row.std_sec >= 0.0);
    CHECK(row.metrics_sec > 0.0);
  }
  // The identity decomposition is orders of magnitude cheaper than its
  // metric evaluation.
  CHECK(table.rows[0].mean_sec < table.rows[0].metrics_sec);
}

TEST_CASE("plots: csv payloads carry the exact plotted values") {
  const fs::path dir = fs::temp_directory_path() / "icabench_plot_tests";
  fs::remove_all(dir);
  const BenchReport report = fake_dipolar_report();

  SUBCASE("fig1 dipolarity curves") {
    const auto files = emit_plots(report, PlotKind::dipolarity_curves, dir);
    REQUIRE(files.size() == 2);
    std::ifstream csv(files[1]);
    std::string header;
    std::getline(csv, header);
    CHECK(header == "threshold_rv,alpha,beta,gamma");
    int rows = 0;
    for (std::string line; std::getline(csv, line);) ++rows;
    CHECK(rows == static_cast<int>(default_nd_thresholds().size()));
  }

  SUBCASE("fig2 scatter: one row per algorithm, 0.2-std ellipse radii") {
    const auto files = emit_plots(report, PlotKind::nd_scatter, dir);
    REQUIRE(files.size() == 6);  // svg+csv for both scatter axes + stats panel
    std::ifstream csv(dir / "fig2_nd_vs_mir.csv");
    std::string line;
    std::getline(csv, line);
    CHECK(line ==
          "algorithm,mir_kbits_per_sec_mean,mir_kbits_per_sec_std,nd5_mean,nd5_std,"
          "ellipse_rx,ellipse_ry");
    int rows = 0;
    while (std::getline(csv, line)) {
      ++rows;
      std::istringstream ss(line);
      std::string field;
      std::vector<std::string> fields;
      while (std::getline(ss, field, ',')) fields.push_back(field);
      REQUIRE(fields.size() == 7);
      CHECK(std::stod(fields[5]) == doctest::Approx(0.2 * std::stod(fields[2])));
      CHECK(std::stod(fields[6]) == doctest::Approx(0.2 * std::stod(fields[4])));
    }
    CHECK(rows == 3);
  }

  SUBCASE("fig4 difference from best is sorted and non-negative") {
    const auto files = emit_plots(report, PlotKind::mir_difference, dir);
    std::ifstream csv(files[1]);
    std::string line;
    std::getline(csv, line);
    double prev_mir = std::numeric_limits<double>::infinity();
    bool first = true;
    while (std::getline(csv, line)) {
      std::istringstream ss(line);
      std::string algo, mir_s, diff_s;
      std::getline(ss, algo, ',');
      std::getline(ss, mir_s, ',');
      std::getline(ss, diff_s, ',');
      const double mir_v = std::stod(mir_s);
      const double diff = std::stod(diff_s);
      CHECK(mir_v <= prev_mir);
      CHECK(diff >= 0.0);
      if (first) {
        CHECK(diff == 0.0);
        first = false;
      }
      prev_mir = mir_v;
    }
  }

  SUBCASE("fig3 carries the per-dataset ordering boolean") {
    const auto files = emit_plots(report, PlotKind::mir_by_dataset, dir);
    std::ifstream csv(files[1]);
    std::string line;
    std::getline(csv, line);
    CHECK(line == "dataset,algorithm,mir_kbits_per_sec,rank_in_dataset,order_matches_mean");
    int rows = 0;
    while (std::getline(csv, line)) {
      CHECK(line.find("true") != std::string::npos);
      ++rows;
    }
    CHECK(rows == 6);
  }

  SUBCASE("missing metrics name the figure") {
    const BenchReport plain = run_benchmark(mini_config());
    try {
      emit_plots(plain, PlotKind::dipolarity_curves, dir);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("fig1") != std::string::npos);
    }
  }
}

TEST_CASE("fig6 csv pairs tolerances with means and references") {
  ToleranceSweepTable table;
  table.algorithm_id = "picard";
  table.tolerances = {1e-1, 1e-2, 1e-3};
  for (double t : table.tolerances) {
    table.mean_mir_bits.emplace_back(t, 3.0 - t);
  }
  table.reference_mean_mir_bits["pca"] = 2.0;
  const fs::path dir = fs::temp_directory_path() / "icabench_plot_tests";
  const auto files = emit_tolerance_plot(table, dir);
  std::ifstream csv(files[1]);
  std::string line;
  std::getline(csv, line);
  CHECK(line == "tolerance,mean_mir_bits_per_sample,ref_pca");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 3);
}

TEST_CASE("end to end: dipolar mixtures give ICA components dipolar maps") {
  // Channels are raw forward projections of single dipoles, so a good
  // unmixing recovers component maps that a single dipole fits almost
  // perfectly, while the identity "decomposition" leaves spiky maps.
  const HeadModel head;
  const int n = 12;
  const Montage montage = make_spiral_montage(n, head);
  const ForwardModel fm(head, montage);

  Rng rng(1234);
  Matrix a_true(n, n);
  for (;;) {
    for (int c = 0; c < n; ++c) {
      Dipole d;
      do {
        d.position_mm =
            Eigen::Vector3d(rng.gaussian(), rng.gaussian(), rng.gaussian()) * 25.0;
      } while (d.position_mm.norm() > 0.6 * head.inner_radius() ||
               d.position_mm.z() < 0.0);
      d.moment = Eigen::Vector3d(rng.gaussian(), rng.gaussian(), rng.gaussian());
      a_true.col(c) = fm.leadfield(d.position_mm) * d.moment;
    }
    Eigen::JacobiSVD<Matrix> svd(a_true);
    if (svd.singularValues().maxCoeff() / svd.singularValues().minCoeff() < 1e4) break;
  }

  const fs::path dir = fs::temp_directory_path() / "icabench_e2e";
  fs::remove_all(dir);
  fs::create_directories(dir);
  save_montage_csv(montage, dir / "montage.csv");

  BenchConfig cfg;
  DatasetSpec d;
  d.synth.n_sources = n;
  d.synth.n_samples = 30000;
  d.synth.source_kinds = {SourceKind::laplacian};
  d.synth.mixing = MixingKind::explicit_matrix;
  d.synth.explicit_mixing = a_true;
  d.synth.seed = 5;
  d.synth.id = "scalp";
  cfg.datasets.push_back(std::move(d));
  cfg.algorithms.push_back({"picard", nlohmann::json{{"tol", 1e-6}}, ""});
  cfg.algorithms.push_back({"pca", nlohmann::json::object(), ""});
  cfg.algorithms.push_back({"identity", nlohmann::json::object(), ""});
  cfg.metrics = {"mir", "pmi", "dipolarity"};
  cfg.bins = 64;
  cfg.montage_path = (dir / "montage.csv").string();
  cfg.seed = 3;

  const BenchReport report = run_benchmark(cfg);
  REQUIRE(report.error_count() == 0);

  const CellResult* picard_cell = report.cell("picard", "scalp");
  const CellResult* pca_cell = report.cell("pca", "scalp");
  const CellResult* identity_cell = report.cell("identity", "scalp");
  REQUIRE(picard_cell);
  REQUIRE(pca_cell);
  REQUIRE(identity_cell);

  CHECK(picard_cell->dip->nd_at(0.05) == 100.0);
  CHECK(identity_cell->dip->nd_at(0.05) < picard_cell->dip->nd_at(0.05));
  CHECK(picard_cell->mir->bits_per_sample > pca_cell->mir->bits_per_sample);

  // The full figure set renders from this report.
  for (PlotKind kind : {PlotKind::dipolarity_curves, PlotKind::nd_scatter,
                        PlotKind::mir_by_dataset, PlotKind::mir_difference,
                        PlotKind::runtime}) {
    const auto files = emit_plots(report, kind, dir / "plots");
    for (const auto& f : files) CHECK(fs::file_size(f) > 0);
  }
}

TEST_CASE("ICABENCH_THREADS overrides the configured value") {
  setenv("ICABENCH_THREADS", "3", 1);
  CHECK(effective_threads(1) == 3);
  unsetenv("ICABENCH_THREADS");
  CHECK(effective_threads(2) == 2);
}
