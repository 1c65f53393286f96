// icabench command-line interface: synthetic data generation, decompositions,
// metrics, and the benchmark harness.

#include "icabench/bench.hpp"
#include "icabench/io.hpp"
#include "icabench/plots.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace icabench;

namespace {

json parse_json_file(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError("'" + path + "': " + e.what());
  }
}

json parse_json_arg(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("--params: ") + e.what());
  }
}

void write_json(const json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << "\n";
  } else {
    write_file_atomic(out, j.dump(2) + "\n");
  }
}

struct CommonFlags {
  int bins = 128;
  std::string binning = "equal-width";
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--bins", f.bins, "histogram bin count");
  app->add_option("--binning", f.binning, "equal-width|equal-occupancy");
  app->add_option("--seed", f.seed, "random seed");
  app->add_option("--threads", f.threads, "parallel grid cells (ICABENCH_THREADS overrides)");
  app->add_option("--out", f.out, "output file or directory");
}

Dataset load_any(const std::string& path, double srate) {
  return load_dataset(path, guess_format(path), srate);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ICA/BSS evaluation workbench"};
  app.require_subcommand(1);

  // synth ------------------------------------------------------------------
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic mixture dataset");
  struct {
    int n_sources = 4;
    long n_samples = 100000;
    std::vector<std::string> kinds{"laplacian"};
    std::string mixing = "random-general";
    double noise_db = 0.0;
    bool with_noise = false;
    double srate = 250.0;
    std::string id;
    std::string montage_out;
    int montage_n = 0;
  } sy;
  CommonFlags sy_common;
  synth_cmd->add_option("--sources", sy.n_sources, "number of sources");
  synth_cmd->add_option("--samples", sy.n_samples, "samples per source");
  synth_cmd->add_option("--kinds", sy.kinds,
                        "source kinds (laplacian|uniform|gaussian|logistic|bimodal)");
  synth_cmd->add_option("--mixing", sy.mixing, "random-general|random-orthogonal");
  synth_cmd->add_option("--noise-db", sy.noise_db, "additive noise SNR in dB")
      ->each([&](const std::string&) { sy.with_noise = true; });
  synth_cmd->add_option("--srate", sy.srate, "sampling rate in Hz");
  synth_cmd->add_option("--id", sy.id, "dataset id");
  synth_cmd->add_option("--montage-out", sy.montage_out,
                        "also write a spiral montage CSV here");
  synth_cmd->add_option("--montage-electrodes", sy.montage_n,
                        "electrode count for --montage-out (default: sources)");
  add_common(synth_cmd, sy_common);

  // decompose ---------------------------------------------------------------
  auto* dec_cmd = app.add_subcommand("decompose", "run one decomposition algorithm");
  struct {
    std::string data;
    std::string algo;
    std::string params_text = "{}";
    std::string params_file;
    double srate = 0.0;
  } de;
  CommonFlags de_common;
  dec_cmd->add_option("--data", de.data, "dataset path (.icab or .csv)")->required();
  dec_cmd->add_option("--algo", de.algo,
                      "pca|infomax|ext_infomax|fastica|picard|picard_ext|picard_o|amuse|"
                      "import|identity")
      ->required();
  dec_cmd->add_option("--params", de.params_text, "algorithm params as inline JSON");
  dec_cmd->add_option("--params-file", de.params_file, "algorithm params as a JSON file");
  dec_cmd->add_option("--srate", de.srate, "sampling rate for CSV datasets");
  add_common(dec_cmd, de_common);

  // metrics -----------------------------------------------------------------
  auto* met_cmd = app.add_subcommand("metrics", "compute a metric for a decomposition");
  met_cmd->require_subcommand(1);
  struct {
    std::string data;
    std::string unmixing;
    std::string montage;
    std::string headmodel;
    std::vector<std::string> exclude;
    double srate = 0.0;
  } me;
  CommonFlags me_common;
  auto* mir_cmd = met_cmd->add_subcommand("mir", "mutual information reduction");
  auto* pmi_cmd = met_cmd->add_subcommand("pmi", "pairwise MI matrix / remnant PMI");
  auto* dip_cmd = met_cmd->add_subcommand("dipolarity", "equivalent-dipole fit rate");
  for (auto* c : {mir_cmd, pmi_cmd, dip_cmd}) {
    c->add_option("--data", me.data, "dataset path")->required();
    c->add_option("--srate", me.srate, "sampling rate for CSV datasets");
    add_common(c, me_common);
  }
  mir_cmd->add_option("--unmixing", me.unmixing, "unmixing matrix file")->required();
  pmi_cmd->add_option("--unmixing", me.unmixing,
                      "unmixing matrix file (omit for channel PMI only)");
  dip_cmd->add_option("--unmixing", me.unmixing, "unmixing matrix file")->required();
  dip_cmd->add_option("--montage", me.montage, "montage CSV")->required();
  dip_cmd->add_option("--headmodel", me.headmodel, "head model JSON (default four-shell)");
  dip_cmd->add_option("--exclude", me.exclude, "electrode labels excluded from fitting");

  // bench -------------------------------------------------------------------
  auto* bench_cmd = app.add_subcommand("bench", "benchmark harness");
  bench_cmd->require_subcommand(1);
  struct {
    std::string config;
    std::string algorithm = "picard";
    std::vector<double> tolerances;
  } be;
  CommonFlags be_common;
  auto* run_cmd = bench_cmd->add_subcommand("run", "run the algorithm x dataset grid");
  auto* sweep_cmd =
      bench_cmd->add_subcommand("sweep-tolerance", "rerun one algorithm per tolerance");
  auto* time_cmd = bench_cmd->add_subcommand("time", "wall-clock timing table");
  for (auto* c : {run_cmd, sweep_cmd, time_cmd}) {
    c->add_option("--config", be.config, "benchmark config JSON")->required();
    add_common(c, be_common);
  }
  sweep_cmd->add_option("--algorithm", be.algorithm, "algorithm id to sweep");
  sweep_cmd->add_option("--tolerances", be.tolerances,
                        "descending stopping tolerances (default 1e-1..1e-8)");

  // report ------------------------------------------------------------------
  auto* report_cmd = app.add_subcommand("report", "emit plots from report files");
  struct {
    std::string report;
    std::string kind = "fig1";
  } re;
  CommonFlags re_common;
  auto* plot_cmd = report_cmd->add_subcommand("plot", "SVG + CSV for one figure kind");
  plot_cmd->add_option("--report", re.report, "bench/sweep/timing report JSON")->required();
  plot_cmd->add_option("--kind", re.kind, "fig1|fig2|fig3|fig4|fig5|fig6");
  add_common(plot_cmd, re_common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) {
      SynthSpec spec;
      spec.n_sources = sy.n_sources;
      spec.n_samples = sy.n_samples;
      spec.source_kinds.clear();
      for (const auto& k : sy.kinds) spec.source_kinds.push_back(source_kind_from_string(k));
      if (sy.mixing == "random-orthogonal") {
        spec.mixing = MixingKind::random_orthogonal;
      } else if (sy.mixing == "random-general") {
        spec.mixing = MixingKind::random_general;
      } else {
        throw ValidationError("--mixing must be random-general or random-orthogonal");
      }
      if (sy.with_noise) spec.noise_db = sy.noise_db;
      spec.seed = sy_common.seed;
      spec.srate = sy.srate;
      spec.id = sy.id;
      auto [ds, truth] = synth_dataset(spec);
      const std::string base = sy_common.out.empty() ? ds.id : sy_common.out;
      const fs::path payload = base + ".icab";
      save_dataset(ds, payload, DatasetFormat::icab);
      save_matrix_csv(truth.mixing, base + ".mixing.csv");
      std::cout << "wrote " << payload.string() << " (+.json) and " << base
                << ".mixing.csv\n";
      if (!sy.montage_out.empty()) {
        const int n_el = sy.montage_n > 0 ? sy.montage_n : sy.n_sources;
        save_montage_csv(make_spiral_montage(n_el, HeadModel{}), sy.montage_out);
        std::cout << "wrote " << sy.montage_out << "\n";
      }
      return 0;
    }

    if (*dec_cmd) {
      const Dataset ds = load_any(de.data, de.srate);
      AlgorithmSpec spec;
      spec.id = de.algo;
      spec.params = de.params_file.empty() ? parse_json_arg(de.params_text)
                                           : parse_json_file(de.params_file);
      const Decomposition dec = run_algorithm(spec, ds, de_common.seed);
      const std::string base =
          de_common.out.empty() ? ds.id + "." + de.algo : de_common.out;
      export_unmixing(dec.w, base + ".W.csv");
      json meta;
      meta["algorithm"] = dec.algorithm_id;
      meta["params_digest"] = dec.params_digest;
      meta["iterations"] = dec.iterations;
      meta["converged"] = dec.converged;
      meta["wall_time_sec"] = dec.wall_time_sec;
      if (!dec.warning.empty()) meta["warning"] = dec.warning;
      write_file_atomic(base + ".meta.json", meta.dump(2) + "\n");
      std::cout << "wrote " << base << ".W.csv and " << base << ".meta.json\n";
      return dec.converged ? 0 : 3;
    }

    if (*met_cmd) {
      const Dataset ds = load_any(me.data, me.srate);
      const Binning strategy = binning_from_string(me_common.binning);
      if (*mir_cmd) {
        const Decomposition dec = import_decomposition(me.unmixing, ds);
        const MIRReport r = mir(ds, dec.w, me_common.bins, strategy);
        json j;
        j["mir_bits_per_sample"] = r.bits_per_sample;
        j["mir_kbits_per_sec"] = r.kbits_per_sec;
        j["log_det_w_bits"] = r.log_det_w;
        j["sum_h_x_bits"] = r.sum_h_x;
        j["sum_h_y_bits"] = r.sum_h_y;
        j["bins"] = r.bins;
        j["strategy"] = to_string(r.strategy);
        j["dataset_id"] = r.dataset_id;
        j["rank_reduced"] = r.rank_reduced;
        j["mean_removed"] = r.mean_removed;
        write_json(j, me_common.out);
      } else if (*pmi_cmd) {
        if (me.unmixing.empty()) {
          const PMIMatrix m =
              pmi_matrix(remove_row_means(ds.data), me_common.bins, strategy);
          if (!me_common.out.empty() && me_common.out != "-" &&
              fs::path(me_common.out).extension() == ".csv") {
            write_file_atomic(me_common.out, pmi_matrix_to_csv(m));
          } else {
            write_json(json::parse(pmi_matrix_to_json(m)), me_common.out);
          }
        } else {
          const Decomposition dec = import_decomposition(me.unmixing, ds);
          const RemnantPMI r = remnant_pmi(ds, dec.w, me_common.bins, strategy);
          json j;
          j["channel_mean_pmi_bits"] = r.channel_mean_pmi;
          j["component_mean_pmi_bits"] = r.component_mean_pmi;
          j["percent"] = r.percent;
          j["bins"] = me_common.bins;
          j["strategy"] = to_string(strategy);
          write_json(j, me_common.out);
        }
      } else {
        const Decomposition dec = import_decomposition(me.unmixing, ds);
        Montage montage = load_montage_csv(me.montage);
        montage.exclude.insert(me.exclude.begin(), me.exclude.end());
        const HeadModel head =
            me.headmodel.empty() ? HeadModel{} : load_headmodel_json(me.headmodel);
        const DipolarityReport rep = dipolarity(dec, montage, head);
        json j;
        j["rv"] = rep.rv;
        j["thresholds"] = rep.thresholds;
        j["nd_percent"] = rep.nd_percent;
        j["failed_components"] = rep.failed_components;
        j["nd5_percent"] = rep.nd_at(0.05);
        write_json(j, me_common.out);
      }
      return 0;
    }

    if (*bench_cmd) {
      json cfg_json = parse_json_file(be.config);
      // CLI flags override matching config fields when given explicitly.
      if (be_common.out != "") cfg_json["out"] = be_common.out;
      if (run_cmd->count("--bins") || sweep_cmd->count("--bins") || time_cmd->count("--bins"))
        cfg_json["bins"] = be_common.bins;
      if (run_cmd->count("--binning") || sweep_cmd->count("--binning") ||
          time_cmd->count("--binning"))
        cfg_json["binning"] = be_common.binning;
      if (run_cmd->count("--seed") || sweep_cmd->count("--seed") || time_cmd->count("--seed"))
        cfg_json["seed"] = be_common.seed;
      if (run_cmd->count("--threads") || sweep_cmd->count("--threads") ||
          time_cmd->count("--threads"))
        cfg_json["threads"] = be_common.threads;
      const BenchConfig cfg = bench_config_from_json(cfg_json);

      if (*run_cmd) {
        const BenchReport report = run_benchmark(cfg);
        if (cfg.out_dir.empty()) {
          std::cout << report.to_json().dump(2) << "\n";
        } else {
          std::cout << "wrote " << (fs::path(cfg.out_dir) / "bench_report.json").string()
                    << "\n";
        }
        const int errors = report.error_count();
        if (errors > 0) {
          std::cerr << errors << " grid cell(s) failed\n";
          return 2;
        }
        return 0;
      }
      if (*sweep_cmd) {
        std::vector<double> tols = be.tolerances;
        if (tols.empty()) {
          tols = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
        }
        const ToleranceSweepTable table = tolerance_sweep(cfg, be.algorithm, tols);
        json j = table.to_json();
        j["kind"] = "tolerance_sweep";
        std::string out = cfg.out_dir.empty()
                              ? std::string{}
                              : (fs::path(cfg.out_dir) / "tolerance_sweep.json").string();
        if (!out.empty()) fs::create_directories(cfg.out_dir);
        write_json(j, out);
        int errors = 0;
        for (const auto& c : table.cells) {
          if (!c.ok) ++errors;
        }
        return errors > 0 ? 2 : 0;
      }
      // bench time
      const TimingTable table = time_algorithms(cfg);
      json j = table.to_json();
      j["kind"] = "timing";
      std::string out = cfg.out_dir.empty()
                            ? std::string{}
                            : (fs::path(cfg.out_dir) / "timing.json").string();
      if (!out.empty()) fs::create_directories(cfg.out_dir);
      write_json(j, out);
      int errors = 0;
      for (const auto& r : table.rows) {
        if (!r.ok) ++errors;
      }
      return errors > 0 ? 2 : 0;
    }

    if (*report_cmd) {
      const json j = parse_json_file(re.report);
      const fs::path out_dir = re_common.out.empty() ? "." : re_common.out;
      std::vector<fs::path> files;
      if (re.kind == "fig6") {
        if (j.value("kind", std::string{}) != "tolerance_sweep") {
          throw ValidationError("fig6 needs a tolerance sweep report file");
        }
        ToleranceSweepTable table;
        table.algorithm_id = j.at("algorithm").get<std::string>();
        table.tolerances = j.at("tolerances").get<std::vector<double>>();
        for (const auto& m : j.at("mean_mir_bits")) {
          table.mean_mir_bits.emplace_back(m.at("tolerance").get<double>(),
                                           m.at("mean_mir_bits").get<double>());
        }
        table.reference_mean_mir_bits =
            j.at("reference_mean_mir_bits").get<std::map<std::string, double>>();
        files = emit_tolerance_plot(table, out_dir);
      } else if (j.value("kind", std::string{}) == "timing") {
        TimingTable table;
        table.host = j.at("host").get<std::string>();
        for (const auto& r : j.at("rows")) {
          TimingRow row;
          row.algorithm = r.at("algorithm").get<std::string>();
          row.dataset = r.at("dataset").get<std::string>();
          row.repetitions = r.at("repetitions").get<int>();
          row.ok = r.at("ok").get<bool>();
          row.mean_sec = r.at("mean_sec").get<double>();
          row.std_sec = r.at("std_sec").get<double>();
          row.metrics_sec = r.at("metrics_sec").get<double>();
          table.rows.push_back(std::move(row));
        }
        files = emit_runtime_plot(table, out_dir);
      } else {
        const BenchReport report = bench_report_from_json(j);
        files = emit_plots(report, plot_kind_from_string(re.kind), out_dir);
      }
      for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
