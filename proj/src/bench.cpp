#include "icabench/bench.hpp"

#include "icabench/fastica.hpp"
#include "icabench/infomax.hpp"
#include "icabench/io.hpp"
#include "icabench/picard.hpp"

#include <sys/utsname.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <thread>

namespace icabench {

using nlohmann::json;

namespace {

double json_get(const json& p, const char* key, double dflt) {
  return p.contains(key) ? p.at(key).get<double>() : dflt;
}
int json_get(const json& p, const char* key, int dflt) {
  return p.contains(key) ? p.at(key).get<int>() : dflt;
}
bool json_get(const json& p, const char* key, bool dflt) {
  return p.contains(key) ? p.at(key).get<bool>() : dflt;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd ms;
  if (v.empty()) return ms;
  double sum = 0.0;
  for (double x : v) sum += x;
  ms.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - ms.mean) * (x - ms.mean);
    ms.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return ms;
}

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::string host_descriptor() {
  utsname u{};
  if (uname(&u) == 0) {
    return std::string(u.sysname) + " " + u.release + " " + u.machine + ", " +
           std::to_string(std::thread::hardware_concurrency()) + " cores";
  }
  return "unknown";
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ull;
  h ^= a + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  h ^= b + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h;
}

}  // namespace

int effective_threads(int configured) {
  if (const char* env = std::getenv("ICABENCH_THREADS")) {
    const int t = std::atoi(env);
    if (t >= 1) return t;
  }
  return std::max(1, configured);
}

// ---------------------------------------------------------------------------
// Config serialization

namespace {

SynthSpec synth_spec_from_json(const json& j) {
  SynthSpec s;
  s.n_sources = j.at("n_sources").get<int>();
  s.n_samples = j.at("n_samples").get<long>();
  if (j.contains("source_kinds")) {
    s.source_kinds.clear();
    for (const auto& k : j.at("source_kinds")) {
      s.source_kinds.push_back(source_kind_from_string(k.get<std::string>()));
    }
  }
  if (j.contains("mixing")) {
    const auto& m = j.at("mixing");
    if (m.is_string()) {
      const std::string kind = m.get<std::string>();
      if (kind == "random-orthogonal") {
        s.mixing = MixingKind::random_orthogonal;
      } else if (kind == "random-general") {
        s.mixing = MixingKind::random_general;
      } else {
        throw ValidationError("synth spec: unknown mixing kind '" + kind + "'");
      }
    } else {
      s.mixing = MixingKind::explicit_matrix;
      const auto rows = m.get<std::vector<std::vector<double>>>();
      s.explicit_mixing.resize(static_cast<Eigen::Index>(rows.size()),
                               rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < rows[i].size(); ++c) {
          s.explicit_mixing(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
              rows[i][c];
        }
      }
    }
  }
  if (j.contains("noise_db") && !j.at("noise_db").is_null()) {
    s.noise_db = j.at("noise_db").get<double>();
  }
  s.seed = j.value("seed", std::uint64_t{0});
  s.srate = j.value("srate", 250.0);
  s.id = j.value("id", std::string{});
  return s;
}

json synth_spec_to_json(const SynthSpec& s) {
  json j;
  j["n_sources"] = s.n_sources;
  j["n_samples"] = s.n_samples;
  auto kinds = json::array();
  for (auto k : s.source_kinds) kinds.push_back(to_string(k));
  j["source_kinds"] = std::move(kinds);
  switch (s.mixing) {
    case MixingKind::random_orthogonal: j["mixing"] = "random-orthogonal"; break;
    case MixingKind::random_general: j["mixing"] = "random-general"; break;
    case MixingKind::explicit_matrix: {
      auto rows = json::array();
      for (Eigen::Index i = 0; i < s.explicit_mixing.rows(); ++i) {
        auto row = json::array();
        for (Eigen::Index c = 0; c < s.explicit_mixing.cols(); ++c) {
          row.push_back(s.explicit_mixing(i, c));
        }
        rows.push_back(std::move(row));
      }
      j["mixing"] = std::move(rows);
      break;
    }
  }
  if (s.noise_db) {
    j["noise_db"] = *s.noise_db;
  } else {
    j["noise_db"] = nullptr;
  }
  j["seed"] = s.seed;
  j["srate"] = s.srate;
  j["id"] = s.id;
  return j;
}

}  // namespace

void BenchConfig::validate() const {
  if (datasets.empty()) throw ValidationError("bench config: no datasets");
  if (algorithms.empty()) throw ValidationError("bench config: no algorithms");
  if (repetitions < 1) throw ValidationError("bench config: repetitions must be >= 1");
  if (bins < 2) throw ValidationError("bench config: bins must be >= 2");
  for (const auto& m : metrics) {
    if (m != "mir" && m != "pmi" && m != "dipolarity") {
      throw ValidationError("bench config: unknown metric '" + m + "'");
    }
  }
  if (metrics.empty()) throw ValidationError("bench config: no metrics selected");
  if (metrics.count("dipolarity") && montage_path.empty()) {
    throw ValidationError("bench config: dipolarity metric needs a montage file");
  }
  for (const auto& d : datasets) {
    if (d.is_synth()) d.synth.validate();
  }
  std::set<std::string> labels;
  for (const auto& a : algorithms) {
    if (a.id.empty()) throw ValidationError("bench config: algorithm without id");
    if (!labels.insert(a.display()).second) {
      throw ValidationError("bench config: duplicate algorithm label '" + a.display() +
                            "' (set distinct labels)");
    }
  }
}

BenchConfig bench_config_from_json(const json& j) {
  BenchConfig cfg;
  cfg.datasets.clear();
  for (const auto& d : j.at("datasets")) {
    DatasetSpec spec;
    if (d.contains("path")) {
      spec.path = d.at("path").get<std::string>();
    } else if (d.contains("synth")) {
      spec.synth = synth_spec_from_json(d.at("synth"));
    } else {
      throw ValidationError("bench config: dataset entry needs 'path' or 'synth'");
    }
    cfg.datasets.push_back(std::move(spec));
  }
  cfg.algorithms.clear();
  for (const auto& a : j.at("algorithms")) {
    AlgorithmSpec spec;
    spec.id = a.at("id").get<std::string>();
    if (a.contains("params")) spec.params = a.at("params");
    spec.label = a.value("label", std::string{});
    cfg.algorithms.push_back(std::move(spec));
  }
  if (j.contains("metrics")) {
    cfg.metrics.clear();
    for (const auto& m : j.at("metrics")) cfg.metrics.insert(m.get<std::string>());
  }
  cfg.bins = j.value("bins", 128);
  cfg.binning = binning_from_string(j.value("binning", std::string{"equal-width"}));
  cfg.montage_path = j.value("montage", std::string{});
  cfg.headmodel_path = j.value("headmodel", std::string{});
  if (j.contains("exclude_labels")) {
    cfg.exclude_labels = j.at("exclude_labels").get<std::vector<std::string>>();
  }
  if (j.contains("nd_thresholds")) {
    cfg.nd_thresholds = j.at("nd_thresholds").get<std::vector<double>>();
  }
  cfg.repetitions = j.value("repetitions", 1);
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.threads = j.value("threads", 1);
  cfg.out_dir = j.value("out", std::string{});
  cfg.csv_srate = j.value("csv_srate", 0.0);
  cfg.validate();
  return cfg;
}

json bench_config_to_json(const BenchConfig& cfg) {
  json j;
  auto datasets = json::array();
  for (const auto& d : cfg.datasets) {
    json e;
    if (d.is_synth()) {
      e["synth"] = synth_spec_to_json(d.synth);
    } else {
      e["path"] = d.path;
    }
    datasets.push_back(std::move(e));
  }
  j["datasets"] = std::move(datasets);
  auto algorithms = json::array();
  for (const auto& a : cfg.algorithms) {
    json e;
    e["id"] = a.id;
    e["params"] = a.params;
    if (!a.label.empty()) e["label"] = a.label;
    algorithms.push_back(std::move(e));
  }
  j["algorithms"] = std::move(algorithms);
  j["metrics"] = cfg.metrics;
  j["bins"] = cfg.bins;
  j["binning"] = to_string(cfg.binning);
  j["montage"] = cfg.montage_path;
  j["headmodel"] = cfg.headmodel_path;
  j["exclude_labels"] = cfg.exclude_labels;
  j["nd_thresholds"] = cfg.nd_thresholds;
  j["repetitions"] = cfg.repetitions;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["out"] = cfg.out_dir;
  j["csv_srate"] = cfg.csv_srate;
  return j;
}

// ---------------------------------------------------------------------------
// Algorithm dispatch

Dataset resolve_dataset(const DatasetSpec& spec, double csv_srate) {
  if (spec.is_synth()) {
    return synth_dataset(spec.synth).first;
  }
  const auto format = guess_format(spec.path);
  return load_dataset(spec.path, format, csv_srate);
}

Decomposition run_algorithm(const AlgorithmSpec& spec, const Dataset& ds,
                            std::uint64_t fallback_seed) {
  const json& p = spec.params;
  const std::uint64_t seed =
      p.contains("seed") ? p.at("seed").get<std::uint64_t>() : fallback_seed;

  if (spec.id == "pca") {
    return pca(ds, json_get(p, "k", -1));
  }
  if (spec.id == "infomax" || spec.id == "ext_infomax") {
    InfomaxParams pm;
    pm.extended = spec.id == "ext_infomax" || json_get(p, "extended", false);
    pm.lrate = json_get(p, "lrate", 0.0);
    pm.tol = json_get(p, "tol", pm.tol);
    pm.max_iter = json_get(p, "max_iter", pm.max_iter);
    pm.block = json_get(p, "block", 0);
    pm.random_init = json_get(p, "random_init", false);
    pm.seed = seed;
    return infomax(ds, pm);
  }
  if (spec.id == "fastica") {
    FastICAParams pm;
    pm.tol = json_get(p, "tol", pm.tol);
    pm.max_iter = json_get(p, "max_iter", pm.max_iter);
    pm.random_init = json_get(p, "random_init", false);
    pm.seed = seed;
    return fastica(ds, pm);
  }
  if (spec.id == "picard" || spec.id == "picard_ext" || spec.id == "picard_o") {
    PicardParams pm;
    pm.extended = spec.id == "picard_ext" || json_get(p, "extended", false);
    pm.orthogonal = spec.id == "picard_o" || json_get(p, "orthogonal", false);
    pm.memory = json_get(p, "memory", pm.memory);
    pm.tol = json_get(p, "tol", pm.tol);
    pm.max_iter = json_get(p, "max_iter", pm.max_iter);
    pm.ls_max_backtracks = json_get(p, "ls_max_backtracks", pm.ls_max_backtracks);
    pm.lambda_min = json_get(p, "lambda_min", pm.lambda_min);
    pm.random_init = json_get(p, "random_init", false);
    pm.seed = seed;
    return picard(ds, pm);
  }
  if (spec.id == "amuse") {
    AmuseParams pm;
    pm.lag = json_get(p, "lag", 1);
    return amuse(ds, pm);
  }
  if (spec.id == "import") {
    if (!p.contains("path")) {
      throw ValidationError("import algorithm needs params.path");
    }
    return import_decomposition(p.at("path").get<std::string>(), ds);
  }
  if (spec.id == "identity") {
    Decomposition dec;
    dec.algorithm_id = "identity";
    dec.w = Matrix::Identity(ds.channels(), ds.channels());
    finalize_decomposition(dec, "identity");
    return dec;
  }
  throw ValidationError("unknown algorithm id '" + spec.id + "'");
}

// ---------------------------------------------------------------------------
// Benchmark grid

namespace {

struct DatasetContext {
  Dataset ds;
  double sum_h_x = 0.0;          // cached channel entropies
  double channel_pmi_mean = 0.0; // cached channel PMI (pmi metric only)
};

struct MetricStack {
  bool want_mir = false, want_pmi = false, want_dip = false;
  int bins = 128;
  Binning binning = Binning::equal_width;
  std::optional<Montage> montage;
  HeadModel head;
  std::vector<double> nd_thresholds;
};

void evaluate_cell(CellResult& cell, const DatasetContext& ctx, const AlgorithmSpec& spec,
                   const MetricStack& ms, std::uint64_t cell_seed) {
  const auto t0 = std::chrono::steady_clock::now();
  Decomposition dec = run_algorithm(spec, ctx.ds, cell_seed);
  const auto t1 = std::chrono::steady_clock::now();
  cell.decompose_sec = std::chrono::duration<double>(t1 - t0).count();
  cell.iterations = dec.iterations;
  cell.converged = dec.converged;

  if (ms.want_mir) {
    MIRReport r = mir(ctx.ds, dec.w, ms.bins, ms.binning, ctx.sum_h_x);
    r.algorithm_id = spec.display();
    cell.mir = std::move(r);
  }
  if (ms.want_pmi) {
    const Matrix y = dec.w * remove_row_means(ctx.ds.data);
    RemnantPMI r;
    r.channel_mean_pmi = ctx.channel_pmi_mean;
    r.component_mean_pmi = pmi_matrix(y, ms.bins, ms.binning).mean_all_elements();
    if (!(r.channel_mean_pmi > 0.0)) {
      throw NumericalError("channel mean PMI is zero; remnant percentage undefined");
    }
    r.percent = 100.0 * r.component_mean_pmi / r.channel_mean_pmi;
    cell.remnant = r;
  }
  if (ms.want_dip) {
    cell.dip = dipolarity(dec, *ms.montage, ms.head, ms.nd_thresholds);
  }
  cell.metrics_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
  cell.ok = true;
}

}  // namespace

BenchReport run_benchmark(const BenchConfig& cfg) {
  cfg.validate();

  MetricStack ms;
  ms.want_mir = cfg.metrics.count("mir") > 0;
  ms.want_pmi = cfg.metrics.count("pmi") > 0;
  ms.want_dip = cfg.metrics.count("dipolarity") > 0;
  ms.bins = cfg.bins;
  ms.binning = cfg.binning;
  ms.nd_thresholds = cfg.nd_thresholds;
  if (ms.want_dip) {
    Montage m = load_montage_csv(cfg.montage_path);
    m.exclude.insert(cfg.exclude_labels.begin(), cfg.exclude_labels.end());
    ms.montage = std::move(m);
    ms.head = cfg.headmodel_path.empty() ? HeadModel{}
                                         : load_headmodel_json(cfg.headmodel_path);
  }

  // Shared per-dataset work: load/generate, channel entropies, channel PMI.
  std::vector<DatasetContext> contexts;
  contexts.reserve(cfg.datasets.size());
  for (const auto& dspec : cfg.datasets) {
    DatasetContext ctx;
    ctx.ds = resolve_dataset(dspec, cfg.csv_srate);
    if (ms.want_mir) {
      ctx.sum_h_x = channel_entropy_sum(ctx.ds, cfg.bins, cfg.binning);
    }
    if (ms.want_pmi) {
      ctx.channel_pmi_mean =
          pmi_matrix(remove_row_means(ctx.ds.data), cfg.bins, cfg.binning)
              .mean_all_elements();
    }
    contexts.push_back(std::move(ctx));
  }

  BenchReport report;
  report.config = cfg;
  report.threads_used = effective_threads(cfg.threads);
  report.host = host_descriptor();
  report.created_utc = utc_now();
  for (const auto& ctx : contexts) {
    report.dataset_ids.push_back(ctx.ds.id);
  }

  const std::size_t n_cells = cfg.algorithms.size() * contexts.size();
  report.cells.resize(n_cells);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= n_cells) break;
      const std::size_t ai = k / contexts.size();
      const std::size_t di = k % contexts.size();
      CellResult& cell = report.cells[k];
      cell.algorithm = cfg.algorithms[ai].display();
      cell.dataset = contexts[di].ds.id;
      try {
        evaluate_cell(cell, contexts[di], cfg.algorithms[ai], ms,
                      mix_seed(cfg.seed, ai, di));
      } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < report.threads_used; ++t) {
    pool.emplace_back(worker);
  }
  worker();
  for (auto& t : pool) t.join();

  // Per-algorithm summaries across datasets.
  for (const auto& aspec : cfg.algorithms) {
    AlgorithmSummary s;
    s.algorithm = aspec.display();
    std::vector<double> bits, kbits, remnant, nd5, dsec;
    for (const auto& cell : report.cells) {
      if (cell.algorithm != s.algorithm || !cell.ok) continue;
      ++s.n_ok;
      if (cell.mir) {
        bits.push_back(cell.mir->bits_per_sample);
        kbits.push_back(cell.mir->kbits_per_sec);
      }
      if (cell.remnant) remnant.push_back(cell.remnant->percent);
      if (cell.dip) nd5.push_back(cell.dip->nd_at(0.05));
      dsec.push_back(cell.decompose_sec);
    }
    auto fill = [](const std::vector<double>& v, double& mean, double& sd) {
      const MeanStd st = mean_std(v);
      mean = st.mean;
      sd = st.std;
    };
    fill(bits, s.mir_bits_mean, s.mir_bits_std);
    fill(kbits, s.mir_kbits_mean, s.mir_kbits_std);
    fill(remnant, s.remnant_percent_mean, s.remnant_percent_std);
    fill(nd5, s.nd5_mean, s.nd5_std);
    s.decompose_sec_mean = mean_std(dsec).mean;
    report.summary.push_back(std::move(s));
  }

  // MIR ordering per dataset, and whether the mean ordering is preserved.
  if (ms.want_mir) {
    auto order_of = [&](const std::vector<std::pair<double, std::string>>& scored) {
      auto sorted = scored;
      std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        return a.first > b.first;
      });
      std::vector<std::string> names;
      for (const auto& [v, name] : sorted) names.push_back(name);
      return names;
    };
    std::vector<std::pair<double, std::string>> mean_scored;
    for (const auto& s : report.summary) {
      mean_scored.emplace_back(s.mir_bits_mean, s.algorithm);
    }
    const auto mean_order = order_of(mean_scored);
    report.mir_order_preserved = true;
    for (const auto& id : report.dataset_ids) {
      std::vector<std::pair<double, std::string>> scored;
      bool complete = true;
      for (const auto& cell : report.cells) {
        if (cell.dataset != id) continue;
        if (!cell.ok || !cell.mir) {
          complete = false;
          continue;
        }
        scored.emplace_back(cell.mir->bits_per_sample, cell.algorithm);
      }
      const auto order = order_of(scored);
      report.mir_order_by_dataset[id] = order;
      if (!complete || order != mean_order) {
        report.mir_order_preserved = false;
      }
    }
  }

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    write_file_atomic(std::filesystem::path(cfg.out_dir) / "bench_report.json",
                      report.to_json().dump(2) + "\n");
  }
  return report;
}

int BenchReport::error_count() const {
  int n = 0;
  for (const auto& c : cells) {
    if (!c.ok) ++n;
  }
  return n;
}

const CellResult* BenchReport::cell(const std::string& algorithm,
                                    const std::string& dataset) const {
  for (const auto& c : cells) {
    if (c.algorithm == algorithm && c.dataset == dataset) return &c;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Report serialization

namespace {

json mir_to_json(const MIRReport& r) {
  json j;
  j["bits_per_sample"] = r.bits_per_sample;
  j["kbits_per_sec"] = r.kbits_per_sec;
  j["log_det_w_bits"] = r.log_det_w;
  j["sum_h_x_bits"] = r.sum_h_x;
  j["sum_h_y_bits"] = r.sum_h_y;
  j["rank_reduced"] = r.rank_reduced;
  return j;
}

MIRReport mir_from_json(const json& j) {
  MIRReport r;
  r.bits_per_sample = j.at("bits_per_sample").get<double>();
  r.kbits_per_sec = j.at("kbits_per_sec").get<double>();
  r.log_det_w = j.at("log_det_w_bits").get<double>();
  r.sum_h_x = j.at("sum_h_x_bits").get<double>();
  r.sum_h_y = j.at("sum_h_y_bits").get<double>();
  r.rank_reduced = j.value("rank_reduced", false);
  return r;
}

}  // namespace

json BenchReport::to_json() const {
  json j;
  j["config"] = bench_config_to_json(config);

  json prov;
  prov["seed"] = config.seed;
  prov["bins"] = config.bins;
  prov["binning"] = to_string(config.binning);
  prov["threads"] = threads_used;
  prov["mean_removed"] = true;
  j["provenance"] = std::move(prov);

  json results;
  results["datasets"] = dataset_ids;
  json cell_map;
  json timing_cells;
  for (const auto& c : cells) {
    const std::string key = c.algorithm + "::" + c.dataset;
    json e;
    e["ok"] = c.ok;
    if (!c.error.empty()) e["error"] = c.error;
    if (c.mir) e["mir"] = mir_to_json(*c.mir);
    if (c.remnant) {
      json r;
      r["channel_mean_pmi_bits"] = c.remnant->channel_mean_pmi;
      r["component_mean_pmi_bits"] = c.remnant->component_mean_pmi;
      r["percent"] = c.remnant->percent;
      e["remnant_pmi"] = std::move(r);
    }
    if (c.dip) {
      json d;
      d["rv"] = c.dip->rv;
      d["thresholds"] = c.dip->thresholds;
      d["nd_percent"] = c.dip->nd_percent;
      d["failed_components"] = c.dip->failed_components;
      e["dipolarity"] = std::move(d);
    }
    e["iterations"] = c.iterations;
    e["converged"] = c.converged;
    cell_map[key] = std::move(e);

    json t;
    t["decompose_sec"] = c.decompose_sec;
    t["metrics_sec"] = c.metrics_sec;
    timing_cells[key] = std::move(t);
  }
  results["cells"] = std::move(cell_map);

  json summaries;
  for (const auto& s : summary) {
    json e;
    e["n_ok"] = s.n_ok;
    e["mir_bits_mean"] = s.mir_bits_mean;
    e["mir_bits_std"] = s.mir_bits_std;
    e["mir_kbits_mean"] = s.mir_kbits_mean;
    e["mir_kbits_std"] = s.mir_kbits_std;
    e["remnant_percent_mean"] = s.remnant_percent_mean;
    e["remnant_percent_std"] = s.remnant_percent_std;
    e["nd5_mean"] = s.nd5_mean;
    e["nd5_std"] = s.nd5_std;
    summaries[s.algorithm] = std::move(e);
  }
  results["summary"] = std::move(summaries);
  results["mir_order_by_dataset"] = mir_order_by_dataset;
  results["mir_order_preserved"] = mir_order_preserved;
  j["results"] = std::move(results);

  json timings;
  timings["host"] = host;
  timings["created_utc"] = created_utc;
  timings["cells"] = std::move(timing_cells);
  for (const auto& s : summary) {
    timings["decompose_sec_mean"][s.algorithm] = s.decompose_sec_mean;
  }
  j["timings"] = std::move(timings);
  return j;
}

BenchReport bench_report_from_json(const json& j) {
  BenchReport r;
  r.config = bench_config_from_json(j.at("config"));
  r.dataset_ids = j.at("results").at("datasets").get<std::vector<std::string>>();
  const auto& cells = j.at("results").at("cells");
  for (auto it = cells.begin(); it != cells.end(); ++it) {
    CellResult c;
    const std::string& key = it.key();
    const auto sep = key.find("::");
    c.algorithm = key.substr(0, sep);
    c.dataset = key.substr(sep + 2);
    const json& e = it.value();
    c.ok = e.at("ok").get<bool>();
    c.error = e.value("error", std::string{});
    if (e.contains("mir")) c.mir = mir_from_json(e.at("mir"));
    if (e.contains("remnant_pmi")) {
      RemnantPMI rp;
      rp.channel_mean_pmi = e.at("remnant_pmi").at("channel_mean_pmi_bits").get<double>();
      rp.component_mean_pmi =
          e.at("remnant_pmi").at("component_mean_pmi_bits").get<double>();
      rp.percent = e.at("remnant_pmi").at("percent").get<double>();
      c.remnant = rp;
    }
    if (e.contains("dipolarity")) {
      DipolarityReport d;
      d.rv = e.at("dipolarity").at("rv").get<std::vector<double>>();
      d.thresholds = e.at("dipolarity").at("thresholds").get<std::vector<double>>();
      d.nd_percent = e.at("dipolarity").at("nd_percent").get<std::vector<double>>();
      d.failed_components =
          e.at("dipolarity").at("failed_components").get<std::vector<int>>();
      c.dip = std::move(d);
    }
    c.iterations = e.value("iterations", 0);
    c.converged = e.value("converged", false);
    r.cells.push_back(std::move(c));
  }
  const auto& summaries = j.at("results").at("summary");
  for (auto it = summaries.begin(); it != summaries.end(); ++it) {
    AlgorithmSummary s;
    s.algorithm = it.key();
    const json& e = it.value();
    s.n_ok = e.at("n_ok").get<int>();
    s.mir_bits_mean = e.at("mir_bits_mean").get<double>();
    s.mir_bits_std = e.at("mir_bits_std").get<double>();
    s.mir_kbits_mean = e.at("mir_kbits_mean").get<double>();
    s.mir_kbits_std = e.at("mir_kbits_std").get<double>();
    s.remnant_percent_mean = e.at("remnant_percent_mean").get<double>();
    s.remnant_percent_std = e.at("remnant_percent_std").get<double>();
    s.nd5_mean = e.at("nd5_mean").get<double>();
    s.nd5_std = e.at("nd5_std").get<double>();
    r.summary.push_back(std::move(s));
  }
  r.mir_order_by_dataset = j.at("results")
                               .at("mir_order_by_dataset")
                               .get<std::map<std::string, std::vector<std::string>>>();
  r.mir_order_preserved = j.at("results").at("mir_order_preserved").get<bool>();
  return r;
}

// ---------------------------------------------------------------------------
// Sweeps and timing

std::vector<ThresholdSweepRow> threshold_sweep(const BenchReport& report,
                                               const std::vector<double>& thresholds) {
  bool any_dip = false;
  for (const auto& c : report.cells) {
    if (c.dip) any_dip = true;
  }
  if (!any_dip) {
    throw ValidationError("threshold sweep: report carries no dipolarity metric");
  }

  std::vector<ThresholdSweepRow> rows;
  for (double t : thresholds) {
    ThresholdSweepRow row;
    row.threshold = t;
    std::vector<double> mir_means, remnant_means, nd_means;
    for (const auto& s : report.summary) {
      std::vector<double> nd, mirv, rem;
      for (const auto& c : report.cells) {
        if (c.algorithm != s.algorithm || !c.ok || !c.dip) continue;
        nd.push_back(c.dip->nd_at(t));
        if (c.mir) mirv.push_back(c.mir->kbits_per_sec);
        if (c.remnant) rem.push_back(c.remnant->percent);
      }
      if (nd.empty()) continue;
      nd_means.push_back(mean_std(nd).mean);
      mir_means.push_back(mirv.empty() ? std::numeric_limits<double>::quiet_NaN()
                                       : mean_std(mirv).mean);
      remnant_means.push_back(rem.empty() ? std::numeric_limits<double>::quiet_NaN()
                                          : mean_std(rem).mean);
    }
    auto try_regress = [&](const std::vector<double>& xs,
                           const std::vector<double>& ys) -> std::optional<RegressionResult> {
      Vector x(static_cast<Eigen::Index>(xs.size()));
      Vector y(static_cast<Eigen::Index>(ys.size()));
      for (std::size_t i = 0; i < xs.size(); ++i) {
        x[static_cast<Eigen::Index>(i)] = xs[i];
        y[static_cast<Eigen::Index>(i)] = ys[i];
      }
      try {
        return regress(x, y);
      } catch (const Error& e) {
        row.note = e.what();
        return std::nullopt;
      }
    };
    // ND%(t) is the regressor, so identical component maps across algorithms
    // surface as a degenerate regression rather than a silent fit.
    row.nd_vs_mir = try_regress(nd_means, mir_means);
    row.nd_vs_remnant = try_regress(nd_means, remnant_means);
    rows.push_back(std::move(row));
  }
  return rows;
}

ToleranceSweepTable tolerance_sweep(const BenchConfig& cfg, const std::string& algorithm_id,
                                    const std::vector<double>& tolerances) {
  cfg.validate();
  if (tolerances.empty()) {
    throw ValidationError("tolerance sweep: no tolerances");
  }
  for (std::size_t i = 0; i < tolerances.size(); ++i) {
    if (!(tolerances[i] > 0.0)) {
      throw ValidationError("tolerance sweep: tolerances must be positive");
    }
    if (i > 0 && !(tolerances[i] < tolerances[i - 1])) {
      throw ValidationError("tolerance sweep: tolerances must be strictly descending");
    }
  }
  const AlgorithmSpec* target = nullptr;
  for (const auto& a : cfg.algorithms) {
    if (a.id == algorithm_id || a.display() == algorithm_id) target = &a;
  }
  if (!target) {
    throw ValidationError("tolerance sweep: algorithm '" + algorithm_id +
                          "' is not in the config");
  }

  std::vector<Dataset> datasets;
  std::vector<double> sum_h_x;
  for (const auto& d : cfg.datasets) {
    datasets.push_back(resolve_dataset(d, cfg.csv_srate));
    sum_h_x.push_back(channel_entropy_sum(datasets.back(), cfg.bins, cfg.binning));
  }

  ToleranceSweepTable table;
  table.algorithm_id = target->display();
  table.tolerances = tolerances;
  for (std::size_t ti = 0; ti < tolerances.size(); ++ti) {
    std::vector<double> ok_values;
    for (std::size_t di = 0; di < datasets.size(); ++di) {
      ToleranceSweepCell cell;
      cell.tolerance = tolerances[ti];
      cell.dataset = datasets[di].id;
      try {
        AlgorithmSpec spec = *target;
        spec.params["tol"] = tolerances[ti];
        const auto t0 = std::chrono::steady_clock::now();
        Decomposition dec = run_algorithm(spec, datasets[di], mix_seed(cfg.seed, ti, di));
        cell.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        cell.iterations = dec.iterations;
        const MIRReport r = mir(datasets[di], dec.w, cfg.bins, cfg.binning, sum_h_x[di]);
        cell.mir_bits = r.bits_per_sample;
        cell.mir_kbits = r.kbits_per_sec;
        cell.ok = true;
        ok_values.push_back(cell.mir_bits);
      } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
      }
      table.cells.push_back(std::move(cell));
    }
    table.mean_mir_bits.emplace_back(tolerances[ti], mean_std(ok_values).mean);
  }

  // Reference lines: every other configured algorithm at its own settings.
  for (const auto& a : cfg.algorithms) {
    if (&a == target) continue;
    std::vector<double> values;
    for (std::size_t di = 0; di < datasets.size(); ++di) {
      try {
        Decomposition dec = run_algorithm(a, datasets[di], mix_seed(cfg.seed, 9000, di));
        values.push_back(
            mir(datasets[di], dec.w, cfg.bins, cfg.binning, sum_h_x[di]).bits_per_sample);
      } catch (const std::exception&) {
      }
    }
    if (!values.empty()) {
      table.reference_mean_mir_bits[a.display()] = mean_std(values).mean;
    }
  }
  return table;
}

json ToleranceSweepTable::to_json() const {
  json j;
  j["algorithm"] = algorithm_id;
  j["tolerances"] = tolerances;
  auto cell_array = json::array();
  for (const auto& c : cells) {
    json e;
    e["tolerance"] = c.tolerance;
    e["dataset"] = c.dataset;
    e["ok"] = c.ok;
    if (!c.error.empty()) e["error"] = c.error;
    e["mir_bits_per_sample"] = c.mir_bits;
    e["mir_kbits_per_sec"] = c.mir_kbits;
    e["iterations"] = c.iterations;
    e["seconds"] = c.seconds;
    cell_array.push_back(std::move(e));
  }
  j["cells"] = std::move(cell_array);
  auto means = json::array();
  for (const auto& [tol, mean] : mean_mir_bits) {
    means.push_back(json{{"tolerance", tol}, {"mean_mir_bits", mean}});
  }
  j["mean_mir_bits"] = std::move(means);
  j["reference_mean_mir_bits"] = reference_mean_mir_bits;
  return j;
}

TimingTable time_algorithms(const BenchConfig& cfg) {
  cfg.validate();
  TimingTable table;
  table.host = host_descriptor();
  table.threads = 1;  // timing runs are forced serial

  std::vector<Dataset> datasets;
  for (const auto& d : cfg.datasets) {
    datasets.push_back(resolve_dataset(d, cfg.csv_srate));
  }

  for (std::size_t ai = 0; ai < cfg.algorithms.size(); ++ai) {
    for (std::size_t di = 0; di < datasets.size(); ++di) {
      TimingRow row;
      row.algorithm = cfg.algorithms[ai].display();
      row.dataset = datasets[di].id;
      row.repetitions = cfg.repetitions;
      try {
        Matrix w;
        for (int rep = 0; rep < cfg.repetitions; ++rep) {
          const auto t0 = std::chrono::steady_clock::now();
          Decomposition dec =
              run_algorithm(cfg.algorithms[ai], datasets[di], mix_seed(cfg.seed, ai, di));
          row.samples_sec.push_back(
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
          w = std::move(dec.w);
        }
        const auto t0 = std::chrono::steady_clock::now();
        (void)mir(datasets[di], w, cfg.bins, cfg.binning);
        row.metrics_sec =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const MeanStd st = mean_std(row.samples_sec);
        row.mean_sec = st.mean;
        row.std_sec = st.std;
        row.ok = true;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

json TimingTable::to_json() const {
  json j;
  j["host"] = host;
  j["threads"] = threads;
  auto rows_json = json::array();
  for (const auto& r : rows) {
    json e;
    e["algorithm"] = r.algorithm;
    e["dataset"] = r.dataset;
    e["repetitions"] = r.repetitions;
    e["ok"] = r.ok;
    if (!r.error.empty()) e["error"] = r.error;
    e["samples_sec"] = r.samples_sec;
    e["mean_sec"] = r.mean_sec;
    e["std_sec"] = r.std_sec;
    e["metrics_sec"] = r.metrics_sec;
    rows_json.push_back(std::move(e));
  }
  j["rows"] = std::move(rows_json);
  return j;
}

}  // namespace icabench
