#include "tsckit/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tsckit/parallel.hpp"

namespace tsckit {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::vector<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::runtime_error("unknown key '" + key + "' in " + where + " config");
  }
}

bool power_of_two(uint32_t v) { return v != 0 && (v & (v - 1)) == 0; }

HydraConfig hydra_config_from_json(const json& j) {
  reject_unknown_keys(j, {"groups", "kernels_per_group", "kernel_length", "max_dilation_exponent"}, "hydra");
  HydraConfig c;
  if (j.contains("groups")) c.groups = j.at("groups").get<uint32_t>();
  if (j.contains("kernels_per_group")) c.kernels_per_group = j.at("kernels_per_group").get<uint32_t>();
  if (j.contains("kernel_length")) c.kernel_length = j.at("kernel_length").get<uint32_t>();
  if (j.contains("max_dilation_exponent")) c.max_dilation_exponent = j.at("max_dilation_exponent").get<int>();
  return c;
}

QuantConfig quant_config_from_json(const json& j) {
  reject_unknown_keys(j, {"depth", "quantile_divisor", "representations"}, "quant");
  QuantConfig c;
  if (j.contains("depth")) c.depth = j.at("depth").get<uint32_t>();
  if (j.contains("quantile_divisor")) c.quantile_divisor = j.at("quantile_divisor").get<uint32_t>();
  if (j.contains("representations")) {
    c.representations.clear();
    for (const json& r : j.at("representations"))
      c.representations.push_back(quant_representation_from_string(r.get<std::string>()));
  }
  return c;
}

TreesConfig trees_config_from_json(const json& j) {
  reject_unknown_keys(j, {"n_trees", "candidate_features", "thresholds_per_candidate", "min_samples_leaf"}, "trees");
  TreesConfig c;
  if (j.contains("n_trees")) c.n_trees = j.at("n_trees").get<uint32_t>();
  if (j.contains("candidate_features")) c.candidate_features = j.at("candidate_features").get<uint32_t>();
  if (j.contains("thresholds_per_candidate"))
    c.thresholds_per_candidate = j.at("thresholds_per_candidate").get<uint32_t>();
  if (j.contains("min_samples_leaf")) c.min_samples_leaf = j.at("min_samples_leaf").get<uint32_t>();
  return c;
}

std::string format_double(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

RunConfig run_config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("run config is not valid JSON: ") + e.what());
  }
  reject_unknown_keys(j,
                      {"dataset", "method", "pruned", "zeta", "fold", "batch_sizes", "repeats", "seed", "env",
                       "normalize", "parallel", "threads", "energy_backend", "power_watts", "run_id", "classifier",
                       "hydra", "quant", "trees"},
                      "run");

  RunConfig cfg;
  if (const char* backend = std::getenv("TSCKIT_ENERGY_BACKEND")) cfg.energy_backend = backend;
  if (const char* watts = std::getenv("TSCKIT_POWER_W")) {
    char* end = nullptr;
    cfg.power_watts = std::strtod(watts, &end);
    if (end == watts || !(cfg.power_watts > 0.0))
      throw std::runtime_error("TSCKIT_POWER_W must be a positive number");
  }

  if (!j.contains("dataset")) throw std::runtime_error("run config needs a 'dataset' path");
  cfg.dataset_path = j.at("dataset").get<std::string>();
  if (j.contains("method")) cfg.method = method_from_string(j.at("method").get<std::string>());
  if (j.contains("pruned")) cfg.pruned = j.at("pruned").get<bool>();
  if (j.contains("zeta")) {
    if (!cfg.pruned) throw std::runtime_error("zeta given for an unpruned run");
    cfg.zeta = j.at("zeta").get<double>();
    if (!(cfg.zeta >= 0.0 && cfg.zeta < 1.0)) throw std::runtime_error("zeta must be in [0, 1)");
  }
  if (j.contains("fold")) {
    if (j.at("fold").is_string()) {
      if (j.at("fold").get<std::string>() != "all") throw std::runtime_error("fold must be an index or \"all\"");
      cfg.fold = -1;
    } else {
      cfg.fold = j.at("fold").get<int>();
      if (cfg.fold < 0) throw std::runtime_error("fold index must be >= 0");
    }
  }
  if (j.contains("batch_sizes")) {
    cfg.batch_sizes = j.at("batch_sizes").get<std::vector<uint32_t>>();
    if (cfg.batch_sizes.empty()) throw std::runtime_error("batch_sizes must not be empty");
  }
  for (uint32_t b : cfg.batch_sizes)
    if (!power_of_two(b) || b < 16 || b > 16384)
      throw std::runtime_error("batch size " + std::to_string(b) + " outside the power-of-two range [16, 16384]");
  for (std::size_t i = 0; i < cfg.batch_sizes.size(); ++i)
    for (std::size_t k = i + 1; k < cfg.batch_sizes.size(); ++k)
      if (cfg.batch_sizes[i] == cfg.batch_sizes[k])
        throw std::runtime_error("duplicate batch size " + std::to_string(cfg.batch_sizes[i]));
  if (j.contains("repeats")) cfg.repeats = j.at("repeats").get<uint32_t>();
  if (cfg.repeats < 1) throw std::runtime_error("repeats must be >= 1");
  if (j.contains("seed")) cfg.seed = j.at("seed").get<uint64_t>();
  if (j.contains("env")) cfg.env_label = j.at("env").get<std::string>();
  if (j.contains("normalize")) cfg.normalize = j.at("normalize").get<bool>();
  if (j.contains("parallel")) cfg.parallel = j.at("parallel").get<bool>();
  if (j.contains("threads")) {
    cfg.threads = j.at("threads").get<int>();
    if (cfg.threads < 0) throw std::runtime_error("threads must be >= 0");
  }
  if (j.contains("energy_backend")) cfg.energy_backend = j.at("energy_backend").get<std::string>();
  if (cfg.energy_backend != "auto" && cfg.energy_backend != "rapl" && cfg.energy_backend != "proxy")
    throw std::runtime_error("energy_backend must be auto, rapl or proxy");
  if (j.contains("power_watts")) cfg.power_watts = j.at("power_watts").get<double>();
  if (!(cfg.power_watts > 0.0)) throw std::runtime_error("power_watts must be positive");
  if (j.contains("run_id")) cfg.run_id = j.at("run_id").get<std::string>();
  if (j.contains("classifier")) cfg.classifier = classifier_kind_from_string(j.at("classifier").get<std::string>());
  if (j.contains("hydra")) cfg.hydra = hydra_config_from_json(j.at("hydra"));
  if (j.contains("quant")) cfg.quant = quant_config_from_json(j.at("quant"));
  if (j.contains("trees")) cfg.trees = trees_config_from_json(j.at("trees"));
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open run config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return run_config_from_json_text(ss.str());
}

namespace {

std::vector<uint32_t> predict_batched(const PrunedPipeline& p, const TimeSeriesDataset& ds, uint32_t batch,
                                      int threads) {
  std::vector<uint32_t> out;
  out.reserve(ds.n);
  for (std::size_t start = 0; start < ds.n; start += batch) {
    const std::size_t count = std::min<std::size_t>(batch, ds.n - start);
    const FeatureMatrix Z = pipeline_transform_range(p, ds, start, count, threads);
    const std::vector<uint32_t> labels =
        p.ridge ? ridge_predict(*p.ridge, Z) : trees_predict(*p.trees, Z, threads);
    out.insert(out.end(), labels.begin(), labels.end());
  }
  return out;
}

uint64_t model_param_count(const PrunedPipeline& p) {
  // ridge: beta + intercept + per-column (mean, scale); trees: 2 per split
  // node (feature, threshold) and C per leaf.
  if (p.ridge) return uint64_t(p.ridge->q) * p.ridge->C + p.ridge->C + 2 * uint64_t(p.ridge->q);
  uint64_t total = 0;
  for (const Tree& t : p.trees->trees)
    for (const TreeNode& nd : t.nodes) total += nd.feature >= 0 ? 2 : p.trees->C;
  return total;
}

std::string derive_run_id(const RunConfig& cfg, const std::string& dataset_name) {
  std::string id = dataset_name + "/" + to_string(cfg.method);
  id += cfg.pruned ? ":z=" + format_double(cfg.zeta) : ":full";
  id += ":seed=" + std::to_string(cfg.seed);
  return id;
}

json result_record(const ExperimentOutput& out, const RunConfig& cfg, const RunResult& fold_result,
                   const BatchResult& batch) {
  json metrics = json::object();
  for (const auto& [name, value] : fold_result.metrics) metrics[name] = value;
  json rec{{"schema", 1},
           {"run_id", out.run_id},
           {"method", to_string(cfg.method)},
           {"zeta", cfg.pruned ? cfg.zeta : 0.0},
           {"fold", fold_result.fold},
           {"batch", batch.batch},
           {"metrics", std::move(metrics)},
           {"train_s", fold_result.train_s},
           {"train_j", fold_result.train_j},
           {"infer_s_per_sample", batch.s_per_sample},
           {"infer_j_per_sample", batch.j_per_sample},
           {"energy_backend", fold_result.energy_backend},
           {"env", cfg.env_label},
           {"seed", cfg.seed}};
  std::string note = fold_result.note;
  if (!batch.note.empty()) note += (note.empty() ? "" : "; ") + batch.note;
  if (!note.empty()) rec["note"] = note;
  return rec;
}

const BatchResult* find_batch(const RunResult& r, uint32_t batch) {
  for (const BatchResult& b : r.batches)
    if (b.batch == batch) return &b;
  return nullptr;
}

}  // namespace

ExperimentOutput run_experiment(const RunConfig& cfg, const std::filesystem::path& results_path) {
  if (results_path.empty()) throw std::runtime_error("run_experiment needs a results path");
  TimeSeriesDataset ds = load_dataset(cfg.dataset_path);
  if (cfg.normalize) ds = normalize_per_channel(ds);
  if (ds.F < 2) throw std::runtime_error("dataset '" + ds.name + "' has no cross-validation folds");
  if (cfg.fold >= int(ds.F))
    throw std::runtime_error("fold " + std::to_string(cfg.fold) + " out of range (F=" + std::to_string(ds.F) + ")");

  ExperimentOutput out;
  out.run_id = cfg.run_id.empty() ? derive_run_id(cfg, ds.name) : cfg.run_id;
  out.dataset_name = ds.name;

  const EnergyMeter meter = EnergyMeter::create(cfg.energy_backend, cfg.power_watts);
  const int threads = cfg.parallel ? resolve_thread_count(cfg.threads) : 1;
  const std::string model_id =
      to_string(cfg.method) + (cfg.pruned ? "[z=" + format_double(cfg.zeta) + "]" : "[full]");

  std::vector<int> fold_ids;
  if (cfg.fold < 0)
    for (uint32_t f = 0; f < ds.F; ++f) fold_ids.push_back(int(f));
  else
    fold_ids.push_back(cfg.fold);

  std::ofstream results(results_path, std::ios::app);
  if (!results) throw std::runtime_error("cannot open results file " + results_path.string() + " for appending");

  for (int fold : fold_ids) {
    RunResult r;
    r.fold = fold;
    r.energy_backend = meter.backend_name();
    r.note = meter.warning();
    try {
      auto [train, test] = split_folds(ds, uint32_t(fold));

      PipelineConfig pc;
      pc.method = cfg.method;
      pc.zeta = cfg.pruned ? cfg.zeta : 0.0;
      pc.final_classifier = cfg.classifier;
      if (cfg.hydra) pc.hydra = *cfg.hydra;
      if (cfg.quant) pc.quant = *cfg.quant;
      if (cfg.trees) pc.trees = *cfg.trees;
      pc.seed = mix_seed(cfg.seed, uint64_t(fold));
      pc.threads = threads;

      PrunedPipeline pipeline;
      const Measurement train_m = meter.measure([&] { pipeline = train_pruned(train, pc); });
      r.train_s = train_m.seconds;
      r.train_j = train_m.joules;
      r.feature_count = pipeline.feature_count();
      r.param_count = model_param_count(pipeline);

      const std::vector<uint32_t> y_pred = pipeline_predict(pipeline, test, threads);
      r.metrics = quality_metrics(test.labels, y_pred, ds.C);

      for (uint32_t batch : cfg.batch_sizes) {
        BatchResult br;
        br.batch = batch;
        br.effective_batch = std::min<uint32_t>(batch, test.n);
        if (br.effective_batch != batch)
          br.note = "batch clipped to test size " + std::to_string(test.n);
        std::vector<double> secs, joules;
        for (uint32_t rep = 0; rep < cfg.repeats; ++rep) {
          const Measurement m =
              meter.measure([&] { (void)predict_batched(pipeline, test, br.effective_batch, threads); });
          secs.push_back(m.seconds / double(test.n));
          joules.push_back(m.joules / double(test.n));
        }
        br.s_per_sample = median(secs);
        br.j_per_sample = median(joules);
        r.batches.push_back(std::move(br));
      }
      r.optimal_batch = r.batches.front().batch;
      for (const BatchResult& b : r.batches) {
        const BatchResult* cur = find_batch(r, r.optimal_batch);
        if (b.j_per_sample < cur->j_per_sample ||
            (b.j_per_sample == cur->j_per_sample && b.batch < cur->batch))
          r.optimal_batch = b.batch;
      }

      for (const BatchResult& b : r.batches) results << result_record(out, cfg, r, b).dump() << '\n';

      const BatchResult* opt = find_batch(r, r.optimal_batch);
      for (const auto& [name, value] : r.metrics)
        out.measurements.push_back({model_id, ds.name + "|" + cfg.env_label + "|fold=" + std::to_string(fold),
                                    name, value});
      out.measurements.push_back({model_id, ds.name + "|" + cfg.env_label + "|fold=" + std::to_string(fold),
                                  "infer_s_per_sample", opt->s_per_sample});
      out.measurements.push_back({model_id, ds.name + "|" + cfg.env_label + "|fold=" + std::to_string(fold),
                                  "infer_j_per_sample", opt->j_per_sample});
    } catch (const std::exception& e) {
      r.error = e.what();
      std::cerr << "warning: fold " << fold << " failed: " << e.what() << '\n';
    }
    out.folds.push_back(std::move(r));
  }

  std::vector<const RunResult*> ok;
  for (const RunResult& r : out.folds)
    if (r.error.empty()) ok.push_back(&r);
  if (ok.empty()) throw std::runtime_error("all folds failed; first error: " + out.folds.front().error);

  RunResult& sum = out.summary;
  sum.fold = -1;
  sum.energy_backend = meter.backend_name();
  sum.note = meter.warning();
  for (const RunResult* r : ok) {
    for (const auto& [name, value] : r->metrics) sum.metrics[name] += value;
    sum.train_s += r->train_s;
    sum.train_j += r->train_j;
    sum.feature_count += r->feature_count;
    sum.param_count += r->param_count;
  }
  const double nf = double(ok.size());
  for (auto& [name, value] : sum.metrics) value /= nf;
  sum.train_s /= nf;
  sum.train_j /= nf;
  sum.feature_count = uint32_t(std::llround(double(sum.feature_count) / nf));
  sum.param_count = uint64_t(std::llround(double(sum.param_count) / nf));
  for (uint32_t batch : cfg.batch_sizes) {
    BatchResult br;
    br.batch = batch;
    br.effective_batch = batch;
    for (const RunResult* r : ok) {
      const BatchResult* b = find_batch(*r, batch);
      br.s_per_sample += b->s_per_sample;
      br.j_per_sample += b->j_per_sample;
      br.effective_batch = std::min(br.effective_batch, b->effective_batch);
    }
    br.s_per_sample /= nf;
    br.j_per_sample /= nf;
    sum.batches.push_back(br);
  }
  sum.optimal_batch = sum.batches.front().batch;
  for (const BatchResult& b : sum.batches) {
    const BatchResult* cur = find_batch(sum, sum.optimal_batch);
    if (b.j_per_sample < cur->j_per_sample || (b.j_per_sample == cur->j_per_sample && b.batch < cur->batch))
      sum.optimal_batch = b.batch;
  }
  results << result_record(out, cfg, sum, *find_batch(sum, sum.optimal_batch)).dump() << '\n';
  return out;
}

std::vector<PruneSweepRow> sweep_prune_rates(const RunConfig& base, const std::vector<double>& rates,
                                             const std::vector<std::string>& dataset_paths,
                                             const std::filesystem::path& results_path) {
  if (rates.empty()) throw std::runtime_error("sweep_prune_rates: no rates given");
  for (double rate : rates)
    if (!(rate >= 0.0 && rate <= 0.9)) throw std::runtime_error("prune rates must lie in [0, 0.9]");
  const std::vector<std::string> datasets =
      dataset_paths.empty() ? std::vector<std::string>{base.dataset_path} : dataset_paths;

  std::vector<PruneSweepRow> rows;
  for (double rate : rates) {
    double acc_sum = 0.0, j_sum = 0.0;
    for (const std::string& path : datasets) {
      RunConfig cfg = base;
      cfg.dataset_path = path;
      cfg.pruned = rate > 0.0;
      cfg.zeta = rate;
      cfg.run_id.clear();
      const ExperimentOutput out = run_experiment(cfg, results_path);
      PruneSweepRow row;
      row.dataset = out.dataset_name;
      row.rate = rate;
      row.accuracy = out.summary.metrics.at("accuracy");
      row.j_per_sample = find_batch(out.summary, out.summary.optimal_batch)->j_per_sample;
      acc_sum += row.accuracy;
      j_sum += row.j_per_sample;
      rows.push_back(std::move(row));
    }
    rows.push_back({"mean", rate, acc_sum / double(datasets.size()), j_sum / double(datasets.size())});
  }
  return rows;
}

BatchSweepTable sweep_batch_sizes(const RunConfig& cfg, const std::filesystem::path& results_path) {
  const ExperimentOutput out = run_experiment(cfg, results_path);
  BatchSweepTable table;
  table.optimal_batch = out.summary.optimal_batch;
  const double opt_j = find_batch(out.summary, table.optimal_batch)->j_per_sample;
  for (const BatchResult& b : out.summary.batches) {
    BatchSweepRow row;
    row.batch = b.batch;
    row.s_per_sample = b.s_per_sample;
    row.j_per_sample = b.j_per_sample;
    row.overhead_pct = opt_j > 0.0 ? (b.j_per_sample / opt_j - 1.0) * 100.0 : 0.0;
    table.rows.push_back(row);
  }
  return table;
}

void write_prune_sweep_csv(const std::vector<PruneSweepRow>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.precision(12);
  out << "dataset,rate,accuracy,infer_j_per_sample\n";
  for (const PruneSweepRow& r : rows)
    out << r.dataset << ',' << r.rate << ',' << r.accuracy << ',' << r.j_per_sample << '\n';
}

void write_batch_sweep_csv(const BatchSweepTable& table, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.precision(12);
  out << "batch,infer_s_per_sample,infer_j_per_sample,overhead_pct,optimal\n";
  for (const BatchSweepRow& r : table.rows)
    out << r.batch << ',' << r.s_per_sample << ',' << r.j_per_sample << ',' << r.overhead_pct << ','
        << (r.batch == table.optimal_batch ? 1 : 0) << '\n';
}

}  // namespace tsckit
