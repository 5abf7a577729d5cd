// tsckit command line: dataset generation, training/pruning, benchmarking,
// sweeps and comparison reports. Errors exit nonzero with one JSON line on
// stderr so callers can parse failures.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tsckit/dataset.hpp"
#include "tsckit/harness.hpp"
#include "tsckit/parallel.hpp"
#include "tsckit/pipeline.hpp"
#include "tsckit/strep.hpp"

using nlohmann::json;
using namespace tsckit;

namespace {

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + " is not valid JSON: " + std::string(e.what()));
  }
  return j;
}

SyntheticSpec synthetic_spec_from_json(const json& j) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    static const std::vector<std::string> known = {"name", "kind", "n", "d", "l", "classes", "noise", "seed",
                                                   "folds"};
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::runtime_error("unknown key '" + key + "' in synthetic spec");
  }
  SyntheticSpec spec;
  if (j.contains("name")) spec.name = j.at("name").get<std::string>();
  if (j.contains("kind")) spec.kind = synthetic_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("n")) spec.n = j.at("n").get<uint32_t>();
  if (j.contains("d")) spec.d = j.at("d").get<uint32_t>();
  if (j.contains("l")) spec.l = j.at("l").get<uint32_t>();
  if (j.contains("classes")) spec.C = j.at("classes").get<uint32_t>();
  if (j.contains("noise")) spec.noise = j.at("noise").get<double>();
  if (j.contains("seed")) spec.seed = j.at("seed").get<uint64_t>();
  if (j.contains("folds")) spec.folds = j.at("folds").get<uint32_t>();
  return spec;
}

// Train split selection shared by `train` and `prune`: fold < 0 uses the full
// dataset, otherwise the training side of that fold.
TimeSeriesDataset training_split(const TimeSeriesDataset& ds, int fold) {
  if (fold < 0) return ds;
  return split_folds(ds, uint32_t(fold)).first;
}

int cmd_gen(const std::string& spec_path, const json& overrides, const std::string& out_dir) {
  SyntheticSpec spec;
  json merged = spec_path.empty() ? json::object() : read_json_file(spec_path);
  for (const auto& [key, value] : overrides.items()) merged[key] = value;
  spec = synthetic_spec_from_json(merged);
  const TimeSeriesDataset ds = generate_synthetic(spec);
  save_dataset(ds, out_dir);
  json info{{"dataset", out_dir}, {"name", ds.name}, {"n", ds.n}, {"d", ds.d},
            {"l", ds.l},          {"classes", ds.C}, {"folds", ds.F}};
  std::cout << info.dump() << '\n';
  return 0;
}

struct TrainArgs {
  std::string dataset;
  std::string out;
  std::string method = "hydrant";
  std::string classifier = "auto";
  double zeta = 0.0;
  int fold = -1;
  uint64_t seed = 0;
  bool normalize = false;
  int threads = 1;
};

PrunedPipeline train_from_args(const TrainArgs& a, TimeSeriesDataset* train_out) {
  TimeSeriesDataset ds = load_dataset(a.dataset);
  if (a.normalize) ds = normalize_per_channel(ds);
  TimeSeriesDataset train = training_split(ds, a.fold);

  PipelineConfig cfg;
  cfg.method = method_from_string(a.method);
  cfg.final_classifier = classifier_kind_from_string(a.classifier);
  cfg.zeta = a.zeta;
  cfg.seed = a.seed;
  cfg.threads = resolve_thread_count(a.threads);
  PrunedPipeline p = train_pruned(train, cfg);
  if (train_out != nullptr) *train_out = std::move(train);
  return p;
}

json pipeline_info(const PrunedPipeline& p, const std::string& out_path) {
  json sets = json::object();
  for (const OriginSelection& sel : p.prov.decision.origins)
    sets[sel.origin == Origin::Hydra ? "hydra" : "quant"] = {{"total", sel.total}, {"kept", sel.r}};
  return json{{"model", out_path},
              {"method", to_string(p.method)},
              {"classifier", to_string(p.classifier_kind)},
              {"zeta", p.prov.decision.zeta},
              {"feature_count", p.feature_count()},
              {"temp_lambda", p.prov.temp_lambda},
              {"sets", std::move(sets)}};
}

int cmd_train(const TrainArgs& a) {
  PrunedPipeline p = train_from_args(a, nullptr);
  pipeline_save(p, a.out);
  std::cout << pipeline_info(p, a.out).dump() << '\n';
  return 0;
}

int cmd_prune(const TrainArgs& a) {
  if (!(a.zeta > 0.0)) throw std::runtime_error("prune requires --zeta > 0");
  TimeSeriesDataset train;
  PrunedPipeline p = train_from_args(a, &train);
  pipeline_save(p, a.out);

  const BoundReport report = pipeline_bound_report(p, train);
  json info = pipeline_info(p, a.out);
  json per_class = json::array();
  for (std::size_t c = 0; c < report.bound.size(); ++c)
    per_class.push_back({{"class", c},
                         {"pruned_mass", report.pruned_mass[c]},
                         {"bound", report.bound[c]},
                         {"deviation", report.deviation[c]}});
  info["bound"] = {{"B", report.B}, {"per_class", std::move(per_class)}, {"satisfied", report.satisfied}};
  std::cout << info.dump() << '\n';
  return 0;
}

json summary_to_json(const ExperimentOutput& out) {
  json folds = json::array();
  for (const RunResult& r : out.folds) {
    if (!r.error.empty()) {
      folds.push_back({{"fold", r.fold}, {"error", r.error}});
      continue;
    }
    folds.push_back({{"fold", r.fold},
                     {"accuracy", r.metrics.at("accuracy")},
                     {"optimal_batch", r.optimal_batch},
                     {"train_s", r.train_s}});
  }
  json summary{{"run_id", out.run_id},
               {"dataset", out.dataset_name},
               {"folds", std::move(folds)},
               {"metrics", out.summary.metrics},
               {"train_s", out.summary.train_s},
               {"train_j", out.summary.train_j},
               {"optimal_batch", out.summary.optimal_batch},
               {"feature_count", out.summary.feature_count},
               {"param_count", out.summary.param_count},
               {"energy_backend", out.summary.energy_backend}};
  if (!out.summary.note.empty()) summary["note"] = out.summary.note;
  return summary;
}

int cmd_bench(const std::string& config_path, const std::string& results_path,
              const std::string& measurements_path) {
  const RunConfig cfg = load_run_config(config_path);
  const ExperimentOutput out = run_experiment(cfg, results_path);
  if (!measurements_path.empty()) write_measurements_jsonl(measurements_path, out.measurements, true);
  std::cout << summary_to_json(out).dump() << '\n';
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& results_path, const std::string& rates_csv,
              bool batches, const std::vector<std::string>& datasets, const std::string& out_csv) {
  if (rates_csv.empty() == !batches)
    throw std::runtime_error("sweep needs exactly one of --rates or --batches");
  RunConfig cfg = load_run_config(config_path);
  if (!rates_csv.empty()) {
    std::vector<double> rates;
    std::stringstream ss(rates_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) rates.push_back(std::stod(tok));
    const std::vector<PruneSweepRow> rows = sweep_prune_rates(cfg, rates, datasets, results_path);
    write_prune_sweep_csv(rows, out_csv);
    std::cout << json{{"table", out_csv}, {"rows", rows.size()}}.dump() << '\n';
  } else {
    const BatchSweepTable table = sweep_batch_sizes(cfg, results_path);
    write_batch_sweep_csv(table, out_csv);
    std::cout << json{{"table", out_csv}, {"optimal_batch", table.optimal_batch}}.dump() << '\n';
  }
  return 0;
}

std::string format_zeta_tag(double zeta) {
  std::ostringstream ss;
  ss << zeta;
  return ss.str();
}

// Accepts either measurement records ({"model",...}) or harness results
// records ({"schema",...}); for the latter only fold-averaged summary records
// (fold = -1) are used, with the dataset taken from the run_id prefix before
// '/' (the default run_id layout).
std::vector<MeasurementRecord> measurements_from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open results file " + path.string());
  std::vector<MeasurementRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": bad JSON: " + e.what());
    }
    if (j.contains("model") && j.contains("property")) {
      records.push_back({j.at("model").get<std::string>(), j.at("config").get<std::string>(),
                         j.at("property").get<std::string>(), j.at("value").get<double>()});
      continue;
    }
    if (!j.contains("schema")) throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                                        ": unrecognized record (neither measurement nor result)");
    if (j.at("fold").get<int>() != -1) continue;  // per-fold records; summaries carry the averages
    const std::string run_id = j.at("run_id").get<std::string>();
    const std::string dataset = run_id.substr(0, run_id.find('/'));
    const double zeta = j.at("zeta").get<double>();
    const std::string model = j.at("method").get<std::string>() +
                              (zeta > 0.0 ? "[z=" + format_zeta_tag(zeta) + "]" : "[full]");
    const std::string config = dataset + "|" + j.at("env").get<std::string>();
    for (const auto& [name, value] : j.at("metrics").items())
      records.push_back({model, config, name, value.get<double>()});
    records.push_back({model, config, "infer_s_per_sample", j.at("infer_s_per_sample").get<double>()});
    records.push_back({model, config, "infer_j_per_sample", j.at("infer_j_per_sample").get<double>()});
  }
  return records;
}

int cmd_report(const std::string& results_path, const std::string& weights_arg, const std::string& out_dir) {
  const std::vector<MeasurementRecord> records = measurements_from_file(results_path);
  const std::vector<PropertySpec> specs = default_property_specs();
  WeightVector weights;
  if (weights_arg == "default") {
    weights = default_weights(specs);
  } else {
    for (const auto& [name, value] : read_json_file(weights_arg).items()) weights[name] = value.get<double>();
  }
  const Report report = build_report(records, specs, weights);

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  write_scaled_csv(report, dir / "scaled.csv");
  write_compound_csv(report, dir / "compound.csv");
  write_ranks_csv(report, dir / "ranks.csv");

  json ranks = json::array();
  for (std::size_t i = 0; i < report.models.size(); ++i)
    ranks.push_back({{"model", report.models[i]}, {"mean_rank", report.ranks.mean_ranks[i]}});
  std::cout << json{{"models", report.models.size()},
                    {"configs", report.configs.size()},
                    {"friedman_chi2", report.ranks.friedman_chi2},
                    {"critical_distance", report.ranks.critical_distance},
                    {"mean_ranks", std::move(ranks)},
                    {"outputs", {(dir / "scaled.csv").string(), (dir / "compound.csv").string(),
                                 (dir / "ranks.csv").string()}}}
                   .dump()
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tsckit: time-series classification with coefficient-ranked transform pruning"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset directory");
  std::string gen_spec, gen_out, gen_kind, gen_name;
  uint32_t gen_n = 0, gen_d = 0, gen_l = 0, gen_classes = 0, gen_folds = 0;
  double gen_noise = -1.0;
  int64_t gen_seed = -1;
  gen->add_option("--spec", gen_spec, "synthetic spec JSON file");
  gen->add_option("--out", gen_out, "output dataset directory")->required();
  gen->add_option("--kind", gen_kind, "sinusoid-frequency | trend-slope | gaussian-shift");
  gen->add_option("--name", gen_name, "dataset name");
  gen->add_option("--n", gen_n, "instances");
  gen->add_option("--d", gen_d, "channels");
  gen->add_option("--l", gen_l, "series length");
  gen->add_option("--classes", gen_classes, "class count");
  gen->add_option("--noise", gen_noise, "noise standard deviation");
  gen->add_option("--seed", gen_seed, "rng seed");
  gen->add_option("--folds", gen_folds, "cross-validation folds");

  // train / prune share flags
  TrainArgs train_args, prune_args;
  auto add_train_flags = [](CLI::App* sub, TrainArgs& a, bool zeta_required) {
    sub->add_option("--dataset", a.dataset, "dataset directory")->required();
    sub->add_option("--out", a.out, "output model file")->required();
    sub->add_option("--method", a.method, "hydra | quant | hydrant");
    sub->add_option("--classifier", a.classifier, "auto | ridge | trees");
    auto* z = sub->add_option("--zeta", a.zeta, "prune rate in [0, 1)");
    if (zeta_required) z->required();
    sub->add_option("--fold", a.fold, "train on this fold's training split (-1: full dataset)");
    sub->add_option("--seed", a.seed, "master seed");
    sub->add_flag("--normalize", a.normalize, "per-channel normalization");
    sub->add_option("--threads", a.threads, "worker threads (0: hardware)");
  };
  auto* train = app.add_subcommand("train", "train a pipeline (zeta 0 = unpruned)");
  add_train_flags(train, train_args, false);
  auto* prune = app.add_subcommand("prune", "train with pruning and report the error bound");
  add_train_flags(prune, prune_args, true);

  // bench
  auto* bench = app.add_subcommand("bench", "run a benchmark config");
  std::string bench_config, bench_results, bench_measurements;
  bench->add_option("--config", bench_config, "run config JSON")->required();
  bench->add_option("--results", bench_results, "results JSONL (appended)")->required();
  bench->add_option("--measurements", bench_measurements, "also append strep measurement records here");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "prune-rate or batch-size sweep");
  std::string sweep_config, sweep_results, sweep_rates, sweep_out;
  std::vector<std::string> sweep_datasets;
  bool sweep_batches = false;
  sweep->add_option("--config", sweep_config, "base run config JSON")->required();
  sweep->add_option("--results", sweep_results, "results JSONL (appended)")->required();
  sweep->add_option("--rates", sweep_rates, "comma-separated prune rates, e.g. 0,0.3,0.6,0.9");
  sweep->add_flag("--batches", sweep_batches, "sweep the config's batch sizes instead");
  sweep->add_option("--datasets", sweep_datasets, "dataset directories (default: config's dataset)");
  sweep->add_option("--out", sweep_out, "output CSV table")->required();

  // report
  auto* report = app.add_subcommand("report", "index-scaled comparison report from results");
  std::string report_results, report_weights = "default", report_out = "report";
  report->add_option("--results", report_results, "results or measurements JSONL")->required();
  report->add_option("--weights", report_weights, "'default' or a JSON file of property weights");
  report->add_option("--out-dir", report_out, "output directory for CSV tables");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      json overrides = json::object();
      if (gen->count("--kind")) overrides["kind"] = gen_kind;
      if (gen->count("--name")) overrides["name"] = gen_name;
      if (gen->count("--n")) overrides["n"] = gen_n;
      if (gen->count("--d")) overrides["d"] = gen_d;
      if (gen->count("--l")) overrides["l"] = gen_l;
      if (gen->count("--classes")) overrides["classes"] = gen_classes;
      if (gen->count("--noise")) overrides["noise"] = gen_noise;
      if (gen->count("--seed")) overrides["seed"] = uint64_t(gen_seed);
      if (gen->count("--folds")) overrides["folds"] = gen_folds;
      return cmd_gen(gen_spec, overrides, gen_out);
    }
    if (train->parsed()) return cmd_train(train_args);
    if (prune->parsed()) return cmd_prune(prune_args);
    if (bench->parsed()) return cmd_bench(bench_config, bench_results, bench_measurements);
    if (sweep->parsed())
      return cmd_sweep(sweep_config, sweep_results, sweep_rates, sweep_batches, sweep_datasets, sweep_out);
    if (report->parsed()) return cmd_report(report_results, report_weights, report_out);
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}
