#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsckit/energy.hpp"
#include "tsckit/pipeline.hpp"
#include "tsckit/strep.hpp"

namespace tsckit {

struct RunConfig {
  std::string dataset_path;
  Method method = Method::Hydrant;
  bool pruned = true;
  double zeta = 0.8;  // meaningful only when pruned; unpruned runs train at zeta = 0
  int fold = -1;      // -1 = all folds
  std::vector<uint32_t> batch_sizes = {64, 256, 1024};
  uint32_t repeats = 5;
  uint64_t seed = 0;
  std::string env_label = "default";
  bool normalize = false;
  bool parallel = false;  // measurement thunks run single-threaded unless set
  int threads = 0;        // with parallel: 0 = hardware concurrency
  std::string energy_backend = "auto";
  double power_watts = 50.0;
  std::string run_id;  // empty -> derived from dataset/method/zeta/seed
  ClassifierKind classifier = ClassifierKind::Auto;
  std::optional<HydraConfig> hydra;
  std::optional<QuantConfig> quant;
  std::optional<TreesConfig> trees;
};

// Parses and validates a run configuration. Rejects unknown keys, batch sizes
// outside the power-of-two range [2^4, 2^14], and a "zeta" key on unpruned
// runs.
RunConfig run_config_from_json_text(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

struct BatchResult {
  uint32_t batch = 0;            // requested
  uint32_t effective_batch = 0;  // clipped to the test-set size
  double s_per_sample = 0.0;     // median over repeats
  double j_per_sample = 0.0;
  std::string note;  // e.g. clipping
};

struct RunResult {
  int fold = 0;  // -1 on the fold-averaged summary
  std::map<std::string, double> metrics;
  double train_s = 0.0;
  double train_j = 0.0;
  std::vector<BatchResult> batches;
  uint32_t optimal_batch = 0;  // lowest energy, ties to the smaller batch
  uint32_t feature_count = 0;
  uint64_t param_count = 0;
  std::string energy_backend;
  std::string note;   // meter warnings etc.
  std::string error;  // non-empty when this fold failed; other fields unset
};

struct ExperimentOutput {
  std::string run_id;
  std::string dataset_name;
  std::vector<RunResult> folds;
  RunResult summary;  // averaged over successful folds
  std::vector<MeasurementRecord> measurements;  // per fold, at the optimal batch
};

// Per fold: measured training, quality on the held-out fold, then batched
// inference sweeps (median per-sample time/energy over `repeats`). Appends
// one schema-versioned JSONL record per (fold, batch) plus one summary record
// (fold = -1) to results_path; never rewrites existing lines. Fold errors are
// recorded and the remaining folds still run.
ExperimentOutput run_experiment(const RunConfig& cfg, const std::filesystem::path& results_path);

struct PruneSweepRow {
  std::string dataset;  // "mean" for the cross-dataset average
  double rate = 0.0;
  double accuracy = 0.0;      // fold-averaged
  double j_per_sample = 0.0;  // fold-averaged, at the per-fold optimal batch
};

// One run_experiment per (dataset, rate); rate 0 runs unpruned.
std::vector<PruneSweepRow> sweep_prune_rates(const RunConfig& base, const std::vector<double>& rates,
                                             const std::vector<std::string>& dataset_paths,
                                             const std::filesystem::path& results_path);

struct BatchSweepRow {
  uint32_t batch = 0;
  double s_per_sample = 0.0;
  double j_per_sample = 0.0;
  double overhead_pct = 0.0;  // energy / optimal - 1, in percent
};

struct BatchSweepTable {
  std::vector<BatchSweepRow> rows;
  uint32_t optimal_batch = 0;
};

BatchSweepTable sweep_batch_sizes(const RunConfig& cfg, const std::filesystem::path& results_path);

void write_prune_sweep_csv(const std::vector<PruneSweepRow>& rows, const std::filesystem::path& path);
void write_batch_sweep_csv(const BatchSweepTable& table, const std::filesystem::path& path);

}  // namespace tsckit
