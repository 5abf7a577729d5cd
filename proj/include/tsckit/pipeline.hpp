#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "tsckit/dataset.hpp"
#include "tsckit/hydra.hpp"
#include "tsckit/matrix.hpp"
#include "tsckit/pruning.hpp"
#include "tsckit/quant.hpp"
#include "tsckit/ridge.hpp"
#include "tsckit/trees.hpp"

namespace tsckit {

enum class Method : uint8_t { Hydra = 0, Quant = 1, Hydrant = 2 };
enum class ClassifierKind : uint8_t { Auto = 0, Ridge = 1, Trees = 2 };

Method method_from_string(const std::string& s);
std::string to_string(Method m);
ClassifierKind classifier_kind_from_string(const std::string& s);
std::string to_string(ClassifierKind k);

struct PipelineConfig {
  Method method = Method::Hydrant;
  double zeta = 0.8;  // 0 disables pruning
  ClassifierKind final_classifier = ClassifierKind::Auto;  // Auto: ridge for hydra, trees otherwise
  HydraConfig hydra;   // seed field is overwritten from the master seed
  QuantConfig quant;   // depth is capped by quant_depth_cap(l)
  TreesConfig trees;   // seed field is overwritten from the master seed
  RidgeOptions ridge;  // used for the final classifier when it is ridge
  uint64_t seed = 0;
  int threads = 1;
  bool importance_absolute = true;
};

struct PipelineProvenance {
  double temp_lambda = 0.0;
  SetImportance importances;  // on the full (unpruned) concatenated features
  PruneDecision decision;
  std::optional<RidgeModel> temp_model;  // kept in memory for bound reports, not serialized
};

// Output of the train-and-prune procedure: pruned transforms plus the final
// classifier fitted on the pruned features. Feature order is all Hydra
// columns, then all Quant columns.
struct PrunedPipeline {
  Method method = Method::Hydrant;
  ClassifierKind classifier_kind = ClassifierKind::Trees;
  std::optional<HydraTransform> hydra;
  std::optional<QuantTransform> quant;
  std::optional<RidgeModel> ridge;
  std::optional<TreeEnsemble> trees;
  PipelineConfig cfg;  // as trained
  PipelineProvenance prov;

  uint32_t feature_count() const;
  uint32_t n_classes() const;
};

// Algorithm: full transforms -> temporary ridge on concatenated features ->
// per-origin mean-importance ranking -> keep top (1-zeta) share of sets ->
// pruned re-transform -> final classifier fit.
PrunedPipeline train_pruned(const TimeSeriesDataset& train, const PipelineConfig& cfg);

FeatureMatrix pipeline_transform(const PrunedPipeline& p, const TimeSeriesDataset& ds, int threads = 1);
FeatureMatrix pipeline_transform_range(const PrunedPipeline& p, const TimeSeriesDataset& ds, std::size_t first,
                                       std::size_t count, int threads = 1);
std::vector<uint32_t> pipeline_predict(const PrunedPipeline& p, const TimeSeriesDataset& ds, int threads = 1);

// Combined set layout of the pipeline's (possibly pruned) transforms, Hydra
// spans first. Set ids are positions within each current transform.
SetLayout pipeline_set_layout(const PrunedPipeline& p);

// Uniform pruning-error bound check for the temporary ridge model: rebuilds
// the full (unpruned) transforms from the trained config, re-derives the full
// feature matrix on the given dataset and compares full vs. dropped-coefficient
// scores. Requires the in-memory temporary model (unavailable after load).
BoundReport pipeline_bound_report(const PrunedPipeline& p, const TimeSeriesDataset& train);

// Component blobs + JSON provenance (zeta, kept set ids, temporary-model
// lambda, importances).
void pipeline_save(const PrunedPipeline& p, const std::filesystem::path& path);
PrunedPipeline pipeline_load(const std::filesystem::path& path);

}  // namespace tsckit
