#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "tsckit/io.hpp"
#include "tsckit/pipeline.hpp"

using namespace tsckit;

namespace {

TimeSeriesDataset easy_dataset(uint32_t n = 40, uint32_t l = 64, uint32_t C = 2, uint64_t seed = 3) {
  SyntheticSpec spec;
  spec.n = n;
  spec.l = l;
  spec.C = C;
  spec.noise = 0.2;
  spec.seed = seed;
  spec.folds = 2;
  return generate_synthetic(spec);
}

// Mirrors the component-seed derivation train_pruned applies before fitting.
FeatureMatrix rebuild_full_features(const PrunedPipeline& p, const TimeSeriesDataset& ds, SetLayout* layout) {
  FeatureMatrix Z;
  SetLayout hy, qu;
  if (p.method == Method::Hydra || p.method == Method::Hydrant) {
    HydraConfig hc = p.cfg.hydra;
    hc.seed = mix_seed(p.cfg.seed, 1);
    const HydraTransform t = hydra_fit(hc, ds.d, ds.l);
    Z = hydra_transform(t, ds);
    hy = hydra_set_layout(t);
  }
  if (p.method == Method::Quant || p.method == Method::Hydrant) {
    QuantConfig qc = p.cfg.quant;
    qc.depth = std::min(qc.depth, quant_depth_cap(ds.l));
    const QuantTransform t = quant_fit(qc, ds.d, ds.l);
    const FeatureMatrix Zq = quant_transform(t, ds);
    if (Z.cols > 0) {
      qu = quant_set_layout(t);
      hy = concat_layouts(hy, qu, static_cast<uint32_t>(Z.cols));
      Z = Z.hcat(Zq);
    } else {
      Z = Zq;
      hy = quant_set_layout(t);
    }
  }
  if (layout != nullptr) *layout = hy;
  return Z;
}

std::string model_bytes(const PrunedPipeline& p) {
  const auto path = std::filesystem::temp_directory_path() / "tsckit_test_pipe.bin";
  pipeline_save(p, path);
  return read_binary_file(path);
}

}  // namespace

TEST_CASE("zeta 0 keeps every set of every origin") {
  const TimeSeriesDataset ds = easy_dataset();
  PipelineConfig cfg;
  cfg.zeta = 0.0;
  cfg.seed = 1;
  const PrunedPipeline p = train_pruned(ds, cfg);
  for (const OriginSelection& sel : p.prov.decision.origins) {
    CHECK(sel.r == sel.total);
    CHECK(sel.kept.size() == sel.total);
  }
  SetLayout layout;
  const FeatureMatrix full = rebuild_full_features(p, ds, &layout);
  CHECK(p.feature_count() == full.cols);
  CHECK(pipeline_transform(p, ds) == full);
}

TEST_CASE("pruned features are exactly the kept columns of the full transform") {
  const TimeSeriesDataset ds = easy_dataset();
  for (const char* method : {"hydra", "quant", "hydrant"}) {
    CAPTURE(method);
    PipelineConfig cfg;
    cfg.method = method_from_string(method);
    cfg.zeta = 0.7;
    cfg.seed = 9;
    const PrunedPipeline p = train_pruned(ds, cfg);
    SetLayout layout;
    const FeatureMatrix full = rebuild_full_features(p, ds, &layout);
    const std::vector<uint32_t> cols = kept_columns(layout, p.prov.decision);
    CHECK(pipeline_transform(p, ds) == full.select_columns(cols));
    CHECK(p.feature_count() == cols.size());
  }
}

TEST_CASE("importances cover every set and the decision respects the kept-count rule") {
  const TimeSeriesDataset ds = easy_dataset();
  PipelineConfig cfg;
  cfg.zeta = 0.8;
  const PrunedPipeline p = train_pruned(ds, cfg);
  uint32_t total_sets = 0;
  for (const OriginSelection& sel : p.prov.decision.origins) {
    CHECK(sel.r == kept_count(sel.total, 0.8));
    total_sets += sel.total;
  }
  CHECK(p.prov.importances.entries.size() == total_sets);
  // the temporary model's lambda came from the default GCV grid
  const std::vector<double> lambdas = default_ridge_lambdas();
  CHECK(std::count(lambdas.begin(), lambdas.end(), p.prov.temp_lambda) == 1);
}

TEST_CASE("auto classifier: ridge for hydra, trees for quant and hydrant") {
  const TimeSeriesDataset ds = easy_dataset(30, 64);
  PipelineConfig cfg;
  cfg.zeta = 0.5;
  cfg.method = Method::Hydra;
  CHECK(train_pruned(ds, cfg).classifier_kind == ClassifierKind::Ridge);
  cfg.method = Method::Quant;
  CHECK(train_pruned(ds, cfg).classifier_kind == ClassifierKind::Trees);
  cfg.method = Method::Hydrant;
  CHECK(train_pruned(ds, cfg).classifier_kind == ClassifierKind::Trees);
  cfg.final_classifier = ClassifierKind::Ridge;
  const PrunedPipeline p = train_pruned(ds, cfg);
  CHECK(p.classifier_kind == ClassifierKind::Ridge);
  CHECK(p.ridge.has_value());
  CHECK_FALSE(p.trees.has_value());
}

TEST_CASE("method selects which transforms exist") {
  const TimeSeriesDataset ds = easy_dataset(24, 64);
  PipelineConfig cfg;
  cfg.zeta = 0.5;
  cfg.method = Method::Hydra;
  const PrunedPipeline hy = train_pruned(ds, cfg);
  CHECK(hy.hydra.has_value());
  CHECK_FALSE(hy.quant.has_value());
  cfg.method = Method::Quant;
  const PrunedPipeline qu = train_pruned(ds, cfg);
  CHECK_FALSE(qu.hydra.has_value());
  CHECK(qu.quant.has_value());
}

TEST_CASE("training and prediction are seed-deterministic, including threaded runs") {
  const TimeSeriesDataset ds = easy_dataset();
  PipelineConfig cfg;
  cfg.zeta = 0.6;
  cfg.seed = 17;
  const PrunedPipeline a = train_pruned(ds, cfg);
  const PrunedPipeline b = train_pruned(ds, cfg);
  CHECK(model_bytes(a) == model_bytes(b));
  CHECK(pipeline_predict(a, ds) == pipeline_predict(b, ds));

  cfg.threads = 4;
  const PrunedPipeline c = train_pruned(ds, cfg);
  CHECK(model_bytes(c) == model_bytes(a));
  CHECK(pipeline_predict(c, ds, 4) == pipeline_predict(a, ds));

  cfg.threads = 1;
  cfg.seed = 18;
  CHECK(model_bytes(train_pruned(ds, cfg)) != model_bytes(a));
}

TEST_CASE("save/load reproduces predictions and provenance") {
  const TimeSeriesDataset ds = easy_dataset();
  PipelineConfig cfg;
  cfg.zeta = 0.75;
  cfg.seed = 5;
  const PrunedPipeline p = train_pruned(ds, cfg);
  const auto path = std::filesystem::temp_directory_path() / "tsckit_test_saveload.bin";
  pipeline_save(p, path);
  const PrunedPipeline back = pipeline_load(path);

  CHECK(back.method == p.method);
  CHECK(back.classifier_kind == p.classifier_kind);
  CHECK(back.cfg.zeta == p.cfg.zeta);
  CHECK(back.cfg.seed == p.cfg.seed);
  CHECK(back.prov.temp_lambda == p.prov.temp_lambda);
  CHECK(back.prov.importances.entries.size() == p.prov.importances.entries.size());
  REQUIRE(back.prov.decision.origins.size() == p.prov.decision.origins.size());
  for (std::size_t i = 0; i < p.prov.decision.origins.size(); ++i)
    CHECK(back.prov.decision.origins[i].kept == p.prov.decision.origins[i].kept);
  CHECK(pipeline_predict(back, ds) == pipeline_predict(p, ds));
  CHECK(pipeline_transform(back, ds) == pipeline_transform(p, ds));

  // the temporary model is deliberately not serialized
  CHECK_FALSE(back.prov.temp_model.has_value());
  CHECK_THROWS_WITH_AS(pipeline_bound_report(back, ds),
                       "bound report requires the in-memory temporary model (not available after load)",
                       std::runtime_error);
}

TEST_CASE("bound report after training is satisfied and matches the decision") {
  const TimeSeriesDataset ds = easy_dataset();
  PipelineConfig cfg;
  cfg.zeta = 0.8;
  cfg.seed = 2;
  const PrunedPipeline p = train_pruned(ds, cfg);
  const BoundReport r = pipeline_bound_report(p, ds);
  CHECK(r.satisfied);
  CHECK(r.B > 0.0);
  REQUIRE(r.bound.size() == p.n_classes());
  for (std::size_t c = 0; c < r.bound.size(); ++c) {
    CHECK(r.deviation[c] <= r.bound[c] + 1e-6 * (1.0 + r.bound[c]));
    CHECK(r.pruned_mass[c] >= 0.0);
  }
}

TEST_CASE("pipeline set layout partitions the pruned feature columns") {
  const TimeSeriesDataset ds = easy_dataset();
  PipelineConfig cfg;
  cfg.zeta = 0.7;
  const PrunedPipeline p = train_pruned(ds, cfg);
  const SetLayout layout = pipeline_set_layout(p);
  uint32_t off = 0;
  bool seen_quant = false;
  for (const SetSpan& span : layout) {
    CHECK(span.offset == off);
    off += span.count;
    if (span.origin == Origin::Quant) seen_quant = true;
    else CHECK_FALSE(seen_quant);  // hydra spans come first
  }
  CHECK(off == p.feature_count());
}

TEST_CASE("prediction accuracy survives heavy pruning on an easy problem") {
  SyntheticSpec spec;
  spec.n = 80;
  spec.l = 64;
  spec.C = 2;
  spec.noise = 0.2;
  spec.seed = 31;
  spec.folds = 2;
  const TimeSeriesDataset ds = generate_synthetic(spec);
  const auto [train, test] = split_folds(ds, 0);
  PipelineConfig cfg;
  cfg.zeta = 0.8;
  const PrunedPipeline p = train_pruned(train, cfg);
  const std::vector<uint32_t> pred = pipeline_predict(p, test);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == test.labels[i];
  CHECK(double(hits) / double(pred.size()) >= 0.9);
}

TEST_CASE("configuration validation") {
  const TimeSeriesDataset ds = easy_dataset(20, 64);
  PipelineConfig cfg;
  cfg.zeta = 1.0;
  CHECK_THROWS_AS(train_pruned(ds, cfg), std::runtime_error);
  cfg.zeta = -0.2;
  CHECK_THROWS_AS(train_pruned(ds, cfg), std::runtime_error);

  for (const char* name : {"hydra", "quant", "hydrant"})
    CHECK(to_string(method_from_string(name)) == std::string(name));
  CHECK_THROWS_AS(method_from_string("rocket"), std::runtime_error);
  for (const char* name : {"auto", "ridge", "trees"})
    CHECK(to_string(classifier_kind_from_string(name)) == std::string(name));
  CHECK_THROWS_AS(classifier_kind_from_string("svm"), std::runtime_error);
}
