#include "tsckit/pipeline.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include <json.hpp>

#include "tsckit/io.hpp"

namespace tsckit {

Method method_from_string(const std::string& s) {
  if (s == "hydra") return Method::Hydra;
  if (s == "quant") return Method::Quant;
  if (s == "hydrant") return Method::Hydrant;
  throw std::runtime_error("unknown method '" + s + "' (expected hydra, quant or hydrant)");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::Hydra: return "hydra";
    case Method::Quant: return "quant";
    case Method::Hydrant: return "hydrant";
  }
  throw std::runtime_error("invalid method value");
}

ClassifierKind classifier_kind_from_string(const std::string& s) {
  if (s == "auto") return ClassifierKind::Auto;
  if (s == "ridge") return ClassifierKind::Ridge;
  if (s == "trees") return ClassifierKind::Trees;
  throw std::runtime_error("unknown classifier kind '" + s + "' (expected auto, ridge or trees)");
}

std::string to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::Auto: return "auto";
    case ClassifierKind::Ridge: return "ridge";
    case ClassifierKind::Trees: return "trees";
  }
  throw std::runtime_error("invalid classifier kind value");
}

uint32_t PrunedPipeline::feature_count() const {
  uint32_t q = 0;
  if (hydra) q += hydra->feature_count();
  if (quant) q += quant->feature_count();
  return q;
}

uint32_t PrunedPipeline::n_classes() const {
  if (ridge) return ridge->C;
  if (trees) return trees->C;
  throw std::runtime_error("pipeline has no classifier");
}

namespace {

std::string origin_name(Origin o) { return o == Origin::Hydra ? "hydra" : "quant"; }

ClassifierKind resolve_classifier(Method method, ClassifierKind requested) {
  if (requested != ClassifierKind::Auto) return requested;
  return method == Method::Hydra ? ClassifierKind::Ridge : ClassifierKind::Trees;
}

struct FullTransforms {
  std::optional<HydraTransform> hydra;
  std::optional<QuantTransform> quant;
};

// Deterministic given (cfg, d, l): component seeds derive from the master seed.
FullTransforms fit_full_transforms(const PipelineConfig& cfg, uint32_t d, uint32_t l) {
  FullTransforms full;
  if (cfg.method == Method::Hydra || cfg.method == Method::Hydrant) {
    HydraConfig hc = cfg.hydra;
    hc.seed = mix_seed(cfg.seed, 1);
    full.hydra = hydra_fit(hc, d, l);
  }
  if (cfg.method == Method::Quant || cfg.method == Method::Hydrant) {
    QuantConfig qc = cfg.quant;
    qc.depth = std::min(qc.depth, quant_depth_cap(l));
    full.quant = quant_fit(qc, d, l);
  }
  return full;
}

FeatureMatrix full_features(const FullTransforms& full, const TimeSeriesDataset& ds, int threads,
                            SetLayout* layout_out) {
  FeatureMatrix Z;
  SetLayout layout;
  if (full.hydra) {
    Z = hydra_transform(*full.hydra, ds, threads);
    layout = hydra_set_layout(*full.hydra);
  }
  if (full.quant) {
    FeatureMatrix Zq = quant_transform(*full.quant, ds, threads);
    if (full.hydra) {
      layout = concat_layouts(layout, quant_set_layout(*full.quant), static_cast<uint32_t>(Z.cols));
      Z = Z.hcat(Zq);
    } else {
      layout = quant_set_layout(*full.quant);
      Z = std::move(Zq);
    }
  }
  if (layout_out != nullptr) *layout_out = std::move(layout);
  return Z;
}

}  // namespace

PrunedPipeline train_pruned(const TimeSeriesDataset& train, const PipelineConfig& cfg) {
  validate_dataset(train);
  if (!(cfg.zeta >= 0.0 && cfg.zeta < 1.0)) throw std::runtime_error("prune rate zeta must be in [0, 1)");

  PrunedPipeline p;
  p.method = cfg.method;
  p.cfg = cfg;
  p.classifier_kind = resolve_classifier(cfg.method, cfg.final_classifier);

  const bool use_hydra = cfg.method == Method::Hydra || cfg.method == Method::Hydrant;
  const bool use_quant = cfg.method == Method::Quant || cfg.method == Method::Hydrant;

  const FullTransforms full = fit_full_transforms(cfg, train.d, train.l);
  SetLayout layout;
  FeatureMatrix Z = full_features(full, train, cfg.threads, &layout);

  // temporary ridge f' on the full concatenated features, GCV-selected lambda
  RidgeModel temp = ridge_fit(Z, train.labels, RidgeOptions{});
  p.prov.temp_lambda = temp.lambda;
  p.prov.importances = mean_set_importance(temp.beta, layout, cfg.importance_absolute);
  p.prov.decision = select_top_sets(p.prov.importances, cfg.zeta);
  for (const OriginSelection& sel : p.prov.decision.origins) {
    if (std::floor((1.0 - cfg.zeta) * double(sel.total) + 0.5) < 1.0)
      std::cerr << "warning: prune rate " << cfg.zeta << " rounds to zero " << origin_name(sel.origin)
                << " sets; keeping 1\n";
  }
  p.prov.temp_model = std::move(temp);

  FeatureMatrix Zp;
  if (use_hydra) {
    const OriginSelection* sel = p.prov.decision.find(Origin::Hydra);
    p.hydra = hydra_prune(*full.hydra, sel->kept);
    Zp = hydra_transform(*p.hydra, train, cfg.threads);
  }
  if (use_quant) {
    const OriginSelection* sel = p.prov.decision.find(Origin::Quant);
    p.quant = quant_prune(*full.quant, sel->kept);
    FeatureMatrix Zq = quant_transform(*p.quant, train, cfg.threads);
    Zp = use_hydra ? Zp.hcat(Zq) : std::move(Zq);
  }

  if (p.classifier_kind == ClassifierKind::Ridge) {
    p.ridge = ridge_fit(Zp, train.labels, cfg.ridge);
  } else {
    TreesConfig tc = cfg.trees;
    tc.seed = mix_seed(cfg.seed, 2);
    p.trees = trees_fit(Zp, train.labels, tc, cfg.threads);
  }
  return p;
}

FeatureMatrix pipeline_transform_range(const PrunedPipeline& p, const TimeSeriesDataset& ds, std::size_t first,
                                       std::size_t count, int threads) {
  if (!p.hydra && !p.quant) throw std::runtime_error("pipeline has no transforms");
  FeatureMatrix Z;
  if (p.hydra) Z = hydra_transform_range(*p.hydra, ds, first, count, threads);
  if (p.quant) {
    FeatureMatrix Zq = quant_transform_range(*p.quant, ds, first, count, threads);
    Z = p.hydra ? Z.hcat(Zq) : std::move(Zq);
  }
  return Z;
}

FeatureMatrix pipeline_transform(const PrunedPipeline& p, const TimeSeriesDataset& ds, int threads) {
  return pipeline_transform_range(p, ds, 0, ds.n, threads);
}

std::vector<uint32_t> pipeline_predict(const PrunedPipeline& p, const TimeSeriesDataset& ds, int threads) {
  const FeatureMatrix Z = pipeline_transform(p, ds, threads);
  if (p.ridge) return ridge_predict(*p.ridge, Z);
  if (p.trees) return trees_predict(*p.trees, Z, threads);
  throw std::runtime_error("pipeline has no classifier");
}

BoundReport pipeline_bound_report(const PrunedPipeline& p, const TimeSeriesDataset& train) {
  if (!p.prov.temp_model)
    throw std::runtime_error("bound report requires the in-memory temporary model (not available after load)");
  const FullTransforms full = fit_full_transforms(p.cfg, train.d, train.l);
  SetLayout layout;
  const FeatureMatrix Z = full_features(full, train, p.cfg.threads, &layout);
  return pruning_error_bound(*p.prov.temp_model, layout, p.prov.decision, Z, Z);
}

SetLayout pipeline_set_layout(const PrunedPipeline& p) {
  SetLayout layout;
  if (p.hydra) layout = hydra_set_layout(*p.hydra);
  if (p.quant) {
    const uint32_t off = p.hydra ? p.hydra->feature_count() : 0;
    layout = p.hydra ? concat_layouts(layout, quant_set_layout(*p.quant), off) : quant_set_layout(*p.quant);
  }
  return layout;
}

static constexpr char kPipelineMagic[] = "TSPL";
static constexpr uint32_t kPipelineVersion = 1;

void pipeline_save(const PrunedPipeline& p, const std::filesystem::path& path) {
  BlobWriter w;
  w.magic(kPipelineMagic);
  w.u32(kPipelineVersion);
  w.u8(static_cast<uint8_t>(p.method));
  w.u8(static_cast<uint8_t>(p.classifier_kind));
  w.u8(p.hydra ? 1 : 0);
  if (p.hydra) hydra_save(*p.hydra, w);
  w.u8(p.quant ? 1 : 0);
  if (p.quant) quant_save(*p.quant, w);
  if (p.ridge) {
    w.u8(1);
    ridge_save(*p.ridge, w);
  } else if (p.trees) {
    w.u8(2);
    trees_save(*p.trees, w);
  } else {
    throw std::runtime_error("pipeline has no classifier");
  }

  nlohmann::json prov;
  prov["zeta"] = p.prov.decision.zeta;
  prov["seed"] = p.cfg.seed;
  prov["temp_lambda"] = p.prov.temp_lambda;
  prov["importance_absolute"] = p.cfg.importance_absolute;
  prov["kept"] = nlohmann::json::object();
  prov["set_totals"] = nlohmann::json::object();
  for (const OriginSelection& sel : p.prov.decision.origins) {
    prov["kept"][origin_name(sel.origin)] = sel.kept;
    prov["set_totals"][origin_name(sel.origin)] = sel.total;
  }
  nlohmann::json imps = nlohmann::json::array();
  for (const ImportanceEntry& e : p.prov.importances.entries) {
    imps.push_back({{"origin", origin_name(e.origin)},
                    {"set", e.set_id},
                    {"value", e.importance},
                    {"members", e.member_count}});
  }
  prov["importances"] = std::move(imps);
  w.str(prov.dump());

  write_binary_file(path, w.buffer());
}

PrunedPipeline pipeline_load(const std::filesystem::path& path) {
  const std::string bytes = read_binary_file(path);
  BlobReader r(bytes);
  r.expect_magic(kPipelineMagic);
  const uint32_t version = r.u32();
  if (version != kPipelineVersion)
    throw std::runtime_error("unsupported pipeline version " + std::to_string(version));

  PrunedPipeline p;
  p.method = static_cast<Method>(r.u8());
  p.classifier_kind = static_cast<ClassifierKind>(r.u8());
  if (r.u8()) p.hydra = hydra_load(r);
  if (r.u8()) p.quant = quant_load(r);
  const uint8_t clf = r.u8();
  if (clf == 1)
    p.ridge = ridge_load(r);
  else if (clf == 2)
    p.trees = trees_load(r);
  else
    throw std::runtime_error("pipeline blob has unknown classifier tag");

  const nlohmann::json prov = nlohmann::json::parse(r.str());
  p.cfg.method = p.method;
  p.cfg.zeta = prov.at("zeta").get<double>();
  p.cfg.seed = prov.at("seed").get<uint64_t>();
  p.cfg.importance_absolute = prov.at("importance_absolute").get<bool>();
  p.prov.temp_lambda = prov.at("temp_lambda").get<double>();
  p.prov.decision.zeta = p.cfg.zeta;
  for (Origin origin : {Origin::Hydra, Origin::Quant}) {
    const std::string key = origin_name(origin);
    if (!prov.at("kept").contains(key)) continue;
    OriginSelection sel;
    sel.origin = origin;
    sel.kept = prov.at("kept").at(key).get<std::vector<uint32_t>>();
    sel.total = prov.at("set_totals").at(key).get<uint32_t>();
    sel.r = static_cast<uint32_t>(sel.kept.size());
    p.prov.decision.origins.push_back(std::move(sel));
  }
  for (const nlohmann::json& e : prov.at("importances")) {
    ImportanceEntry entry;
    entry.origin = e.at("origin").get<std::string>() == "hydra" ? Origin::Hydra : Origin::Quant;
    entry.set_id = e.at("set").get<uint32_t>();
    entry.importance = e.at("value").get<double>();
    entry.member_count = e.at("members").get<uint32_t>();
    p.prov.importances.entries.push_back(entry);
  }
  if (!r.done()) throw std::runtime_error("pipeline blob has trailing bytes");
  return p;
}

}  // namespace tsckit
