#include "tsckit/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tsckit {

namespace {

void check_partition(const SetLayout& layout, std::size_t q) {
  std::vector<std::pair<uint32_t, uint32_t>> spans;
  spans.reserve(layout.size());
  uint64_t total = 0;
  for (const SetSpan& s : layout) {
    if (s.count == 0) throw std::runtime_error("set layout contains an empty set");
    spans.emplace_back(s.offset, s.count);
    total += s.count;
  }
  std::sort(spans.begin(), spans.end());
  uint32_t cursor = 0;
  for (const auto& [off, cnt] : spans) {
    if (off != cursor) throw std::runtime_error("set layout does not partition the feature columns");
    cursor = off + cnt;
  }
  if (total != q || cursor != q) throw std::runtime_error("set layout does not cover all feature columns");
}

}  // namespace

SetImportance mean_set_importance(const FeatureMatrix& beta, const SetLayout& layout, bool absolute) {
  check_partition(layout, beta.rows);
  SetImportance imp;
  imp.entries.reserve(layout.size());
  for (const SetSpan& s : layout) {
    double acc = 0.0;
    for (uint32_t j = s.offset; j < s.offset + s.count; ++j) {
      double class_mean = 0.0;
      for (std::size_t c = 0; c < beta.cols; ++c)
        class_mean += absolute ? std::abs(beta.at(j, c)) : beta.at(j, c);
      acc += class_mean / double(beta.cols);
    }
    ImportanceEntry e;
    e.set_id = s.set_id;
    e.origin = s.origin;
    e.importance = acc / double(s.count);
    e.member_count = s.count;
    if (!std::isfinite(e.importance)) throw std::runtime_error("non-finite set importance");
    imp.entries.push_back(e);
  }
  return imp;
}

uint32_t kept_count(uint32_t S, double zeta) {
  if (S == 0) return 0;
  const double raw = (1.0 - zeta) * double(S);
  uint32_t r = static_cast<uint32_t>(std::floor(raw + 0.5));
  if (r < 1) r = 1;
  if (r > S) r = S;
  return r;
}

PruneDecision select_top_sets(const SetImportance& imp, double zeta) {
  if (!(zeta >= 0.0 && zeta < 1.0)) throw std::runtime_error("prune rate zeta must be in [0, 1)");
  PruneDecision d;
  d.zeta = zeta;
  for (Origin origin : {Origin::Hydra, Origin::Quant}) {
    std::vector<const ImportanceEntry*> pool;
    for (const ImportanceEntry& e : imp.entries)
      if (e.origin == origin) pool.push_back(&e);
    if (pool.empty()) continue;
    std::sort(pool.begin(), pool.end(), [](const ImportanceEntry* a, const ImportanceEntry* b) {
      if (a->importance != b->importance) return a->importance > b->importance;
      return a->set_id < b->set_id;
    });
    OriginSelection sel;
    sel.origin = origin;
    sel.total = static_cast<uint32_t>(pool.size());
    sel.r = kept_count(sel.total, zeta);
    sel.kept.reserve(sel.r);
    for (uint32_t i = 0; i < sel.r; ++i) sel.kept.push_back(pool[i]->set_id);
    std::sort(sel.kept.begin(), sel.kept.end());
    d.origins.push_back(std::move(sel));
  }
  return d;
}

namespace {

std::vector<uint32_t> filter_columns(const SetLayout& layout, const PruneDecision& d, bool want_kept) {
  std::vector<uint32_t> cols;
  for (const SetSpan& s : layout) {
    const OriginSelection* sel = d.find(s.origin);
    const bool kept = sel != nullptr && std::binary_search(sel->kept.begin(), sel->kept.end(), s.set_id);
    if (kept == want_kept)
      for (uint32_t j = 0; j < s.count; ++j) cols.push_back(s.offset + j);
  }
  std::sort(cols.begin(), cols.end());
  return cols;
}

}  // namespace

std::vector<uint32_t> kept_columns(const SetLayout& layout, const PruneDecision& d) {
  return filter_columns(layout, d, true);
}

std::vector<uint32_t> dropped_columns(const SetLayout& layout, const PruneDecision& d) {
  return filter_columns(layout, d, false);
}

namespace {

double empirical_feature_bound(const RidgeModel& f, const FeatureMatrix& Z_train) {
  double B = 0.0;
  for (std::size_t i = 0; i < Z_train.rows; ++i) {
    const double* row = Z_train.row(i);
    for (std::size_t j = 0; j < Z_train.cols; ++j)
      B = std::max(B, std::abs((row[j] - f.mean[j]) / f.scale[j]));
  }
  return B;
}

}  // namespace

BoundReport pruning_error_bound(const RidgeModel& f, const SetLayout& layout, const PruneDecision& decision,
                                const FeatureMatrix& Z_train, const FeatureMatrix& Z_eval) {
  if (Z_train.cols != f.q) throw std::runtime_error("pruning_error_bound: training features do not match model");
  if (Z_eval.cols != f.q) throw std::runtime_error("pruning_error_bound: evaluation features do not match model");
  check_partition(layout, f.q);

  const std::vector<uint32_t> dropped = dropped_columns(layout, decision);
  BoundReport report;
  report.B = empirical_feature_bound(f, Z_train);
  report.pruned_mass.assign(f.C, 0.0);
  for (uint32_t j : dropped)
    for (uint32_t c = 0; c < f.C; ++c) report.pruned_mass[c] += std::abs(f.beta.at(j, c));
  report.bound.resize(f.C);
  for (uint32_t c = 0; c < f.C; ++c) report.bound[c] = report.B * report.pruned_mass[c];

  // |full - pruned| per class reduces to |sum over dropped j of zs_j * beta_jc|.
  report.deviation.assign(f.C, 0.0);
  for (std::size_t i = 0; i < Z_eval.rows; ++i) {
    const double* row = Z_eval.row(i);
    for (uint32_t c = 0; c < f.C; ++c) {
      double delta = 0.0;
      for (uint32_t j : dropped) delta += ((row[j] - f.mean[j]) / f.scale[j]) * f.beta.at(j, c);
      report.deviation[c] = std::max(report.deviation[c], std::abs(delta));
    }
  }
  report.satisfied = true;
  for (uint32_t c = 0; c < f.C; ++c)
    if (report.deviation[c] > report.bound[c] + 1e-6 * (1.0 + report.bound[c])) report.satisfied = false;
  return report;
}

BoundReport pruning_error_bound(const RidgeModel& f, const SetLayout& layout, const PruneDecision& decision,
                                const FeatureMatrix& Z_train) {
  return pruning_error_bound(f, layout, decision, Z_train, Z_train);
}

double sorted_tail_bound(const RidgeModel& f, const SetLayout& layout, uint32_t r, const FeatureMatrix& Z_train) {
  check_partition(layout, f.q);
  if (r > layout.size())
    throw std::runtime_error("sorted_tail_bound: r exceeds the number of feature sets");
  const SetImportance imp = mean_set_importance(f.beta, layout);

  std::vector<std::size_t> order(layout.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (imp.entries[a].importance != imp.entries[b].importance)
      return imp.entries[a].importance > imp.entries[b].importance;
    return a < b;  // layout position; set ids repeat across origins
  });

  const double B = empirical_feature_bound(f, Z_train);
  double mass = 0.0;
  for (std::size_t k = r; k < order.size(); ++k) {
    const SetSpan& s = layout[order[k]];
    for (uint32_t j = s.offset; j < s.offset + s.count; ++j)
      for (uint32_t c = 0; c < f.C; ++c) mass += std::abs(f.beta.at(j, c));
  }
  return B * mass;
}

}  // namespace tsckit
