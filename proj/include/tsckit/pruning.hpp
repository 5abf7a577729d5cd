#pragma once

#include <cstdint>
#include <vector>

#include "tsckit/matrix.hpp"
#include "tsckit/ridge.hpp"
#include "tsckit/set_index.hpp"

namespace tsckit {

struct ImportanceEntry {
  uint32_t set_id = 0;
  Origin origin = Origin::Hydra;
  double importance = 0.0;  // >= 0 when absolute
  uint32_t member_count = 0;
};

struct SetImportance {
  std::vector<ImportanceEntry> entries;  // one per layout span, layout order
};

// beta-bar per set: mean over member features of mean over classes of |beta|
// (signed means behind absolute=false). layout must partition [0, beta.rows).
SetImportance mean_set_importance(const FeatureMatrix& beta, const SetLayout& layout, bool absolute = true);

// clamp(round-half-up((1 - zeta) * S), 1, S)
uint32_t kept_count(uint32_t S, double zeta);

struct OriginSelection {
  Origin origin = Origin::Hydra;
  uint32_t total = 0;  // S for this origin
  uint32_t r = 0;
  std::vector<uint32_t> kept;  // ascending set ids
};

struct PruneDecision {
  double zeta = 0.0;
  std::vector<OriginSelection> origins;

  const OriginSelection* find(Origin o) const {
    for (const OriginSelection& sel : origins)
      if (sel.origin == o) return &sel;
    return nullptr;
  }
};

// Per origin independently: sort by importance descending (ties to lower set
// id), keep the first kept_count(S_origin, zeta).
PruneDecision select_top_sets(const SetImportance& imp, double zeta);

// Feature columns of kept / dropped sets, in original column order.
std::vector<uint32_t> kept_columns(const SetLayout& layout, const PruneDecision& d);
std::vector<uint32_t> dropped_columns(const SetLayout& layout, const PruneDecision& d);

struct BoundReport {
  double B = 0.0;                   // empirical-domain sup of |standardized feature| on the training set
  std::vector<double> pruned_mass;  // per class: sum of |beta| over dropped coefficients
  std::vector<double> bound;        // per class: B * pruned_mass
  std::vector<double> deviation;    // per class: sup over eval set of |full score - pruned score|
  bool satisfied = true;            // every class: deviation <= bound + 1e-6 * (1 + bound)
};

// Executable check of the uniform pruning-error bound for the linear model:
// the pruned score zeroes the dropped coefficients and keeps everything else.
BoundReport pruning_error_bound(const RidgeModel& f, const SetLayout& layout, const PruneDecision& decision,
                                const FeatureMatrix& Z_train, const FeatureMatrix& Z_eval);
BoundReport pruning_error_bound(const RidgeModel& f, const SetLayout& layout, const PruneDecision& decision,
                                const FeatureMatrix& Z_train);

// B * (coefficient mass of the S - r lowest-importance sets); mass counts
// |beta| across all classes. Monotone nonincreasing in r.
double sorted_tail_bound(const RidgeModel& f, const SetLayout& layout, uint32_t r, const FeatureMatrix& Z_train);

}  // namespace tsckit
