#pragma once

#include <cstdint>
#include <vector>

#include "tsckit/dataset.hpp"
#include "tsckit/io.hpp"
#include "tsckit/matrix.hpp"
#include "tsckit/set_index.hpp"

namespace tsckit {

struct HydraConfig {
  uint32_t groups = 64;            // g
  uint32_t kernels_per_group = 8;  // k, >= 2 (competition needs >= 2 kernels)
  uint32_t kernel_length = 9;      // odd, >= 3
  uint64_t seed = 0;
  int max_dilation_exponent = -1;  // < 0: uncapped
};

// One prunable feature set: a (group, dilation) pair producing 3k columns
// (k hard-max counts, k soft-max sums, k hard-min counts).
struct HydraSet {
  uint32_t original_id = 0;  // set id at fit time, before any pruning
  uint32_t group = 0;
  uint32_t dilation_index = 0;
};

// Frozen Hydra state: groups of competing random convolution kernels applied
// at exponentially spaced dilations. Features count, per timepoint, which
// kernel in a group responds strongest/weakest (ties to the lowest kernel
// index) and accumulate the winning responses.
struct HydraTransform {
  HydraConfig cfg;
  uint32_t d = 0;
  uint32_t l = 0;
  uint32_t channels_per_group = 1;
  std::vector<double> weights;            // groups * k * kernel_length, mean-centered per kernel
  std::vector<uint32_t> dilations;        // full dilation list from fit
  std::vector<uint32_t> group_channels;   // groups * channels_per_group
  std::vector<HydraSet> sets;             // active sets, ascending original_id
  uint32_t total_sets_at_fit = 0;

  uint32_t features_per_set() const { return 3 * cfg.kernels_per_group; }
  uint32_t set_count() const { return static_cast<uint32_t>(sets.size()); }
  uint32_t feature_count() const { return set_count() * features_per_set(); }
  const double* kernel(uint32_t group, uint32_t j) const {
    return weights.data() + (std::size_t(group) * cfg.kernels_per_group + j) * cfg.kernel_length;
  }
};

HydraTransform hydra_fit(const HydraConfig& cfg, uint32_t d, uint32_t l);

FeatureMatrix hydra_transform(const HydraTransform& t, const TimeSeriesDataset& ds, int threads = 1);
FeatureMatrix hydra_transform_range(const HydraTransform& t, const TimeSeriesDataset& ds, std::size_t first,
                                    std::size_t count, int threads = 1);

// keep: set indices into the current transform's set list. The result computes
// exactly those sets' columns, in ascending original id order; dropped sets'
// convolutions are never executed.
HydraTransform hydra_prune(const HydraTransform& t, const std::vector<uint32_t>& keep);

SetLayout hydra_set_layout(const HydraTransform& t);

void hydra_save(const HydraTransform& t, BlobWriter& w);
HydraTransform hydra_load(BlobReader& r);

}  // namespace tsckit
