#pragma once

#include <cstdint>
#include <vector>

#include "tsckit/dataset.hpp"
#include "tsckit/io.hpp"
#include "tsckit/matrix.hpp"
#include "tsckit/set_index.hpp"

namespace tsckit {

enum class QuantRepresentation : uint8_t { Identity = 0, FirstDiff = 1, SecondDiff = 2, FourierMagnitude = 3 };

QuantRepresentation quant_representation_from_string(const std::string& s);
std::string to_string(QuantRepresentation rep);

// Representation lengths: identity l, first-diff l-1, second-diff l-2,
// Fourier magnitude floor(l/2)+1.
uint32_t representation_length(QuantRepresentation rep, uint32_t l);

struct QuantConfig {
  uint32_t depth = 6;             // dyadic interval depth
  uint32_t quantile_divisor = 4;  // v: interval timepoints per quantile
  std::vector<QuantRepresentation> representations = {
      QuantRepresentation::Identity, QuantRepresentation::FirstDiff, QuantRepresentation::SecondDiff,
      QuantRepresentation::FourierMagnitude};
};

// Largest depth whose identity tiles keep >= 2 timepoints.
uint32_t quant_depth_cap(uint32_t l);

// Default config with depth capped by quant_depth_cap.
QuantConfig quant_defaults_for_length(uint32_t l);

// One prunable feature set: an interval [start, end) of one representation of
// one channel, producing m = max(1, floor((end-start)/v)) quantile columns.
struct QuantInterval {
  QuantRepresentation rep;
  uint32_t channel = 0;
  uint32_t start = 0;
  uint32_t end = 0;
};

struct QuantTransform {
  QuantConfig cfg;
  uint32_t d = 0;
  uint32_t l = 0;
  std::vector<QuantInterval> rows;

  uint32_t row_quantiles(std::size_t idx) const {
    const uint32_t len = rows[idx].end - rows[idx].start;
    const uint32_t m = len / cfg.quantile_divisor;
    return m > 0 ? m : 1;
  }
  uint32_t set_count() const { return static_cast<uint32_t>(rows.size()); }
  uint32_t feature_count() const;
};

QuantTransform quant_fit(const QuantConfig& cfg, uint32_t d, uint32_t l);

FeatureMatrix quant_transform(const QuantTransform& t, const TimeSeriesDataset& ds, int threads = 1);
FeatureMatrix quant_transform_range(const QuantTransform& t, const TimeSeriesDataset& ds, std::size_t first,
                                    std::size_t count, int threads = 1);

// keep: row indices into the current transform. Representations with zero
// surviving rows are never computed (no derivative pass, no FFT).
QuantTransform quant_prune(const QuantTransform& t, const std::vector<uint32_t>& keep);

SetLayout quant_set_layout(const QuantTransform& t);

void quant_save(const QuantTransform& t, BlobWriter& w);
QuantTransform quant_load(BlobReader& r);

}  // namespace tsckit
