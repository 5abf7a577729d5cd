#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace tsckit {

// A labeled collection of n multivariate series with d channels of length l.
// Values are stored instance-major: values[((i*d)+j)*l + t].
//
// On disk a dataset is a directory with
//   meta.json   {"n":int,"d":int,"l":int,"C":int,"F":int,"name":string}
//   data.f32    n*d*l little-endian float32
//   labels.u32  n little-endian uint32, each in [0, C)
//   folds.u32   n little-endian uint32, each in [0, F); optional when F == 1
struct TimeSeriesDataset {
  std::string name;
  uint32_t n = 0;  // instances
  uint32_t d = 0;  // channels
  uint32_t l = 0;  // series length
  uint32_t C = 0;  // classes
  uint32_t F = 1;  // folds
  std::vector<float> values;
  std::vector<uint32_t> labels;
  std::vector<uint32_t> folds;

  const float* series(std::size_t i) const { return values.data() + i * d * l; }
  const float* channel(std::size_t i, std::size_t j) const { return series(i) + j * l; }

  bool operator==(const TimeSeriesDataset&) const = default;
};

enum class SyntheticKind { SinusoidFrequency, TrendSlope, GaussianShift };

SyntheticKind synthetic_kind_from_string(const std::string& s);
std::string to_string(SyntheticKind kind);

// Desk-scale stand-in for large TSC corpora: class k gets a distinct signal
// parameter (frequency, slope or mean level), labels are balanced round-robin
// and folds are assigned stratified round-robin within each class.
struct SyntheticSpec {
  uint32_t n = 40;
  uint32_t d = 1;
  uint32_t l = 64;
  uint32_t C = 2;
  SyntheticKind kind = SyntheticKind::SinusoidFrequency;
  double noise = 0.1;
  uint64_t seed = 0;
  uint32_t folds = 5;
  std::string name = "synthetic";
};

// Throws std::runtime_error naming the offending field when an invariant is
// violated (label range, NaN values, fold range, missing class, empty set).
void validate_dataset(const TimeSeriesDataset& ds);

TimeSeriesDataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const TimeSeriesDataset& ds, const std::filesystem::path& dir);

TimeSeriesDataset generate_synthetic(const SyntheticSpec& spec);

// test = instances of fold_id, train = the rest. Requires F >= 2, a non-empty
// test split and all C classes present in train.
std::pair<TimeSeriesDataset, TimeSeriesDataset> split_folds(const TimeSeriesDataset& ds, uint32_t fold_id);

// Per-instance, per-channel z-normalization (explicit, never implicit).
TimeSeriesDataset normalize_per_channel(const TimeSeriesDataset& ds);

// Contiguous instance range [first, first+count); used for batched inference.
// Carries labels/folds through but does not require full class coverage.
TimeSeriesDataset slice_instances(const TimeSeriesDataset& ds, std::size_t first, std::size_t count);

}  // namespace tsckit
