#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "tsckit/matrix.hpp"

namespace tsckit {

enum class PropertyGroup : uint8_t { Quality, Resources };

// sigma = +1: lower is better (resources); sigma = -1: higher is better.
struct PropertySpec {
  std::string name;
  int sigma = +1;
  PropertyGroup group = PropertyGroup::Resources;
};

struct MeasurementRecord {
  std::string model;
  std::string config;  // dataset x environment x hyperparameters
  std::string property;
  double value = 0.0;
};

using WeightVector = std::map<std::string, double>;  // property -> omega, sums to 1

// The five quality metrics (higher better) plus the two per-sample inference
// resource properties (lower better) emitted by the bench harness.
std::vector<PropertySpec> default_property_specs();

// accuracy, balanced-accuracy (mean per-class recall), f1-weighted, f1-macro,
// f1-micro. n_classes fixes the label universe (0 -> max label + 1); classes
// absent from y_true count as recall/F1 zero in the macro averages.
std::map<std::string, double> quality_metrics(const std::vector<uint32_t>& y_true,
                                              const std::vector<uint32_t>& y_pred, uint32_t n_classes = 0);

// Index scaling within one (property, config) group: the best model is the
// argmin of value * sigma; scaled = (best / value)^sigma, in (0, 1] for
// positive inputs, 1 for the best model(s).
std::map<std::string, double> index_scale(const std::vector<MeasurementRecord>& records, int sigma);

// Equal split of 0.5 within the quality group and 0.5 within the resources
// group; if one group is absent the other shares the full weight.
WeightVector default_weights(const std::vector<PropertySpec>& specs);

// S(f,c) = sum omega_i * scaled_i; weights must cover exactly the given
// properties and satisfy the simplex invariant.
double compound_score(const std::map<std::string, double>& scaled, const WeightVector& weights);

struct RankReport {
  std::vector<double> mean_ranks;  // per model (row), rank 1 = best
  double friedman_chi2 = 0.0;
  double critical_distance = 0.0;  // Nemenyi, alpha = 0.05
};

// scores: models (rows) x configs (columns), higher is better. Per config,
// models are ranked 1..m with ties averaged.
RankReport mean_ranks(const FeatureMatrix& scores);

std::vector<MeasurementRecord> read_measurements_jsonl(const std::filesystem::path& path);
void write_measurements_jsonl(const std::filesystem::path& path, const std::vector<MeasurementRecord>& records,
                              bool append = true);

// Full comparison report over a complete measurement table.
struct Report {
  std::vector<std::string> models;
  std::vector<std::string> configs;
  std::vector<PropertySpec> properties;
  std::vector<MeasurementRecord> raw;                 // one per (model, config, property)
  std::map<std::string, std::map<std::string, std::map<std::string, double>>> scaled;  // config -> model -> property
  FeatureMatrix compound;                             // models x configs
  RankReport ranks;
};

Report build_report(const std::vector<MeasurementRecord>& records, const std::vector<PropertySpec>& specs,
                    const WeightVector& weights);

void write_scaled_csv(const Report& r, const std::filesystem::path& path);
void write_compound_csv(const Report& r, const std::filesystem::path& path);
void write_ranks_csv(const Report& r, const std::filesystem::path& path);

}  // namespace tsckit
