#pragma once

#include <cstdint>
#include <vector>

#include "tsckit/io.hpp"
#include "tsckit/matrix.hpp"

namespace tsckit {

// 10 log-spaced values in [1e-3, 1e3].
std::vector<double> default_ridge_lambdas();

struct RidgeOptions {
  std::vector<double> lambdas;  // empty -> default grid
  bool standardize = true;      // per-column (mean, scale); zero-variance columns get scale 1
  bool fit_intercept = true;
};

// One-vs-rest ridge: scores(z) = ((z - mean) / scale) * beta + intercept,
// label = argmax score (ties to lowest class id).
struct RidgeModel {
  uint32_t q = 0;
  uint32_t C = 0;
  double lambda = 0.0;
  std::vector<double> mean;       // q
  std::vector<double> scale;      // q
  FeatureMatrix beta;             // q x C
  std::vector<double> intercept;  // C
};

// Closed-form fit with lambda chosen by generalized cross-validation over the
// candidate list. Targets are +/-1 one-vs-rest. Uses the dual (n x n) Gram
// eigendecomposition when n <= q, primal (q x q) otherwise; lambda = 0 falls
// back to the pseudo-inverse (min-norm) solution.
RidgeModel ridge_fit(const FeatureMatrix& Z, const std::vector<uint32_t>& y, const RidgeOptions& opts = {});

FeatureMatrix ridge_scores(const RidgeModel& m, const FeatureMatrix& Z);
std::vector<uint32_t> ridge_predict(const RidgeModel& m, const FeatureMatrix& Z);

void ridge_save(const RidgeModel& m, BlobWriter& w);
RidgeModel ridge_load(BlobReader& r);

}  // namespace tsckit
