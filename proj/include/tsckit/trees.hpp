#pragma once

#include <cstdint>
#include <vector>

#include "tsckit/io.hpp"
#include "tsckit/matrix.hpp"

namespace tsckit {

struct TreesConfig {
  uint32_t n_trees = 100;             // M
  uint32_t candidate_features = 0;    // 0 -> ceil(sqrt(q)), resolved at fit
  uint32_t thresholds_per_candidate = 1;
  uint32_t min_samples_leaf = 1;
  uint64_t seed = 0;
};

// Preorder node. feature == -1 marks a leaf; proba is the class distribution
// over training instances in that leaf and is empty for split nodes. Values
// <= threshold route left, so both children of a split are non-empty.
struct TreeNode {
  int32_t feature = -1;
  double threshold = 0.0;
  uint32_t left = 0;
  uint32_t right = 0;
  std::vector<double> proba;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct TreeEnsemble {
  uint32_t q = 0;
  uint32_t C = 0;
  TreesConfig cfg;  // candidate_features resolved
  std::vector<Tree> trees;
};

// Extra-trees style fit: no bootstrap, candidate features sampled without
// replacement per node, uniform-random thresholds in the node's observed
// [min, max) per candidate, best split by gini gain. Per-tree seeds derive
// from cfg.seed, so results are independent of thread scheduling.
TreeEnsemble trees_fit(const FeatureMatrix& Z, const std::vector<uint32_t>& y, const TreesConfig& cfg = {},
                       int threads = 1);

FeatureMatrix trees_predict_proba(const TreeEnsemble& e, const FeatureMatrix& Z, int threads = 1);
std::vector<uint32_t> trees_predict(const TreeEnsemble& e, const FeatureMatrix& Z, int threads = 1);

void trees_save(const TreeEnsemble& e, BlobWriter& w);
TreeEnsemble trees_load(BlobReader& r);

}  // namespace tsckit
