#include "tsckit/trees.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "tsckit/parallel.hpp"

namespace tsckit {

namespace {

double gini(const std::vector<double>& counts, double total) {
  double g = 1.0;
  for (double c : counts) {
    const double p = c / total;
    g -= p * p;
  }
  return g;
}

struct TreeBuilder {
  const FeatureMatrix& Z;
  const std::vector<uint32_t>& y;
  uint32_t C;
  const TreesConfig& cfg;
  std::mt19937_64 rng;
  Tree tree;
  std::vector<uint32_t> feature_pool;  // partially shuffled per node
  std::vector<double> left_counts;
  std::vector<double> node_counts;

  TreeBuilder(const FeatureMatrix& z, const std::vector<uint32_t>& labels, uint32_t n_classes,
              const TreesConfig& config, uint64_t seed)
      : Z(z), y(labels), C(n_classes), cfg(config), rng(seed) {
    feature_pool.resize(Z.cols);
    for (std::size_t j = 0; j < Z.cols; ++j) feature_pool[j] = static_cast<uint32_t>(j);
    left_counts.resize(C);
    node_counts.resize(C);
  }

  uint32_t make_leaf(const std::vector<uint32_t>& idx) {
    TreeNode node;
    node.proba.assign(C, 0.0);
    for (uint32_t i : idx) node.proba[y[i]] += 1.0;
    for (double& p : node.proba) p /= double(idx.size());
    tree.nodes.push_back(std::move(node));
    return static_cast<uint32_t>(tree.nodes.size() - 1);
  }

  uint32_t build(std::vector<uint32_t>& idx) {
    std::fill(node_counts.begin(), node_counts.end(), 0.0);
    for (uint32_t i : idx) node_counts[y[i]] += 1.0;
    bool pure = false;
    for (double c : node_counts)
      if (c == double(idx.size())) pure = true;
    if (pure || idx.size() < 2 * std::size_t(cfg.min_samples_leaf) || idx.size() < 2) return make_leaf(idx);

    const double parent_gini = gini(node_counts, double(idx.size()));
    const uint32_t n_candidates = std::min<uint32_t>(cfg.candidate_features, static_cast<uint32_t>(Z.cols));
    double best_gain = -1.0;
    int32_t best_feature = -1;
    double best_threshold = 0.0;

    for (uint32_t c = 0; c < n_candidates; ++c) {
      // sample without replacement via partial Fisher-Yates
      const std::size_t pick = c + std::uniform_int_distribution<std::size_t>(0, Z.cols - 1 - c)(rng);
      std::swap(feature_pool[c], feature_pool[pick]);
      const uint32_t f = feature_pool[c];

      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (uint32_t i : idx) {
        const double v = Z.at(i, f);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (!(hi > lo)) continue;  // constant in this node

      for (uint32_t t = 0; t < cfg.thresholds_per_candidate; ++t) {
        double thr = lo + std::uniform_real_distribution<double>(0.0, 1.0)(rng) * (hi - lo);
        if (thr >= hi) thr = std::nextafter(hi, lo);  // keep the max strictly right
        std::fill(left_counts.begin(), left_counts.end(), 0.0);
        double n_left = 0.0;
        for (uint32_t i : idx) {
          if (Z.at(i, f) <= thr) {
            left_counts[y[i]] += 1.0;
            n_left += 1.0;
          }
        }
        const double n_right = double(idx.size()) - n_left;
        if (n_left < cfg.min_samples_leaf || n_right < cfg.min_samples_leaf) continue;
        double right_gini = 1.0;
        {
          double acc = 0.0;
          for (uint32_t k = 0; k < C; ++k) {
            const double r = node_counts[k] - left_counts[k];
            acc += r * r;
          }
          right_gini = 1.0 - acc / (n_right * n_right);
        }
        const double gain =
            parent_gini - (n_left * gini(left_counts, n_left) + n_right * right_gini) / double(idx.size());
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int32_t>(f);
          best_threshold = thr;
        }
      }
    }

    if (best_feature < 0) return make_leaf(idx);

    std::vector<uint32_t> left_idx, right_idx;
    left_idx.reserve(idx.size());
    right_idx.reserve(idx.size());
    for (uint32_t i : idx)
      (Z.at(i, uint32_t(best_feature)) <= best_threshold ? left_idx : right_idx).push_back(i);

    const uint32_t node_id = static_cast<uint32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[node_id].feature = best_feature;
    tree.nodes[node_id].threshold = best_threshold;
    idx.clear();
    idx.shrink_to_fit();
    const uint32_t left_id = build(left_idx);
    const uint32_t right_id = build(right_idx);
    tree.nodes[node_id].left = left_id;
    tree.nodes[node_id].right = right_id;
    return node_id;
  }
};

}  // namespace

TreeEnsemble trees_fit(const FeatureMatrix& Z, const std::vector<uint32_t>& y, const TreesConfig& cfg, int threads) {
  const std::size_t n = Z.rows;
  if (n < 2) throw std::runtime_error("trees_fit requires at least 2 training instances");
  if (y.size() != n) throw std::runtime_error("trees_fit: label count does not match feature rows");
  if (Z.cols == 0) throw std::runtime_error("trees_fit: feature matrix has no columns");
  if (cfg.n_trees < 1) throw std::runtime_error("trees_fit: ensemble size must be >= 1");
  if (cfg.thresholds_per_candidate < 1) throw std::runtime_error("trees_fit: thresholds_per_candidate must be >= 1");
  if (cfg.min_samples_leaf < 1) throw std::runtime_error("trees_fit: min_samples_leaf must be >= 1");
  uint32_t C = 0;
  for (uint32_t label : y) C = std::max(C, label + 1);
  bool single_class = true;
  for (uint32_t label : y)
    if (label != y[0]) { single_class = false; break; }
  if (C < 2 || single_class) throw std::runtime_error("trees_fit requires at least 2 distinct classes");

  TreeEnsemble e;
  e.q = static_cast<uint32_t>(Z.cols);
  e.C = C;
  e.cfg = cfg;
  if (e.cfg.candidate_features == 0)
    e.cfg.candidate_features = static_cast<uint32_t>(std::ceil(std::sqrt(double(Z.cols))));
  e.trees.resize(cfg.n_trees);

  parallel_for(cfg.n_trees, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t t = begin; t < end; ++t) {
      TreeBuilder builder(Z, y, C, e.cfg, mix_seed(cfg.seed, t));
      std::vector<uint32_t> idx(n);
      for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<uint32_t>(i);
      builder.build(idx);
      e.trees[t] = std::move(builder.tree);
    }
  });
  return e;
}

FeatureMatrix trees_predict_proba(const TreeEnsemble& e, const FeatureMatrix& Z, int threads) {
  if (Z.cols != e.q)
    throw std::runtime_error("trees_predict: feature count " + std::to_string(Z.cols) +
                             " does not match model (q=" + std::to_string(e.q) + ")");
  FeatureMatrix out(Z.rows, e.C);
  parallel_for(Z.rows, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double* z = Z.row(i);
      double* dst = out.row(i);
      for (const Tree& tree : e.trees) {
        std::size_t node = 0;
        while (tree.nodes[node].feature >= 0) {
          const TreeNode& nd = tree.nodes[node];
          node = z[nd.feature] <= nd.threshold ? nd.left : nd.right;
        }
        const std::vector<double>& p = tree.nodes[node].proba;
        for (uint32_t c = 0; c < e.C; ++c) dst[c] += p[c];
      }
      for (uint32_t c = 0; c < e.C; ++c) dst[c] /= double(e.trees.size());
    }
  });
  return out;
}

std::vector<uint32_t> trees_predict(const TreeEnsemble& e, const FeatureMatrix& Z, int threads) {
  return argmax_rows(trees_predict_proba(e, Z, threads));
}

static constexpr char kTreesMagic[] = "TREN";
static constexpr uint32_t kTreesVersion = 1;

void trees_save(const TreeEnsemble& e, BlobWriter& w) {
  w.magic(kTreesMagic);
  w.u32(kTreesVersion);
  w.u32(e.q);
  w.u32(e.C);
  w.u32(e.cfg.n_trees);
  w.u32(e.cfg.candidate_features);
  w.u32(e.cfg.thresholds_per_candidate);
  w.u32(e.cfg.min_samples_leaf);
  w.u64(e.cfg.seed);
  w.u64(e.trees.size());
  for (const Tree& tree : e.trees) {
    w.u64(tree.nodes.size());
    for (const TreeNode& nd : tree.nodes) {
      w.i32(nd.feature);
      if (nd.feature >= 0) {
        w.f64(nd.threshold);
        w.u32(nd.left);
        w.u32(nd.right);
      } else {
        w.vec(nd.proba);
      }
    }
  }
}

TreeEnsemble trees_load(BlobReader& r) {
  r.expect_magic(kTreesMagic);
  const uint32_t version = r.u32();
  if (version != kTreesVersion)
    throw std::runtime_error("unsupported tree ensemble version " + std::to_string(version));
  TreeEnsemble e;
  e.q = r.u32();
  e.C = r.u32();
  e.cfg.n_trees = r.u32();
  e.cfg.candidate_features = r.u32();
  e.cfg.thresholds_per_candidate = r.u32();
  e.cfg.min_samples_leaf = r.u32();
  e.cfg.seed = r.u64();
  const uint64_t n_trees = r.u64();
  e.trees.resize(n_trees);
  for (uint64_t t = 0; t < n_trees; ++t) {
    const uint64_t n_nodes = r.u64();
    e.trees[t].nodes.resize(n_nodes);
    for (uint64_t i = 0; i < n_nodes; ++i) {
      TreeNode& nd = e.trees[t].nodes[i];
      nd.feature = r.i32();
      if (nd.feature >= 0) {
        nd.threshold = r.f64();
        nd.left = r.u32();
        nd.right = r.u32();
        if (nd.feature >= int32_t(e.q) || nd.left >= n_nodes || nd.right >= n_nodes)
          throw std::runtime_error("tree ensemble blob has out-of-range node references");
      } else {
        nd.proba = r.vec<double>();
        if (nd.proba.size() != e.C) throw std::runtime_error("tree ensemble blob has malformed leaf distribution");
      }
    }
  }
  return e;
}

}  // namespace tsckit
