#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <random>
#include <vector>

#include "tsckit/pruning.hpp"
#include "tsckit/ridge.hpp"

using namespace tsckit;

namespace {

SetLayout one_column_sets(uint32_t count, Origin origin, uint32_t first_col = 0) {
  SetLayout layout;
  for (uint32_t s = 0; s < count; ++s) layout.push_back({s, origin, first_col + s, 1});
  return layout;
}

RidgeModel identity_model(uint32_t q, uint32_t C) {
  RidgeModel m;
  m.q = q;
  m.C = C;
  m.lambda = 0.0;
  m.mean.assign(q, 0.0);
  m.scale.assign(q, 1.0);
  m.beta = FeatureMatrix(q, C);
  m.intercept.assign(C, 0.0);
  return m;
}

// Enumerates all r-subsets and returns the best achievable importance total.
double best_subset_mass(const std::vector<double>& importance, uint32_t r) {
  const uint32_t S = static_cast<uint32_t>(importance.size());
  double best = -1.0;
  for (uint32_t bits = 0; bits < (1u << S); ++bits) {
    if (uint32_t(std::popcount(bits)) != r) continue;
    double total = 0;
    for (uint32_t s = 0; s < S; ++s)
      if (bits & (1u << s)) total += importance[s];
    best = std::max(best, total);
  }
  return best;
}

}  // namespace

TEST_CASE("frozen importance example: mean over members of mean over classes") {
  // member 0 class-mean 0.4, member 1 class-mean 0.2 -> set importance 0.3
  SetLayout layout = {{0, Origin::Hydra, 0, 2}};
  FeatureMatrix beta(2, 2);
  beta.at(0, 0) = 0.4;
  beta.at(0, 1) = -0.4;
  beta.at(1, 0) = 0.2;
  beta.at(1, 1) = 0.2;
  const SetImportance imp = mean_set_importance(beta, layout);
  REQUIRE(imp.entries.size() == 1);
  CHECK(imp.entries[0].importance == doctest::Approx(0.3));
  CHECK(imp.entries[0].member_count == 2);

  // signed variant averages raw coefficients: (0.4-0.4)/2 = 0, (0.2+0.2)/2 = 0.2
  const SetImportance raw = mean_set_importance(beta, layout, false);
  CHECK(raw.entries[0].importance == doctest::Approx(0.1));
}

TEST_CASE("importance rejects layouts that do not partition the columns") {
  FeatureMatrix beta(3, 2, 1.0);
  SetLayout gap = {{0, Origin::Hydra, 0, 1}, {1, Origin::Hydra, 2, 1}};
  CHECK_THROWS_AS(mean_set_importance(beta, gap), std::runtime_error);
  SetLayout overflow = {{0, Origin::Hydra, 0, 4}};
  CHECK_THROWS_AS(mean_set_importance(beta, overflow), std::runtime_error);
  SetLayout empty_set = {{0, Origin::Hydra, 0, 3}, {1, Origin::Hydra, 3, 0}};
  CHECK_THROWS_AS(mean_set_importance(beta, empty_set), std::runtime_error);
}

TEST_CASE("kept count: r = max(1, floor((1 - zeta) * S + 0.5))") {
  CHECK(kept_count(48, 0.8) == 10);
  CHECK(kept_count(10, 0.0) == 10);
  CHECK(kept_count(5, 0.5) == 3);
  CHECK(kept_count(3, 0.9) == 1);   // rounds to zero, clamped to one
  CHECK(kept_count(1, 0.89) == 1);
  CHECK(kept_count(50, 0.1) == 45);
  CHECK(kept_count(7, 0.25) == 5);  // floor(5.25 + 0.5)
}

TEST_CASE("selection keeps the top-importance sets per origin, ties to lower ids") {
  SetImportance imp;
  // hydra: importances 5, 1, 5, 3  -> r = 2 keeps {0, 2}
  for (uint32_t s = 0; s < 4; ++s)
    imp.entries.push_back({s, Origin::Hydra, std::vector<double>{5, 1, 5, 3}[s], 2});
  // quant: importances 2, 2, 2 -> r = 2 keeps the two lowest ids {0, 1}
  for (uint32_t s = 0; s < 3; ++s) imp.entries.push_back({s, Origin::Quant, 2.0, 1});

  const PruneDecision d = select_top_sets(imp, 0.5);
  REQUIRE(d.origins.size() == 2);
  const OriginSelection* hy = d.find(Origin::Hydra);
  const OriginSelection* qu = d.find(Origin::Quant);
  REQUIRE(hy != nullptr);
  REQUIRE(qu != nullptr);
  CHECK(hy->total == 4);
  CHECK(hy->r == 2);
  CHECK(hy->kept == std::vector<uint32_t>{0, 2});
  CHECK(qu->r == 2);  // floor(1.5 + 0.5)
  CHECK(qu->kept == std::vector<uint32_t>{0, 1});

  CHECK_THROWS_AS(select_top_sets(imp, 1.0), std::runtime_error);
  CHECK_THROWS_AS(select_top_sets(imp, -0.1), std::runtime_error);
}

TEST_CASE("greedy top-r equals the exhaustive best subset for every S <= 8") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (uint32_t S = 2; S <= 8; ++S) {
    for (double zeta : {0.1, 0.4, 0.7}) {
      std::vector<double> importance(S);
      for (double& v : importance) v = unit(rng);
      SetImportance imp;
      for (uint32_t s = 0; s < S; ++s) imp.entries.push_back({s, Origin::Hydra, importance[s], 3});
      const PruneDecision d = select_top_sets(imp, zeta);
      const OriginSelection* sel = d.find(Origin::Hydra);
      REQUIRE(sel != nullptr);
      double kept_mass = 0;
      for (uint32_t s : sel->kept) kept_mass += importance[s];
      CHECK(kept_mass == doctest::Approx(best_subset_mass(importance, sel->r)));
    }
  }
}

TEST_CASE("kept and dropped columns partition the layout") {
  SetLayout layout = one_column_sets(3, Origin::Hydra);
  SetLayout quant = {{0, Origin::Quant, 3, 2}, {1, Origin::Quant, 5, 1}};
  layout.insert(layout.end(), quant.begin(), quant.end());

  PruneDecision d;
  d.zeta = 0.5;
  d.origins.push_back({Origin::Hydra, 3, 2, {0, 2}});
  d.origins.push_back({Origin::Quant, 2, 1, {1}});

  CHECK(kept_columns(layout, d) == std::vector<uint32_t>{0, 2, 5});
  CHECK(dropped_columns(layout, d) == std::vector<uint32_t>{1, 3, 4});
}

TEST_CASE("frozen pruning-error bound computation") {
  RidgeModel m = identity_model(3, 2);
  m.beta.at(0, 0) = 0.5;
  m.beta.at(1, 0) = -1.0;
  m.beta.at(2, 0) = 0.25;
  m.beta.at(0, 1) = 0.0;
  m.beta.at(1, 1) = 2.0;
  m.beta.at(2, 1) = -0.5;

  const SetLayout layout = one_column_sets(3, Origin::Hydra);
  PruneDecision d;
  d.zeta = 0.6;
  d.origins.push_back({Origin::Hydra, 3, 1, {0}});  // drop columns 1 and 2

  FeatureMatrix Z(2, 3);
  Z.at(0, 0) = 1;  Z.at(0, 1) = 2;    Z.at(0, 2) = -1;
  Z.at(1, 0) = -3; Z.at(1, 1) = 0.5;  Z.at(1, 2) = 2;

  const BoundReport r = pruning_error_bound(m, layout, d, Z, Z);
  CHECK(r.B == doctest::Approx(3.0));
  CHECK(r.pruned_mass[0] == doctest::Approx(1.25));
  CHECK(r.pruned_mass[1] == doctest::Approx(2.5));
  CHECK(r.bound[0] == doctest::Approx(3.75));
  CHECK(r.bound[1] == doctest::Approx(7.5));
  CHECK(r.deviation[0] == doctest::Approx(2.25));  // row 0: |2*(-1) + (-1)*0.25|
  CHECK(r.deviation[1] == doctest::Approx(4.5));   // row 0: |2*2 + (-1)*(-0.5)|
  CHECK(r.satisfied);

  // an evaluation point outside the empirical domain can break the bound
  FeatureMatrix far(1, 3);
  far.at(0, 1) = 10.0;
  const BoundReport rf = pruning_error_bound(m, layout, d, Z, far);
  CHECK(rf.deviation[0] == doctest::Approx(10.0));
  CHECK_FALSE(rf.satisfied);
}

TEST_CASE("bound respects the model's standardization") {
  RidgeModel m = identity_model(2, 2);
  m.mean = {10.0, -5.0};
  m.scale = {2.0, 4.0};
  m.beta.at(0, 0) = 1.0;
  m.beta.at(1, 0) = 1.0;
  m.beta.at(0, 1) = -1.0;
  m.beta.at(1, 1) = -1.0;

  const SetLayout layout = one_column_sets(2, Origin::Hydra);
  PruneDecision d;
  d.origins.push_back({Origin::Hydra, 2, 1, {0}});

  FeatureMatrix Z(1, 2);
  Z.at(0, 0) = 14.0;  // standardized: (14-10)/2 = 2
  Z.at(0, 1) = -1.0;  // standardized: (-1+5)/4 = 1
  const BoundReport r = pruning_error_bound(m, layout, d, Z, Z);
  CHECK(r.B == doctest::Approx(2.0));
  CHECK(r.bound[0] == doctest::Approx(2.0));       // B * |beta_10|
  CHECK(r.deviation[0] == doctest::Approx(1.0));   // |zs_1 * beta_10|
  CHECK(r.satisfied);
}

TEST_CASE("bound holds on in-domain points for a fitted model") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> gauss;
  FeatureMatrix Z(24, 6);
  for (double& v : Z.data) v = gauss(rng);
  std::vector<uint32_t> y(24);
  for (std::size_t i = 0; i < 24; ++i) y[i] = uint32_t(i % 3);
  const RidgeModel m = ridge_fit(Z, y);

  const SetLayout layout = {{0, Origin::Hydra, 0, 2}, {1, Origin::Hydra, 2, 2}, {2, Origin::Hydra, 4, 2}};
  const SetImportance imp = mean_set_importance(m.beta, layout);
  for (double zeta : {0.3, 0.6}) {
    const PruneDecision d = select_top_sets(imp, zeta);
    const BoundReport r = pruning_error_bound(m, layout, d, Z, Z);
    CHECK(r.satisfied);
    for (uint32_t c = 0; c < m.C; ++c) CHECK(r.deviation[c] <= r.bound[c] + 1e-9);
  }
}

TEST_CASE("sorted tail bound: frozen values, monotone in r, zero at r = S") {
  RidgeModel m = identity_model(3, 2);
  m.beta.at(0, 0) = 0.5;
  m.beta.at(1, 0) = -1.0;
  m.beta.at(2, 0) = 0.25;
  m.beta.at(0, 1) = 0.0;
  m.beta.at(1, 1) = 2.0;
  m.beta.at(2, 1) = -0.5;
  const SetLayout layout = one_column_sets(3, Origin::Hydra);

  FeatureMatrix Z(2, 3);
  Z.at(0, 0) = 1;  Z.at(0, 1) = 2;   Z.at(0, 2) = -1;
  Z.at(1, 0) = -3; Z.at(1, 1) = 0.5; Z.at(1, 2) = 2;

  // importance order by mean |beta|: set1 (1.5), set2 (0.375), set0 (0.25)
  CHECK(sorted_tail_bound(m, layout, 1, Z) == doctest::Approx(3.0 * (0.75 + 0.5)));
  CHECK(sorted_tail_bound(m, layout, 2, Z) == doctest::Approx(3.0 * 0.5));
  CHECK(sorted_tail_bound(m, layout, 3, Z) == doctest::Approx(0.0));
  CHECK_THROWS_AS(sorted_tail_bound(m, layout, 4, Z), std::runtime_error);

  double prev = std::numeric_limits<double>::infinity();
  for (uint32_t r = 1; r <= 3; ++r) {
    const double b = sorted_tail_bound(m, layout, r, Z);
    CHECK(b <= prev);
    prev = b;
  }
}

TEST_CASE("bound input validation") {
  RidgeModel m = identity_model(2, 2);
  const SetLayout layout = one_column_sets(2, Origin::Hydra);
  PruneDecision d;
  d.origins.push_back({Origin::Hydra, 2, 1, {0}});
  FeatureMatrix bad(2, 3);
  FeatureMatrix ok(2, 2);
  CHECK_THROWS_AS(pruning_error_bound(m, layout, d, bad, ok), std::runtime_error);
  CHECK_THROWS_AS(pruning_error_bound(m, layout, d, ok, bad), std::runtime_error);
}
