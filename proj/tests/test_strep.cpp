#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "tsckit/strep.hpp"

using namespace tsckit;

namespace {

std::filesystem::path tmp_file(const char* leaf) {
  const auto p = std::filesystem::temp_directory_path() / leaf;
  std::filesystem::remove(p);
  return p;
}

std::size_t line_count(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t lines = 0;
  std::string s;
  while (std::getline(in, s)) ++lines;
  return lines;
}

}  // namespace

TEST_CASE("frozen metric hand-checks") {
  const std::vector<uint32_t> y_true = {0, 0, 0, 1};
  const std::vector<uint32_t> y_pred = {0, 0, 0, 0};
  const auto m = quality_metrics(y_true, y_pred);
  CHECK(m.at("accuracy") == doctest::Approx(0.75));
  CHECK(m.at("balanced-accuracy") == doctest::Approx(0.5));
  // class 0: tp=3 fp=1 fn=0 -> f1 = 6/7; class 1: f1 = 0
  CHECK(m.at("f1-macro") == doctest::Approx(3.0 / 7.0));
  CHECK(m.at("f1-weighted") == doctest::Approx(9.0 / 14.0));
  CHECK(m.at("f1-micro") == doctest::Approx(0.75));
}

TEST_CASE("perfect predictions score 1 on every metric") {
  const std::vector<uint32_t> y = {2, 0, 1, 1, 2, 0};
  for (const auto& [name, value] : quality_metrics(y, y)) {
    CAPTURE(name);
    CHECK(value == doctest::Approx(1.0));
  }
}

TEST_CASE("balanced accuracy counts classes absent from predictions as zero recall") {
  // three classes in truth, predictor collapses to class 0
  const std::vector<uint32_t> y_true = {0, 1, 2};
  const std::vector<uint32_t> y_pred = {0, 0, 0};
  const auto m = quality_metrics(y_true, y_pred);
  CHECK(m.at("balanced-accuracy") == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("metrics input validation") {
  CHECK_THROWS_AS(quality_metrics({}, {}), std::runtime_error);
  CHECK_THROWS_AS(quality_metrics({0, 1}, {0}), std::runtime_error);
  CHECK_THROWS_AS(quality_metrics({0, 3}, {0, 1}, 2), std::runtime_error);  // label >= n_classes
}

TEST_CASE("frozen index-scaling examples") {
  SUBCASE("resources, sigma +1: smaller is better") {
    const std::vector<MeasurementRecord> recs = {{"a", "c", "time", 2.0}, {"b", "c", "time", 4.0}};
    const auto scaled = index_scale(recs, +1);
    CHECK(scaled.at("a") == doctest::Approx(1.0));
    CHECK(scaled.at("b") == doctest::Approx(0.5));
  }
  SUBCASE("quality, sigma -1: larger is better") {
    const std::vector<MeasurementRecord> recs = {{"a", "c", "acc", 0.5}, {"b", "c", "acc", 1.0}};
    const auto scaled = index_scale(recs, -1);
    CHECK(scaled.at("a") == doctest::Approx(0.5));
    CHECK(scaled.at("b") == doctest::Approx(1.0));
  }
  SUBCASE("scaled values live in (0, 1] and the best model hits 1") {
    const std::vector<MeasurementRecord> recs = {
        {"a", "c", "time", 3.7}, {"b", "c", "time", 0.9}, {"d", "c", "time", 11.0}};
    const auto scaled = index_scale(recs, +1);
    for (const auto& [model, v] : scaled) {
      CHECK(v > 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(scaled.at("b") == doctest::Approx(1.0));
  }
}

TEST_CASE("index scaling validation") {
  CHECK_THROWS_AS(index_scale({}, +1), std::runtime_error);
  CHECK_THROWS_AS(index_scale({{"a", "c", "p", 1.0}}, 2), std::runtime_error);
  // nonpositive resource measurements have no meaningful ratio
  CHECK_THROWS_AS(index_scale({{"a", "c", "p", 0.0}, {"b", "c", "p", 1.0}}, +1), std::runtime_error);
  CHECK_THROWS_AS(index_scale({{"a", "c", "p", -1.0}, {"b", "c", "p", 1.0}}, -1), std::runtime_error);
}

TEST_CASE("default weights split 0.5 per group equally among members") {
  const std::vector<PropertySpec> specs = default_property_specs();
  const WeightVector w = default_weights(specs);
  REQUIRE(w.size() == 7);
  double total = 0;
  int quality = 0, resources = 0;
  for (const PropertySpec& s : specs) {
    total += w.at(s.name);
    if (s.group == PropertyGroup::Quality) {
      CHECK(w.at(s.name) == doctest::Approx(0.1));
      ++quality;
    } else {
      CHECK(w.at(s.name) == doctest::Approx(0.25));
      ++resources;
    }
  }
  CHECK(quality == 5);
  CHECK(resources == 2);
  CHECK(total == doctest::Approx(1.0));

  // one-group fallback: the whole simplex goes to the present group
  const std::vector<PropertySpec> only_quality(specs.begin(), specs.begin() + 5);
  const WeightVector wq = default_weights(only_quality);
  for (const auto& [name, v] : wq) CHECK(v == doctest::Approx(0.2));
}

TEST_CASE("frozen compound score example") {
  const std::map<std::string, double> scaled = {{"a", 1.0}, {"b", 0.5}};
  CHECK(compound_score(scaled, {{"a", 0.5}, {"b", 0.5}}) == doctest::Approx(0.75));
  CHECK(compound_score(scaled, {{"a", 1.0}, {"b", 0.0}}) == doctest::Approx(1.0));

  CHECK_THROWS_AS(compound_score(scaled, {{"a", 1.0}}), std::runtime_error);               // missing coverage
  CHECK_THROWS_AS(compound_score(scaled, {{"a", 0.5}, {"b", 0.4}}), std::runtime_error);   // sums to 0.9
  CHECK_THROWS_AS(compound_score(scaled, {{"a", 1.5}, {"b", -0.5}}), std::runtime_error);  // out of [0,1]
  CHECK_THROWS_AS(compound_score(scaled, {{"a", 0.5}, {"c", 0.5}}), std::runtime_error);   // unknown property
}

TEST_CASE("frozen mean-rank example with a tie") {
  // models x configs, higher is better
  FeatureMatrix scores(3, 4);
  const double rows[3][4] = {{0.9, 0.8, 0.9, 0.6}, {0.8, 0.7, 0.9, 0.5}, {0.7, 0.6, 0.3, 0.4}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) scores.at(i, j) = rows[i][j];
  const RankReport r = mean_ranks(scores);
  CHECK(r.mean_ranks[0] == doctest::Approx(1.125));  // tie in config 2 averages to 1.5
  CHECK(r.mean_ranks[1] == doctest::Approx(1.875));
  CHECK(r.mean_ranks[2] == doctest::Approx(3.0));
  CHECK(r.friedman_chi2 == doctest::Approx(7.125));
  CHECK(r.critical_distance == doctest::Approx(2.343 / std::sqrt(2.0)));
}

TEST_CASE("mean ranks validation") {
  CHECK_THROWS_AS(mean_ranks(FeatureMatrix(1, 4, 1.0)), std::runtime_error);   // needs >= 2 models
  CHECK_THROWS_AS(mean_ranks(FeatureMatrix(3, 1, 1.0)), std::runtime_error);   // needs >= 2 configs
  CHECK_THROWS_AS(mean_ranks(FeatureMatrix(21, 3, 1.0)), std::runtime_error);  // q table ends at 20
  FeatureMatrix bad(2, 2, 1.0);
  bad.at(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(mean_ranks(bad), std::runtime_error);
}

TEST_CASE("measurements JSONL round-trips and reports parse errors with line numbers") {
  const auto path = tmp_file("tsckit_test_meas.jsonl");
  const std::vector<MeasurementRecord> recs = {{"m1", "c1", "accuracy", 0.9},
                                               {"m2", "c1|env=lab", "infer_s_per_sample", 1e-4}};
  write_measurements_jsonl(path, recs, false);
  const auto back = read_measurements_jsonl(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].model == "m1");
  CHECK(back[1].config == "c1|env=lab");
  CHECK(back[1].value == doctest::Approx(1e-4));

  // append mode extends
  write_measurements_jsonl(path, {{"m3", "c2", "accuracy", 0.5}}, true);
  CHECK(read_measurements_jsonl(path).size() == 3);

  std::ofstream(path, std::ios::app) << "not json\n";
  try {
    read_measurements_jsonl(path);
    FAIL("expected parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("4") != std::string::npos);  // the offending line number
  }
}

TEST_CASE("build_report end to end with frozen numbers") {
  const std::vector<PropertySpec> specs = {{"accuracy", -1, PropertyGroup::Quality},
                                           {"infer_s_per_sample", +1, PropertyGroup::Resources}};
  const WeightVector weights = default_weights(specs);  // 0.5 each
  const std::vector<MeasurementRecord> recs = {
      {"A", "c1", "accuracy", 0.9},  {"A", "c1", "infer_s_per_sample", 0.002},
      {"B", "c1", "accuracy", 0.6},  {"B", "c1", "infer_s_per_sample", 0.001},
      {"A", "c2", "accuracy", 0.8},  {"A", "c2", "infer_s_per_sample", 0.001},
      {"B", "c2", "accuracy", 0.8},  {"B", "c2", "infer_s_per_sample", 0.004},
  };
  const Report r = build_report(recs, specs, weights);
  REQUIRE(r.models == std::vector<std::string>{"A", "B"});
  REQUIRE(r.configs == std::vector<std::string>{"c1", "c2"});

  CHECK(r.scaled.at("c1").at("A").at("accuracy") == doctest::Approx(1.0));
  CHECK(r.scaled.at("c1").at("B").at("accuracy") == doctest::Approx(2.0 / 3.0));
  CHECK(r.scaled.at("c1").at("A").at("infer_s_per_sample") == doctest::Approx(0.5));
  CHECK(r.scaled.at("c1").at("B").at("infer_s_per_sample") == doctest::Approx(1.0));

  CHECK(r.compound.at(0, 0) == doctest::Approx(0.75));           // A on c1
  CHECK(r.compound.at(1, 0) == doctest::Approx(1.0 / 3.0 + 0.5));  // B on c1
  CHECK(r.compound.at(0, 1) == doctest::Approx(1.0));            // A on c2
  CHECK(r.compound.at(1, 1) == doctest::Approx(0.625));

  // B wins c1, A wins c2: both mean ranks are 1.5 and chi-squared is 0
  CHECK(r.ranks.mean_ranks[0] == doctest::Approx(1.5));
  CHECK(r.ranks.mean_ranks[1] == doctest::Approx(1.5));
  CHECK(r.ranks.friedman_chi2 == doctest::Approx(0.0));
  CHECK(r.ranks.critical_distance == doctest::Approx(1.960 * std::sqrt(0.5)));

  const auto scaled_csv = tmp_file("tsckit_scaled.csv");
  const auto compound_csv = tmp_file("tsckit_compound.csv");
  const auto ranks_csv = tmp_file("tsckit_ranks.csv");
  write_scaled_csv(r, scaled_csv);
  write_compound_csv(r, compound_csv);
  write_ranks_csv(r, ranks_csv);
  CHECK(line_count(scaled_csv) == 1 + 2 * 2 * 2);  // header + configs*models*properties
  CHECK(line_count(compound_csv) == 1 + 2);
  CHECK(line_count(ranks_csv) == 1 + 2);
  std::ifstream in(ranks_csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "model,mean_rank,friedman_chi2,critical_distance");
}

TEST_CASE("build_report rejects incomplete or contradictory tables") {
  const std::vector<PropertySpec> specs = {{"accuracy", -1, PropertyGroup::Quality}};
  const WeightVector w = {{"accuracy", 1.0}};

  // model B missing its c1 measurement
  CHECK_THROWS_AS(build_report({{"A", "c1", "accuracy", 0.9}, {"B", "c2", "accuracy", 0.8},
                                {"A", "c2", "accuracy", 0.7}},
                               specs, w),
                  std::runtime_error);
  // duplicate measurement
  CHECK_THROWS_AS(build_report({{"A", "c1", "accuracy", 0.9}, {"A", "c1", "accuracy", 0.8}}, specs, w),
                  std::runtime_error);
  // record for a property not in the spec list
  CHECK_THROWS_AS(build_report({{"A", "c1", "f1-macro", 0.9}}, specs, w), std::runtime_error);
  // duplicate property spec
  CHECK_THROWS_AS(build_report({{"A", "c1", "accuracy", 0.9}},
                               {{"accuracy", -1, PropertyGroup::Quality}, {"accuracy", -1, PropertyGroup::Quality}},
                               w),
                  std::runtime_error);
}
