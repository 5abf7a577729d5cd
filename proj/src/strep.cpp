#include "tsckit/strep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace tsckit {

std::vector<PropertySpec> default_property_specs() {
  return {
      {"accuracy", -1, PropertyGroup::Quality},
      {"balanced-accuracy", -1, PropertyGroup::Quality},
      {"f1-weighted", -1, PropertyGroup::Quality},
      {"f1-macro", -1, PropertyGroup::Quality},
      {"f1-micro", -1, PropertyGroup::Quality},
      {"infer_s_per_sample", +1, PropertyGroup::Resources},
      {"infer_j_per_sample", +1, PropertyGroup::Resources},
  };
}

std::map<std::string, double> quality_metrics(const std::vector<uint32_t>& y_true,
                                              const std::vector<uint32_t>& y_pred, uint32_t n_classes) {
  if (y_true.size() != y_pred.size())
    throw std::runtime_error("quality_metrics: y_true and y_pred lengths differ");
  if (y_true.empty()) throw std::runtime_error("quality_metrics: empty label vectors");
  uint32_t C = n_classes;
  if (C == 0) {
    for (uint32_t v : y_true) C = std::max(C, v + 1);
    for (uint32_t v : y_pred) C = std::max(C, v + 1);
  }
  for (uint32_t v : y_true)
    if (v >= C) throw std::runtime_error("quality_metrics: true label out of range");
  for (uint32_t v : y_pred)
    if (v >= C) throw std::runtime_error("quality_metrics: predicted label out of range");

  const std::size_t n = y_true.size();
  std::vector<double> tp(C, 0.0), fp(C, 0.0), fn(C, 0.0), support(C, 0.0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    support[y_true[i]] += 1.0;
    if (y_true[i] == y_pred[i]) {
      tp[y_true[i]] += 1.0;
      ++correct;
    } else {
      fn[y_true[i]] += 1.0;
      fp[y_pred[i]] += 1.0;
    }
  }

  double balanced = 0.0, f1_macro = 0.0, f1_weighted = 0.0;
  for (uint32_t c = 0; c < C; ++c) {
    const double recall = support[c] > 0.0 ? tp[c] / support[c] : 0.0;
    const double denom = 2.0 * tp[c] + fp[c] + fn[c];
    const double f1 = denom > 0.0 ? 2.0 * tp[c] / denom : 0.0;
    balanced += recall;
    f1_macro += f1;
    f1_weighted += f1 * support[c];
  }
  const double accuracy = double(correct) / double(n);
  return {
      {"accuracy", accuracy},
      {"balanced-accuracy", balanced / double(C)},
      {"f1-weighted", f1_weighted / double(n)},
      {"f1-macro", f1_macro / double(C)},
      {"f1-micro", accuracy},  // micro-averaged F1 reduces to accuracy for single-label problems
  };
}

std::map<std::string, double> index_scale(const std::vector<MeasurementRecord>& records, int sigma) {
  if (sigma != 1 && sigma != -1) throw std::runtime_error("index_scale: sigma must be +1 or -1");
  if (records.empty()) throw std::runtime_error("index_scale: no records");
  double best = std::numeric_limits<double>::infinity();  // argmin of value * sigma
  for (const MeasurementRecord& r : records) {
    if (!std::isfinite(r.value))
      throw std::runtime_error("index_scale: non-finite value for model '" + r.model + "', property '" +
                               r.property + "', config '" + r.config + "'");
    // positivity in both directions keeps every scaled value inside (0, 1]
    if (r.value <= 0.0)
      throw std::runtime_error("index_scale: non-positive value for property '" + r.property + "', model '" +
                               r.model + "', config '" + r.config + "'");
    best = std::min(best, r.value * double(sigma));
  }
  const double ref = best * double(sigma);  // mu(f*, c)
  std::map<std::string, double> out;
  for (const MeasurementRecord& r : records) {
    const double ratio = ref / r.value;
    out[r.model] = sigma == +1 ? ratio : 1.0 / ratio;
  }
  return out;
}

WeightVector default_weights(const std::vector<PropertySpec>& specs) {
  std::size_t nq = 0, nr = 0;
  for (const PropertySpec& s : specs) (s.group == PropertyGroup::Quality ? nq : nr) += 1;
  if (nq + nr == 0) throw std::runtime_error("default_weights: no properties");
  const double quality_share = nq == 0 ? 0.0 : (nr == 0 ? 1.0 : 0.5);
  const double resource_share = 1.0 - quality_share;
  WeightVector w;
  for (const PropertySpec& s : specs)
    w[s.name] = s.group == PropertyGroup::Quality ? quality_share / double(nq) : resource_share / double(nr);
  return w;
}

double compound_score(const std::map<std::string, double>& scaled, const WeightVector& weights) {
  if (scaled.size() != weights.size())
    throw std::runtime_error("compound_score: weights do not cover exactly the scaled properties");
  double sum = 0.0, score = 0.0;
  for (const auto& [name, omega] : weights) {
    const auto it = scaled.find(name);
    if (it == scaled.end()) throw std::runtime_error("compound_score: no scaled value for property '" + name + "'");
    if (omega < 0.0 || omega > 1.0)
      throw std::runtime_error("compound_score: weight for '" + name + "' outside [0, 1]");
    sum += omega;
    score += omega * it->second;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::runtime_error("compound_score: weights must sum to 1");
  return score;
}

namespace {

// Studentized range q_0.05 / sqrt(2) table for the Nemenyi test, k = 2..20.
constexpr double kNemenyiQ[] = {1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164, 3.219,
                                3.268, 3.313, 3.354, 3.391, 3.426, 3.458, 3.489, 3.517, 3.544};

}  // namespace

RankReport mean_ranks(const FeatureMatrix& scores) {
  const std::size_t m = scores.rows;  // models
  const std::size_t N = scores.cols;  // configs
  if (m < 2) throw std::runtime_error("mean_ranks: need at least 2 models");
  if (N < 2) throw std::runtime_error("mean_ranks: need at least 2 configurations");
  if (m > 20) throw std::runtime_error("mean_ranks: Nemenyi table covers at most 20 models");
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < N; ++j)
      if (!std::isfinite(scores.at(i, j)))
        throw std::runtime_error("mean_ranks: missing score for model " + std::to_string(i) + ", config " +
                                 std::to_string(j));

  RankReport report;
  report.mean_ranks.assign(m, 0.0);
  std::vector<std::size_t> order(m);
  for (std::size_t j = 0; j < N; ++j) {
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (scores.at(a, j) != scores.at(b, j)) return scores.at(a, j) > scores.at(b, j);  // higher = better
      return a < b;
    });
    std::size_t i = 0;
    while (i < m) {
      std::size_t k = i;
      while (k + 1 < m && scores.at(order[k + 1], j) == scores.at(order[i], j)) ++k;
      const double avg_rank = (double(i + 1) + double(k + 1)) / 2.0;  // ties share the average rank
      for (std::size_t t = i; t <= k; ++t) report.mean_ranks[order[t]] += avg_rank;
      i = k + 1;
    }
  }
  for (double& r : report.mean_ranks) r /= double(N);

  double sum_sq = 0.0;
  for (double r : report.mean_ranks) sum_sq += r * r;
  const double md = double(m);
  report.friedman_chi2 = (12.0 * double(N) / (md * (md + 1.0))) * (sum_sq - md * (md + 1.0) * (md + 1.0) / 4.0);
  report.critical_distance = kNemenyiQ[m - 2] * std::sqrt(md * (md + 1.0) / (6.0 * double(N)));
  return report;
}

std::vector<MeasurementRecord> read_measurements_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open measurements file " + path.string());
  std::vector<MeasurementRecord> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": bad JSON: " + e.what());
    }
    MeasurementRecord r;
    r.model = j.at("model").get<std::string>();
    r.config = j.at("config").get<std::string>();
    r.property = j.at("property").get<std::string>();
    r.value = j.at("value").get<double>();
    records.push_back(std::move(r));
  }
  return records;
}

void write_measurements_jsonl(const std::filesystem::path& path, const std::vector<MeasurementRecord>& records,
                              bool append) {
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open measurements file " + path.string() + " for writing");
  for (const MeasurementRecord& r : records) {
    nlohmann::json j{{"model", r.model}, {"config", r.config}, {"property", r.property}, {"value", r.value}};
    out << j.dump() << '\n';
  }
}

Report build_report(const std::vector<MeasurementRecord>& records, const std::vector<PropertySpec>& specs,
                    const WeightVector& weights) {
  Report rep;
  rep.properties = specs;

  std::set<std::string> model_set, config_set;
  std::map<std::string, const PropertySpec*> spec_by_name;
  for (const PropertySpec& s : specs) {
    if (s.sigma != 1 && s.sigma != -1) throw std::runtime_error("property '" + s.name + "' has invalid sigma");
    if (!spec_by_name.emplace(s.name, &s).second)
      throw std::runtime_error("duplicate property spec '" + s.name + "'");
  }

  // (config, property) -> records across models
  std::map<std::pair<std::string, std::string>, std::vector<MeasurementRecord>> groups;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (const MeasurementRecord& r : records) {
    if (spec_by_name.find(r.property) == spec_by_name.end())
      throw std::runtime_error("measurement for unknown property '" + r.property + "'");
    if (!seen.emplace(r.model, r.config, r.property).second)
      throw std::runtime_error("duplicate measurement: model '" + r.model + "', config '" + r.config +
                               "', property '" + r.property + "'");
    model_set.insert(r.model);
    config_set.insert(r.config);
    groups[{r.config, r.property}].push_back(r);
  }
  if (records.empty()) throw std::runtime_error("build_report: no measurements");
  rep.models.assign(model_set.begin(), model_set.end());
  rep.configs.assign(config_set.begin(), config_set.end());
  rep.raw = records;

  for (const std::string& config : rep.configs)
    for (const PropertySpec& s : specs) {
      const auto it = groups.find({config, s.name});
      const std::size_t have = it == groups.end() ? 0 : it->second.size();
      if (have != rep.models.size())
        throw std::runtime_error("incomplete measurements: config '" + config + "', property '" + s.name + "' has " +
                                 std::to_string(have) + " of " + std::to_string(rep.models.size()) + " models");
    }

  rep.compound = FeatureMatrix(rep.models.size(), rep.configs.size());
  for (std::size_t cj = 0; cj < rep.configs.size(); ++cj) {
    const std::string& config = rep.configs[cj];
    std::map<std::string, std::map<std::string, double>> scaled_by_model;  // model -> property -> scaled
    for (const PropertySpec& s : specs) {
      const std::map<std::string, double> scaled = index_scale(groups[{config, s.name}], s.sigma);
      for (const auto& [model, v] : scaled) scaled_by_model[model][s.name] = v;
    }
    rep.scaled[config] = scaled_by_model;
    for (std::size_t mi = 0; mi < rep.models.size(); ++mi)
      rep.compound.at(mi, cj) = compound_score(scaled_by_model[rep.models[mi]], weights);
  }
  rep.ranks = mean_ranks(rep.compound);
  return rep;
}

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.precision(12);
  return out;
}

}  // namespace

void write_scaled_csv(const Report& r, const std::filesystem::path& path) {
  std::ofstream out = open_csv(path);
  out << "config,model,property,raw_value,scaled\n";
  std::map<std::tuple<std::string, std::string, std::string>, double> raw;
  for (const MeasurementRecord& m : r.raw) raw[{m.config, m.model, m.property}] = m.value;
  for (const std::string& config : r.configs)
    for (const std::string& model : r.models)
      for (const PropertySpec& s : r.properties)
        out << csv_quote(config) << ',' << csv_quote(model) << ',' << csv_quote(s.name) << ','
            << raw.at({config, model, s.name}) << ',' << r.scaled.at(config).at(model).at(s.name) << '\n';
}

void write_compound_csv(const Report& r, const std::filesystem::path& path) {
  std::ofstream out = open_csv(path);
  out << "model";
  for (const std::string& config : r.configs) out << ',' << csv_quote(config);
  out << '\n';
  for (std::size_t mi = 0; mi < r.models.size(); ++mi) {
    out << csv_quote(r.models[mi]);
    for (std::size_t cj = 0; cj < r.configs.size(); ++cj) out << ',' << r.compound.at(mi, cj);
    out << '\n';
  }
}

void write_ranks_csv(const Report& r, const std::filesystem::path& path) {
  std::ofstream out = open_csv(path);
  out << "model,mean_rank,friedman_chi2,critical_distance\n";
  for (std::size_t mi = 0; mi < r.models.size(); ++mi)
    out << csv_quote(r.models[mi]) << ',' << r.ranks.mean_ranks[mi] << ',' << r.ranks.friedman_chi2 << ','
        << r.ranks.critical_distance << '\n';
}

}  // namespace tsckit
