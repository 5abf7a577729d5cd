#include "tsckit/dataset.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "tsckit/io.hpp"

namespace tsckit {

using nlohmann::json;

SyntheticKind synthetic_kind_from_string(const std::string& s) {
  if (s == "sinusoid-frequency" || s == "sinusoid") return SyntheticKind::SinusoidFrequency;
  if (s == "trend-slope" || s == "trend") return SyntheticKind::TrendSlope;
  if (s == "gaussian-shift" || s == "gaussian") return SyntheticKind::GaussianShift;
  throw std::runtime_error("unknown synthetic generator kind: " + s);
}

std::string to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::SinusoidFrequency: return "sinusoid-frequency";
    case SyntheticKind::TrendSlope: return "trend-slope";
    case SyntheticKind::GaussianShift: return "gaussian-shift";
  }
  return "?";
}

void validate_dataset(const TimeSeriesDataset& ds) {
  if (ds.n == 0) throw std::runtime_error("dataset: empty dataset (n=0)");
  if (ds.d == 0 || ds.l == 0) throw std::runtime_error("dataset: d and l must be positive");
  if (ds.C == 0) throw std::runtime_error("dataset: C must be positive");
  if (ds.F == 0) throw std::runtime_error("dataset: F must be >= 1");
  const std::size_t expected = std::size_t(ds.n) * ds.d * ds.l;
  if (ds.values.size() != expected)
    throw std::runtime_error("data.f32: element count " + std::to_string(ds.values.size()) +
                             " does not match n*d*l = " + std::to_string(expected));
  if (ds.labels.size() != ds.n)
    throw std::runtime_error("labels.u32: count " + std::to_string(ds.labels.size()) + " != n = " + std::to_string(ds.n));
  if (ds.folds.size() != ds.n)
    throw std::runtime_error("folds.u32: count " + std::to_string(ds.folds.size()) + " != n = " + std::to_string(ds.n));
  std::vector<char> seen(ds.C, 0);
  for (uint32_t i = 0; i < ds.n; ++i) {
    if (ds.labels[i] >= ds.C)
      throw std::runtime_error("labels.u32: label " + std::to_string(ds.labels[i]) + " at instance " +
                               std::to_string(i) + " out of range (C=" + std::to_string(ds.C) + ")");
    seen[ds.labels[i]] = 1;
    if (ds.folds[i] >= ds.F)
      throw std::runtime_error("folds.u32: fold " + std::to_string(ds.folds[i]) + " at instance " +
                               std::to_string(i) + " out of range (F=" + std::to_string(ds.F) + ")");
  }
  for (uint32_t c = 0; c < ds.C; ++c)
    if (!seen[c]) throw std::runtime_error("labels.u32: class " + std::to_string(c) + " has no instances");
  for (std::size_t i = 0; i < ds.values.size(); ++i)
    if (!std::isfinite(ds.values[i]))
      throw std::runtime_error("data.f32: non-finite value at flat index " + std::to_string(i));
}

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing file: " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

template <typename T>
std::vector<T> read_flat(const std::filesystem::path& path, std::size_t expected_count, const char* field) {
  if (!std::filesystem::exists(path)) throw std::runtime_error(std::string("missing file: ") + path.string());
  std::string bytes = read_binary_file(path);
  const std::size_t expected_bytes = expected_count * sizeof(T);
  if (bytes.size() != expected_bytes)
    throw std::runtime_error(std::string(field) + ": byte length " + std::to_string(bytes.size()) +
                             " does not match expected " + std::to_string(expected_bytes));
  std::vector<T> out(expected_count);
  std::memcpy(out.data(), bytes.data(), expected_bytes);
  return out;
}

template <typename T>
void write_flat(const std::filesystem::path& path, const std::vector<T>& v) {
  std::string bytes(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(T));
  write_binary_file(path, bytes);
}

uint32_t meta_field(const json& meta, const char* key) {
  if (!meta.contains(key)) throw std::runtime_error(std::string("meta.json: missing field \"") + key + "\"");
  if (!meta[key].is_number_integer() || meta[key].get<int64_t>() < 0)
    throw std::runtime_error(std::string("meta.json: field \"") + key + "\" must be a nonnegative integer");
  return meta[key].get<uint32_t>();
}

}  // namespace

TimeSeriesDataset load_dataset(const std::filesystem::path& dir) {
  json meta;
  try {
    meta = json::parse(read_text(dir / "meta.json"));
  } catch (const json::parse_error& e) {
    throw std::runtime_error("meta.json: parse error: " + std::string(e.what()));
  }
  TimeSeriesDataset ds;
  ds.n = meta_field(meta, "n");
  ds.d = meta_field(meta, "d");
  ds.l = meta_field(meta, "l");
  ds.C = meta_field(meta, "C");
  ds.F = meta_field(meta, "F");
  ds.name = meta.value("name", dir.filename().string());
  ds.values = read_flat<float>(dir / "data.f32", std::size_t(ds.n) * ds.d * ds.l, "data.f32");
  ds.labels = read_flat<uint32_t>(dir / "labels.u32", ds.n, "labels.u32");
  if (std::filesystem::exists(dir / "folds.u32")) {
    ds.folds = read_flat<uint32_t>(dir / "folds.u32", ds.n, "folds.u32");
  } else {
    if (ds.F > 1) throw std::runtime_error("folds.u32: missing file but meta.json declares F > 1");
    ds.folds.assign(ds.n, 0);
  }
  validate_dataset(ds);
  return ds;
}

void save_dataset(const TimeSeriesDataset& ds, const std::filesystem::path& dir) {
  validate_dataset(ds);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  json meta = {{"n", ds.n}, {"d", ds.d}, {"l", ds.l}, {"C", ds.C}, {"F", ds.F}, {"name", ds.name}};
  std::ofstream out(dir / "meta.json");
  if (!out) throw std::runtime_error("cannot open file for writing: " + (dir / "meta.json").string());
  out << meta.dump(2) << "\n";
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + (dir / "meta.json").string());
  write_flat(dir / "data.f32", ds.values);
  write_flat(dir / "labels.u32", ds.labels);
  write_flat(dir / "folds.u32", ds.folds);
}

TimeSeriesDataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.C == 0) throw std::runtime_error("synthetic spec: C must be positive");
  if (spec.n < spec.C) throw std::runtime_error("synthetic spec: n < C");
  if (spec.l < 8) throw std::runtime_error("synthetic spec: l must be >= 8");
  if (spec.d == 0) throw std::runtime_error("synthetic spec: d must be positive");
  if (spec.folds == 0) throw std::runtime_error("synthetic spec: fold count must be >= 1");
  if (spec.noise < 0) throw std::runtime_error("synthetic spec: noise must be >= 0");
  if (spec.kind == SyntheticKind::SinusoidFrequency && 2 * (spec.C + 1) > spec.l)
    throw std::runtime_error("synthetic spec: l too short for C distinct sinusoid frequencies");

  TimeSeriesDataset ds;
  ds.name = spec.name;
  ds.n = spec.n;
  ds.d = spec.d;
  ds.l = spec.l;
  ds.C = spec.C;
  ds.F = spec.folds;
  ds.values.resize(std::size_t(spec.n) * spec.d * spec.l);
  ds.labels.resize(spec.n);
  ds.folds.resize(spec.n);

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<uint32_t> per_class(spec.C, 0);

  for (uint32_t i = 0; i < spec.n; ++i) {
    const uint32_t k = i % spec.C;
    ds.labels[i] = k;
    ds.folds[i] = per_class[k]++ % spec.folds;  // stratified round-robin
    for (uint32_t j = 0; j < spec.d; ++j) {
      float* x = ds.values.data() + (std::size_t(i) * spec.d + j) * spec.l;
      switch (spec.kind) {
        case SyntheticKind::SinusoidFrequency: {
          const double freq = k + 1;  // whole cycles per window, distinct per class
          const double phase = 2.0 * std::numbers::pi * unit(rng);
          for (uint32_t t = 0; t < spec.l; ++t)
            x[t] = static_cast<float>(std::sin(2.0 * std::numbers::pi * freq * t / spec.l + phase) +
                                      spec.noise * gauss(rng));
          break;
        }
        case SyntheticKind::TrendSlope: {
          const double slope = spec.C == 1 ? 0.0 : -2.0 + 4.0 * k / (spec.C - 1);
          for (uint32_t t = 0; t < spec.l; ++t)
            x[t] = static_cast<float>(slope * (double(t) / (spec.l - 1) - 0.5) + spec.noise * gauss(rng));
          break;
        }
        case SyntheticKind::GaussianShift: {
          const double level = double(k);  // unit gaps between class means
          for (uint32_t t = 0; t < spec.l; ++t)
            x[t] = static_cast<float>(level + spec.noise * gauss(rng));
          break;
        }
      }
    }
  }
  validate_dataset(ds);
  return ds;
}

std::pair<TimeSeriesDataset, TimeSeriesDataset> split_folds(const TimeSeriesDataset& ds, uint32_t fold_id) {
  if (ds.F < 2) throw std::runtime_error("split_folds: F=1 leaves no held-out data");
  if (fold_id >= ds.F) throw std::runtime_error("split_folds: fold_id " + std::to_string(fold_id) +
                                                " out of range (F=" + std::to_string(ds.F) + ")");
  std::vector<uint32_t> train_idx, test_idx;
  for (uint32_t i = 0; i < ds.n; ++i)
    (ds.folds[i] == fold_id ? test_idx : train_idx).push_back(i);
  if (test_idx.empty()) throw std::runtime_error("split_folds: fold " + std::to_string(fold_id) + " is empty");
  if (train_idx.empty()) throw std::runtime_error("split_folds: fold " + std::to_string(fold_id) + " leaves no training data");

  auto take = [&](const std::vector<uint32_t>& idx) {
    TimeSeriesDataset out;
    out.name = ds.name;
    out.n = static_cast<uint32_t>(idx.size());
    out.d = ds.d;
    out.l = ds.l;
    out.C = ds.C;
    out.F = ds.F;
    out.values.resize(std::size_t(out.n) * ds.d * ds.l);
    out.labels.resize(out.n);
    out.folds.resize(out.n);
    const std::size_t stride = std::size_t(ds.d) * ds.l;
    for (std::size_t r = 0; r < idx.size(); ++r) {
      std::memcpy(out.values.data() + r * stride, ds.values.data() + idx[r] * stride, stride * sizeof(float));
      out.labels[r] = ds.labels[idx[r]];
      out.folds[r] = ds.folds[idx[r]];
    }
    return out;
  };

  TimeSeriesDataset train = take(train_idx);
  std::vector<char> seen(ds.C, 0);
  for (uint32_t lbl : train.labels) seen[lbl] = 1;
  for (uint32_t c = 0; c < ds.C; ++c)
    if (!seen[c])
      throw std::runtime_error("split_folds: class " + std::to_string(c) + " absent from train split for fold " +
                               std::to_string(fold_id));
  return {std::move(train), take(test_idx)};
}

TimeSeriesDataset normalize_per_channel(const TimeSeriesDataset& ds) {
  TimeSeriesDataset out = ds;
  for (uint32_t i = 0; i < ds.n; ++i) {
    for (uint32_t j = 0; j < ds.d; ++j) {
      float* x = out.values.data() + (std::size_t(i) * ds.d + j) * ds.l;
      double mean = 0;
      for (uint32_t t = 0; t < ds.l; ++t) mean += x[t];
      mean /= ds.l;
      double var = 0;
      for (uint32_t t = 0; t < ds.l; ++t) var += (x[t] - mean) * (x[t] - mean);
      const double sd = std::sqrt(var / ds.l);
      const double scale = sd > 1e-12 ? sd : 1.0;
      for (uint32_t t = 0; t < ds.l; ++t) x[t] = static_cast<float>((x[t] - mean) / scale);
    }
  }
  return out;
}

TimeSeriesDataset slice_instances(const TimeSeriesDataset& ds, std::size_t first, std::size_t count) {
  if (first + count > ds.n) throw std::runtime_error("slice_instances: range out of bounds");
  TimeSeriesDataset out;
  out.name = ds.name;
  out.n = static_cast<uint32_t>(count);
  out.d = ds.d;
  out.l = ds.l;
  out.C = ds.C;
  out.F = ds.F;
  const std::size_t stride = std::size_t(ds.d) * ds.l;
  out.values.assign(ds.values.begin() + first * stride, ds.values.begin() + (first + count) * stride);
  out.labels.assign(ds.labels.begin() + first, ds.labels.begin() + first + count);
  out.folds.assign(ds.folds.begin() + first, ds.folds.begin() + first + count);
  return out;
}

}  // namespace tsckit
