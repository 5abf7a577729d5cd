#include "tsckit/quant.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

#include "tsckit/parallel.hpp"

namespace tsckit {

QuantRepresentation quant_representation_from_string(const std::string& s) {
  if (s == "identity") return QuantRepresentation::Identity;
  if (s == "first-difference") return QuantRepresentation::FirstDiff;
  if (s == "second-difference") return QuantRepresentation::SecondDiff;
  if (s == "fourier-magnitude") return QuantRepresentation::FourierMagnitude;
  throw std::runtime_error("unknown quant representation '" + s + "'");
}

std::string to_string(QuantRepresentation rep) {
  switch (rep) {
    case QuantRepresentation::Identity: return "identity";
    case QuantRepresentation::FirstDiff: return "first-difference";
    case QuantRepresentation::SecondDiff: return "second-difference";
    case QuantRepresentation::FourierMagnitude: return "fourier-magnitude";
  }
  throw std::runtime_error("invalid quant representation value");
}

uint32_t representation_length(QuantRepresentation rep, uint32_t l) {
  switch (rep) {
    case QuantRepresentation::Identity: return l;
    case QuantRepresentation::FirstDiff: return l >= 1 ? l - 1 : 0;
    case QuantRepresentation::SecondDiff: return l >= 2 ? l - 2 : 0;
    case QuantRepresentation::FourierMagnitude: return l / 2 + 1;
  }
  return 0;
}

uint32_t quant_depth_cap(uint32_t l) {
  uint32_t depth = 0;
  while (depth < 31 && (l >> (depth + 1)) >= 2) ++depth;
  return depth;
}

QuantConfig quant_defaults_for_length(uint32_t l) {
  QuantConfig cfg;
  cfg.depth = std::min(cfg.depth, quant_depth_cap(l));
  return cfg;
}

static void check_config(const QuantConfig& cfg) {
  if (cfg.quantile_divisor < 1) throw std::runtime_error("quant quantile divisor must be >= 1");
  if (cfg.representations.empty()) throw std::runtime_error("quant config needs at least one representation");
  if (cfg.depth > 24) throw std::runtime_error("quant depth " + std::to_string(cfg.depth) + " is unreasonably large");
}

uint32_t QuantTransform::feature_count() const {
  uint32_t q = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) q += row_quantiles(i);
  return q;
}

QuantTransform quant_fit(const QuantConfig& cfg, uint32_t d, uint32_t l) {
  check_config(cfg);
  if (d == 0 || l == 0) throw std::runtime_error("quant_fit requires d >= 1 and l >= 1");
  if (l < (uint64_t(1) << cfg.depth))
    throw std::runtime_error("series length " + std::to_string(l) + " is shorter than 2^depth = " +
                             std::to_string(uint64_t(1) << cfg.depth));

  QuantTransform t;
  t.cfg = cfg;
  t.d = d;
  t.l = l;
  for (QuantRepresentation rep : cfg.representations) {
    const uint32_t rep_len = representation_length(rep, l);
    for (uint32_t ch = 0; ch < d; ++ch) {
      for (uint32_t k = 0; k <= cfg.depth; ++k) {
        const uint64_t tiles = uint64_t(1) << k;
        if (tiles > rep_len) break;  // deeper tiles would be empty for this representation
        for (uint64_t i = 0; i < tiles; ++i) {
          QuantInterval row;
          row.rep = rep;
          row.channel = ch;
          row.start = static_cast<uint32_t>(i * rep_len / tiles);
          row.end = static_cast<uint32_t>((i + 1) * rep_len / tiles);
          t.rows.push_back(row);
        }
      }
    }
  }
  return t;
}

namespace {

// Per-worker scratch: representation vectors are computed at most once per
// (instance, channel, representation) and reused across interval rows.
struct RepCache {
  uint32_t d = 0;
  uint32_t l = 0;
  std::vector<std::vector<double>> vecs;  // 4*d slots, indexed rep*d+channel
  std::vector<uint8_t> ready;
  Eigen::FFT<double> fft;
  std::vector<double> time_buf;
  std::vector<std::complex<double>> freq_buf;

  RepCache(uint32_t d_, uint32_t l_) : d(d_), l(l_), vecs(4 * std::size_t(d_)), ready(4 * std::size_t(d_), 0) {}

  void reset() { std::fill(ready.begin(), ready.end(), uint8_t(0)); }

  const std::vector<double>& get(const TimeSeriesDataset& ds, std::size_t inst, QuantRepresentation rep,
                                 uint32_t ch) {
    const std::size_t slot = std::size_t(static_cast<uint8_t>(rep)) * d + ch;
    if (ready[slot]) return vecs[slot];
    std::vector<double>& out = vecs[slot];
    const float* x = ds.channel(inst, ch);
    switch (rep) {
      case QuantRepresentation::Identity:
        out.assign(x, x + l);
        break;
      case QuantRepresentation::FirstDiff:
        out.resize(l - 1);
        for (uint32_t i = 0; i + 1 < l; ++i) out[i] = double(x[i + 1]) - double(x[i]);
        break;
      case QuantRepresentation::SecondDiff:
        out.resize(l - 2);
        for (uint32_t i = 0; i + 2 < l; ++i) out[i] = double(x[i + 2]) - 2.0 * double(x[i + 1]) + double(x[i]);
        break;
      case QuantRepresentation::FourierMagnitude: {
        time_buf.assign(x, x + l);
        fft.fwd(freq_buf, time_buf);
        const uint32_t bins = l / 2 + 1;
        out.resize(bins);
        for (uint32_t i = 0; i < bins; ++i) out[i] = std::abs(freq_buf[i]);
        break;
      }
    }
    ready[slot] = 1;
    return out;
  }
};

// m quantiles of vals at probabilities (j+0.5)/m via linear interpolation on
// the sorted order statistics; odd-indexed quantiles get the interval mean
// subtracted.
void interval_features(std::vector<double>& vals, uint32_t m, double* out) {
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= double(vals.size());
  std::sort(vals.begin(), vals.end());
  const double last = double(vals.size() - 1);
  for (uint32_t j = 0; j < m; ++j) {
    const double p = (double(j) + 0.5) / double(m);
    const double h = p * last;
    const std::size_t lo = static_cast<std::size_t>(h);
    const std::size_t hi = std::min(lo + 1, vals.size() - 1);
    const double frac = h - double(lo);
    double q = vals[lo] + frac * (vals[hi] - vals[lo]);
    if (j % 2 == 1) q -= mean;
    out[j] = q;
  }
}

}  // namespace

FeatureMatrix quant_transform_range(const QuantTransform& t, const TimeSeriesDataset& ds, std::size_t first,
                                    std::size_t count, int threads) {
  if (ds.d != t.d || ds.l != t.l)
    throw std::runtime_error("quant_transform: dataset dims (d=" + std::to_string(ds.d) + ", l=" +
                             std::to_string(ds.l) + ") do not match transform (d=" + std::to_string(t.d) +
                             ", l=" + std::to_string(t.l) + ")");
  if (first + count > ds.n) throw std::runtime_error("quant_transform: instance range out of bounds");

  std::vector<std::size_t> col_off(t.rows.size() + 1, 0);
  for (std::size_t i = 0; i < t.rows.size(); ++i) col_off[i + 1] = col_off[i] + t.row_quantiles(i);

  FeatureMatrix out(count, col_off.back());
  parallel_for(count, threads, [&](std::size_t begin, std::size_t end) {
    RepCache cache(t.d, t.l);
    std::vector<double> slice;
    for (std::size_t r = begin; r < end; ++r) {
      cache.reset();
      double* dst = out.row(r);
      for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const QuantInterval& row = t.rows[i];
        const std::vector<double>& rep = cache.get(ds, first + r, row.rep, row.channel);
        slice.assign(rep.begin() + row.start, rep.begin() + row.end);
        interval_features(slice, t.row_quantiles(i), dst + col_off[i]);
      }
    }
  });
  return out;
}

FeatureMatrix quant_transform(const QuantTransform& t, const TimeSeriesDataset& ds, int threads) {
  return quant_transform_range(t, ds, 0, ds.n, threads);
}

QuantTransform quant_prune(const QuantTransform& t, const std::vector<uint32_t>& keep) {
  if (keep.empty()) throw std::runtime_error("quant_prune: keep set is empty");
  std::vector<uint32_t> ids(keep);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (ids.back() >= t.rows.size())
    throw std::runtime_error("quant_prune: set id " + std::to_string(ids.back()) + " out of range (S=" +
                             std::to_string(t.rows.size()) + ")");
  QuantTransform pruned;
  pruned.cfg = t.cfg;
  pruned.d = t.d;
  pruned.l = t.l;
  pruned.rows.reserve(ids.size());
  for (uint32_t id : ids) pruned.rows.push_back(t.rows[id]);
  return pruned;
}

SetLayout quant_set_layout(const QuantTransform& t) {
  SetLayout layout;
  layout.reserve(t.rows.size());
  uint32_t off = 0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const uint32_t m = t.row_quantiles(i);
    layout.push_back(SetSpan{static_cast<uint32_t>(i), Origin::Quant, off, m});
    off += m;
  }
  return layout;
}

static constexpr char kQuantMagic[] = "QNTR";
static constexpr uint32_t kQuantVersion = 1;

void quant_save(const QuantTransform& t, BlobWriter& w) {
  w.magic(kQuantMagic);
  w.u32(kQuantVersion);
  w.u32(t.cfg.depth);
  w.u32(t.cfg.quantile_divisor);
  w.u32(static_cast<uint32_t>(t.cfg.representations.size()));
  for (QuantRepresentation rep : t.cfg.representations) w.u8(static_cast<uint8_t>(rep));
  w.u32(t.d);
  w.u32(t.l);
  w.u64(t.rows.size());
  for (const QuantInterval& row : t.rows) {
    w.u8(static_cast<uint8_t>(row.rep));
    w.u32(row.channel);
    w.u32(row.start);
    w.u32(row.end);
  }
}

QuantTransform quant_load(BlobReader& r) {
  r.expect_magic(kQuantMagic);
  const uint32_t version = r.u32();
  if (version != kQuantVersion)
    throw std::runtime_error("unsupported quant transform version " + std::to_string(version));
  QuantTransform t;
  t.cfg.depth = r.u32();
  t.cfg.quantile_divisor = r.u32();
  const uint32_t n_reps = r.u32();
  t.cfg.representations.clear();
  for (uint32_t i = 0; i < n_reps; ++i) t.cfg.representations.push_back(static_cast<QuantRepresentation>(r.u8()));
  t.d = r.u32();
  t.l = r.u32();
  const uint64_t n_rows = r.u64();
  t.rows.resize(n_rows);
  for (uint64_t i = 0; i < n_rows; ++i) {
    t.rows[i].rep = static_cast<QuantRepresentation>(r.u8());
    t.rows[i].channel = r.u32();
    t.rows[i].start = r.u32();
    t.rows[i].end = r.u32();
  }
  return t;
}

}  // namespace tsckit
