#include "tsckit/hydra.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "tsckit/parallel.hpp"

namespace tsckit {

namespace {

void check_config(const HydraConfig& cfg) {
  if (cfg.groups < 1) throw std::runtime_error("hydra: groups must be >= 1");
  if (cfg.kernels_per_group < 2) throw std::runtime_error("hydra: kernels_per_group must be >= 2");
  if (cfg.kernel_length < 3 || cfg.kernel_length % 2 == 0)
    throw std::runtime_error("hydra: kernel_length must be odd and >= 3");
}

}  // namespace

HydraTransform hydra_fit(const HydraConfig& cfg, uint32_t d, uint32_t l) {
  check_config(cfg);
  if (d == 0 || l == 0) throw std::runtime_error("hydra: d and l must be positive");
  if (l < cfg.kernel_length)
    throw std::runtime_error("hydra: series length " + std::to_string(l) + " shorter than kernel_length " +
                             std::to_string(cfg.kernel_length));

  HydraTransform t;
  t.cfg = cfg;
  t.d = d;
  t.l = l;

  // dilations 2^0, 2^1, ... while the dilated kernel extent fits the series
  for (uint32_t e = 0;; ++e) {
    if (cfg.max_dilation_exponent >= 0 && e > static_cast<uint32_t>(cfg.max_dilation_exponent)) break;
    const uint64_t dilation = uint64_t(1) << e;
    const uint64_t extent = uint64_t(cfg.kernel_length - 1) * dilation + 1;
    if (extent > l) break;
    t.dilations.push_back(static_cast<uint32_t>(dilation));
  }

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const std::size_t kernels = std::size_t(cfg.groups) * cfg.kernels_per_group;
  t.weights.resize(kernels * cfg.kernel_length);
  for (std::size_t kid = 0; kid < kernels; ++kid) {
    double* w = t.weights.data() + kid * cfg.kernel_length;
    double mean = 0;
    for (uint32_t u = 0; u < cfg.kernel_length; ++u) {
      w[u] = gauss(rng);
      mean += w[u];
    }
    mean /= cfg.kernel_length;
    for (uint32_t u = 0; u < cfg.kernel_length; ++u) w[u] -= mean;
  }

  // each group mixes a fixed random subset of min(d, 8) channels; their
  // convolution responses are summed before kernels compete
  t.channels_per_group = std::min<uint32_t>(d, 8);
  t.group_channels.resize(std::size_t(cfg.groups) * t.channels_per_group);
  std::vector<uint32_t> all(d);
  for (uint32_t c = 0; c < d; ++c) all[c] = c;
  for (uint32_t g = 0; g < cfg.groups; ++g) {
    std::vector<uint32_t> pool = all;
    for (uint32_t s = 0; s < t.channels_per_group; ++s) {
      std::uniform_int_distribution<uint32_t> pick(s, d - 1);
      std::swap(pool[s], pool[pick(rng)]);
      t.group_channels[std::size_t(g) * t.channels_per_group + s] = pool[s];
    }
  }

  const uint32_t n_dil = static_cast<uint32_t>(t.dilations.size());
  t.total_sets_at_fit = cfg.groups * n_dil;
  t.sets.reserve(t.total_sets_at_fit);
  for (uint32_t g = 0; g < cfg.groups; ++g)
    for (uint32_t di = 0; di < n_dil; ++di)
      t.sets.push_back({g * n_dil + di, g, di});
  return t;
}

namespace {

// Accumulates the three feature blocks for one (group, dilation) pair.
// response_j(t) = sum_u w_j[u] * buf[t + (u - center)*dilation], zero padded.
void transform_set(const HydraTransform& t, const std::vector<double>& buf, uint32_t dilation, const double* kernels,
                   double* out) {
  const uint32_t k = t.cfg.kernels_per_group;
  const uint32_t len = t.cfg.kernel_length;
  const int32_t center = (len - 1) / 2;
  const int32_t l = static_cast<int32_t>(t.l);
  const int32_t dil = static_cast<int32_t>(dilation);

  double* hard_max = out;
  double* soft_max = out + k;
  double* hard_min = out + 2 * k;
  std::vector<double> resp(k);

  for (int32_t pos = 0; pos < l; ++pos) {
    const int32_t base = pos - center * dil;
    // valid kernel taps: base + u*dil in [0, l)
    int32_t u_lo = base >= 0 ? 0 : (-base + dil - 1) / dil;
    int32_t u_hi = (l - 1 - base) / dil;
    if (u_hi > static_cast<int32_t>(len) - 1) u_hi = len - 1;

    for (uint32_t j = 0; j < k; ++j) {
      const double* w = kernels + std::size_t(j) * len;
      double acc = 0;
      const double* x = buf.data() + base + int64_t(u_lo) * dil;
      for (int32_t u = u_lo; u <= u_hi; ++u, x += dil) acc += w[u] * *x;
      resp[j] = acc;
    }
    uint32_t arg_max = 0, arg_min = 0;
    for (uint32_t j = 1; j < k; ++j) {
      if (resp[j] > resp[arg_max]) arg_max = j;  // ties stay with the lowest index
      if (resp[j] < resp[arg_min]) arg_min = j;
    }
    hard_max[arg_max] += 1.0;
    soft_max[arg_max] += resp[arg_max];
    hard_min[arg_min] += 1.0;
  }
}

}  // namespace

FeatureMatrix hydra_transform_range(const HydraTransform& t, const TimeSeriesDataset& ds, std::size_t first,
                                    std::size_t count, int threads) {
  if (ds.d != t.d || ds.l != t.l)
    throw std::runtime_error("hydra_transform: dataset dimensions (d=" + std::to_string(ds.d) +
                             ", l=" + std::to_string(ds.l) + ") do not match transform (d=" + std::to_string(t.d) +
                             ", l=" + std::to_string(t.l) + ")");
  if (first + count > ds.n) throw std::runtime_error("hydra_transform: instance range out of bounds");

  // group -> sorted positions in the active set list; untouched groups skip
  // even their channel sum
  std::vector<std::vector<uint32_t>> group_sets(t.cfg.groups);
  for (uint32_t s = 0; s < t.set_count(); ++s) group_sets[t.sets[s].group].push_back(s);

  FeatureMatrix out(count, t.feature_count());
  const uint32_t fps = t.features_per_set();

  parallel_for(count, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> buf(t.l);
    for (std::size_t r = begin; r < end; ++r) {
      const std::size_t i = first + r;
      double* row = out.row(r);
      for (uint32_t g = 0; g < t.cfg.groups; ++g) {
        if (group_sets[g].empty()) continue;
        // convolution is linear, so summing responses over the group's
        // channels equals convolving the channel sum once
        const uint32_t* chans = t.group_channels.data() + std::size_t(g) * t.channels_per_group;
        const float* x0 = ds.channel(i, chans[0]);
        for (uint32_t u = 0; u < t.l; ++u) buf[u] = x0[u];
        for (uint32_t c = 1; c < t.channels_per_group; ++c) {
          const float* xc = ds.channel(i, chans[c]);
          for (uint32_t u = 0; u < t.l; ++u) buf[u] += xc[u];
        }
        const double* kernels = t.kernel(g, 0);
        for (uint32_t pos : group_sets[g])
          transform_set(t, buf, t.dilations[t.sets[pos].dilation_index], kernels, row + std::size_t(pos) * fps);
      }
    }
  });
  return out;
}

FeatureMatrix hydra_transform(const HydraTransform& t, const TimeSeriesDataset& ds, int threads) {
  return hydra_transform_range(t, ds, 0, ds.n, threads);
}

HydraTransform hydra_prune(const HydraTransform& t, const std::vector<uint32_t>& keep) {
  if (keep.empty()) throw std::runtime_error("hydra_prune: keep set is empty");
  std::vector<uint32_t> sorted = keep;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  if (sorted.back() >= t.set_count())
    throw std::runtime_error("hydra_prune: set id " + std::to_string(sorted.back()) + " out of range (S=" +
                             std::to_string(t.set_count()) + ")");
  HydraTransform out = t;
  out.sets.clear();
  for (uint32_t s : sorted) out.sets.push_back(t.sets[s]);
  return out;
}

SetLayout hydra_set_layout(const HydraTransform& t) {
  SetLayout layout;
  layout.reserve(t.set_count());
  const uint32_t fps = t.features_per_set();
  for (uint32_t s = 0; s < t.set_count(); ++s) layout.push_back({s, Origin::Hydra, s * fps, fps});
  return layout;
}

void hydra_save(const HydraTransform& t, BlobWriter& w) {
  w.magic("HYTR");
  w.u32(1);  // version
  w.u32(t.cfg.groups);
  w.u32(t.cfg.kernels_per_group);
  w.u32(t.cfg.kernel_length);
  w.u64(t.cfg.seed);
  w.i32(t.cfg.max_dilation_exponent);
  w.u32(t.d);
  w.u32(t.l);
  w.u32(t.channels_per_group);
  w.u32(t.total_sets_at_fit);
  w.vec(t.weights);
  w.vec(t.dilations);
  w.vec(t.group_channels);
  std::vector<uint32_t> flat;
  flat.reserve(t.sets.size() * 3);
  for (const HydraSet& s : t.sets) {
    flat.push_back(s.original_id);
    flat.push_back(s.group);
    flat.push_back(s.dilation_index);
  }
  w.vec(flat);
}

HydraTransform hydra_load(BlobReader& r) {
  r.expect_magic("HYTR");
  const uint32_t version = r.u32();
  if (version != 1) throw std::runtime_error("hydra blob: unsupported version " + std::to_string(version));
  HydraTransform t;
  t.cfg.groups = r.u32();
  t.cfg.kernels_per_group = r.u32();
  t.cfg.kernel_length = r.u32();
  t.cfg.seed = r.u64();
  t.cfg.max_dilation_exponent = r.i32();
  t.d = r.u32();
  t.l = r.u32();
  t.channels_per_group = r.u32();
  t.total_sets_at_fit = r.u32();
  t.weights = r.vec<double>();
  t.dilations = r.vec<uint32_t>();
  t.group_channels = r.vec<uint32_t>();
  std::vector<uint32_t> flat = r.vec<uint32_t>();
  if (flat.size() % 3 != 0) throw std::runtime_error("hydra blob: malformed set table");
  for (std::size_t i = 0; i < flat.size(); i += 3) t.sets.push_back({flat[i], flat[i + 1], flat[i + 2]});
  return t;
}

}  // namespace tsckit
