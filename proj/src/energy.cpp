#include "tsckit/energy.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <stdexcept>

namespace tsckit {

uint64_t rapl_counter_delta(uint64_t before, uint64_t after, uint64_t max_range) {
  if (after >= before) return after - before;
  return (max_range - before) + after;
}

namespace {

constexpr char kPowercapRoot[] = "/sys/class/powercap";

uint64_t read_u64_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  uint64_t v = 0;
  if (!(in >> v)) throw std::runtime_error("cannot read counter file " + path.string());
  return v;
}

// Top-level package domains only (intel-rapl:N, not subdomains intel-rapl:N:M).
std::vector<std::filesystem::path> find_rapl_packages() {
  std::vector<std::filesystem::path> out;
  std::error_code ec;
  const std::regex package_re("^intel-rapl:[0-9]+$");
  for (const auto& entry : std::filesystem::directory_iterator(kPowercapRoot, ec)) {
    if (!std::regex_match(entry.path().filename().string(), package_re)) continue;
    if (std::filesystem::exists(entry.path() / "energy_uj", ec)) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

bool EnergyMeter::rapl_available() { return !find_rapl_packages().empty(); }

EnergyMeter EnergyMeter::create(const std::string& backend, double power_watts) {
  if (!(power_watts > 0.0)) throw std::runtime_error("proxy power draw must be positive");
  EnergyMeter m;
  m.power_watts_ = power_watts;
  if (backend != "auto" && backend != "rapl" && backend != "proxy")
    throw std::runtime_error("unknown energy backend '" + backend + "' (expected auto, rapl or proxy)");

  if (backend == "proxy") {
    m.backend_ = EnergyBackend::Proxy;
    return m;
  }
  const std::vector<std::filesystem::path> packages = find_rapl_packages();
  if (packages.empty()) {
    m.backend_ = EnergyBackend::Proxy;
    if (backend == "rapl")
      m.warning_ = "hardware energy counters unavailable; falling back to time x power proxy";
    return m;
  }
  m.backend_ = EnergyBackend::Rapl;
  for (const std::filesystem::path& pkg : packages) {
    m.domains_.push_back(pkg / "energy_uj");
    uint64_t range = 0;
    try {
      range = read_u64_file(pkg / "max_energy_range_uj");
    } catch (const std::exception&) {
      range = 0;  // no wraparound correction possible for this domain
    }
    m.max_ranges_.push_back(range);
  }
  return m;
}

EnergyMeter EnergyMeter::from_env() {
  const char* backend = std::getenv("TSCKIT_ENERGY_BACKEND");
  const char* watts = std::getenv("TSCKIT_POWER_W");
  double power = 50.0;
  if (watts != nullptr) {
    char* end = nullptr;
    power = std::strtod(watts, &end);
    if (end == watts || !(power > 0.0)) throw std::runtime_error("TSCKIT_POWER_W must be a positive number");
  }
  return create(backend != nullptr ? backend : "auto", power);
}

Measurement EnergyMeter::measure(const std::function<void()>& thunk) const {
  std::vector<uint64_t> before(domains_.size());
  if (backend_ == EnergyBackend::Rapl)
    for (std::size_t i = 0; i < domains_.size(); ++i) before[i] = read_u64_file(domains_[i]);

  const auto t0 = std::chrono::steady_clock::now();
  thunk();
  const auto t1 = std::chrono::steady_clock::now();

  Measurement out;
  out.seconds = std::chrono::duration<double>(t1 - t0).count();
  if (out.seconds < 0.0) out.seconds = 0.0;
  if (backend_ == EnergyBackend::Rapl) {
    uint64_t total_uj = 0;
    for (std::size_t i = 0; i < domains_.size(); ++i) {
      const uint64_t after = read_u64_file(domains_[i]);
      total_uj += max_ranges_[i] > 0 ? rapl_counter_delta(before[i], after, max_ranges_[i])
                                     : (after >= before[i] ? after - before[i] : 0);
    }
    out.joules = double(total_uj) / 1e6;
  } else {
    out.joules = out.seconds * power_watts_;  // proxy invariant: energy = time x power exactly
  }
  return out;
}

}  // namespace tsckit
