#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace tsckit {

enum class EnergyBackend : uint8_t { Rapl = 0, Proxy = 1 };

struct Measurement {
  double seconds = 0.0;
  double joules = 0.0;
};

// Wraparound-corrected counter difference; RAPL energy_uj wraps at
// max_energy_range_uj.
uint64_t rapl_counter_delta(uint64_t before, uint64_t after, uint64_t max_range);

// Energy measurement around a thunk. Hardware backend reads the powercap RAPL
// package counters; the proxy backend reports wall_time * configured watts
// exactly, which keeps CI runs deterministic.
class EnergyMeter {
 public:
  // backend: "auto" (hardware if present, else proxy), "rapl" (fall back to
  // proxy with a warning if unavailable), "proxy".
  static EnergyMeter create(const std::string& backend, double power_watts);
  // TSCKIT_ENERGY_BACKEND / TSCKIT_POWER_W, defaults auto / 50 W.
  static EnergyMeter from_env();

  static bool rapl_available();

  Measurement measure(const std::function<void()>& thunk) const;

  EnergyBackend backend() const { return backend_; }
  std::string backend_name() const { return backend_ == EnergyBackend::Rapl ? "rapl" : "proxy"; }
  double power_watts() const { return power_watts_; }
  const std::string& warning() const { return warning_; }

 private:
  EnergyBackend backend_ = EnergyBackend::Proxy;
  double power_watts_ = 50.0;
  std::string warning_;
  std::vector<std::filesystem::path> domains_;     // energy_uj files, hardware backend
  std::vector<uint64_t> max_ranges_;               // per domain
};

}  // namespace tsckit
