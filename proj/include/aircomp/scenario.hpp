// SPDX-License-Identifier: Apache-2.0
//
// Problem instances: physical constants, clusters of ground devices with MSE
// targets and power budgets, UAV count. Instances are immutable once built and
// safe to share across concurrent solver runs.
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace aircomp {

/// Channel / mission constants. All values are linear SI units internally;
/// dB / dBm appear only in scenario files and are converted at load.
struct PhysParams {
  double beta0 = 1e-5;   ///< channel power gain at 1 m reference distance
  double gamma = 2.0;    ///< path-loss exponent, >= 2
  double sigma2 = 1e-11; ///< receiver noise power (W)
  double altitude = 100.0; ///< fixed UAV altitude H (m)
  double vmax = 30.0;    ///< maximum UAV speed (m/s)
  double dmin = 100.0;   ///< minimum inter-UAV separation (m)
  double delta = 0.5;    ///< slot duration (s)
  double duration = 80.0; ///< mission duration T (s)

  /// Number of slots N = T/delta. Throws if T is not an integer multiple.
  int num_slots() const;
};

struct DeviceSpec {
  Eigen::Vector2d position = Eigen::Vector2d::Zero(); // horizontal w_k (m)
  double power_budget = 0.0;                          // total budget P_k (W)
};

struct Cluster {
  int id = 0;
  std::vector<DeviceSpec> devices;
  double epsilon = 0.0; ///< target instantaneous MSE, 0 < epsilon < 1
};

struct Scenario {
  PhysParams phys;
  std::vector<Cluster> clusters;
  int num_uavs = 1;
  std::uint64_t rng_seed = 0;

  int num_clusters() const { return static_cast<int>(clusters.size()); }
  int num_slots() const { return phys.num_slots(); }

  /// Total device count across clusters.
  int num_devices() const;
  /// Flat index of the first device of cluster l (devices are stored
  /// cluster-major).
  int device_offset(int l) const;
  /// Cluster owning flat device index k.
  int cluster_of_device(int k) const;
  const DeviceSpec& device(int k) const;
};

/// Unit conversions used by scenario files.
double db_to_linear(double db);
double dbm_to_watts(double dbm);

/// Returns one human-readable entry per violated invariant; empty means valid.
/// Violations are data, not faults: no exceptions for bad values.
std::vector<std::string> validate(const Scenario& s);

/// Scenario with the six reference cluster centers, 20 devices per cluster
/// drawn uniformly in 50 m discs, and the reference constants. Deterministic
/// for a given seed. Throws std::invalid_argument if T is not a multiple of
/// the 0.5 s slot.
Scenario generate_paper_scenario(double duration_s, int num_uavs,
                                 double power_budget_w, std::uint64_t seed);

/// Reduced instance for fast end-to-end runs: 3 clusters of 5 devices around
/// the first three reference centers, epsilon relaxed to 0.03 to match the
/// smaller aggregation gain of 5-device clusters.
Scenario generate_desk_scenario(double duration_s, int num_uavs,
                                double power_budget_w, std::uint64_t seed);

/// JSON (de)serialization. Loading accepts linear numbers or suffixed strings
/// ("-50 dB", "-80 dBm") for beta0/sigma2; saving always writes linear SI.
/// Parse failures throw std::runtime_error naming the offending field.
Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& s, const std::string& path);

bool operator==(const PhysParams& a, const PhysParams& b);
bool operator==(const DeviceSpec& a, const DeviceSpec& b);
bool operator==(const Cluster& a, const Cluster& b);
bool operator==(const Scenario& a, const Scenario& b);

}  // namespace aircomp
