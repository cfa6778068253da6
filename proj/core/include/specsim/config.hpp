#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "specsim/drafter.hpp"
#include "specsim/exitctl.hpp"
#include "specsim/latmodel.hpp"
#include "specsim/toylm.hpp"
#include "specsim/workload.hpp"

namespace specsim {

enum class AblationMode { VSD, VSD_AD, VSD_AD_EE, FULL };

const char* mode_name(AblationMode mode);
AblationMode mode_from_name(const std::string& name);

enum class OverlapSetting { Auto, ForceOn, ForceOff };

struct WorkloadConfig {
  enum class Kind { Trace, Poisson, Sine, Backlog } kind = Kind::Poisson;
  std::string trace_path;
  std::vector<RateSegment> segments{{20000.0, 12.0}};
  double sine_mean_rate = 12.0;
  double sine_peak_to_valley = 10.0;
  double sine_duration_ms = 20000.0;
  int sine_steps = 12;
  int backlog = 128;
  std::pair<int, int> input_len{4, 12};
  std::pair<int, int> output_len{16, 48};
};

/// Materializes the arrival list for a workload (reads the trace file or
/// synthesizes arrivals, deterministically for the given seed).
std::vector<TraceRecord> materialize_workload(const WorkloadConfig& wl, std::uint64_t seed);

struct SimConfig {
  LayeredToyLM::Params model{.seed = 1, .divergence = 0.3};
  LatencyModel latency = LatencyModel::default_ground_truth();
  bool latency_from_file = false;
  std::string latency_file;
  DrafterConfig drafter;
  ExitPolicy exit_policy;
  std::vector<double> r_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  AblationMode mode = AblationMode::FULL;
  OverlapSetting overlap = OverlapSetting::Auto;
  int max_batch = 256;
  int fixed_spec_len = 4;
  WorkloadConfig workload;
  std::uint64_t seed = 1;
  bool oracle_check = true;
  bool iteration_records = false;
  bool event_log = false;

  bool adaptive_enabled() const { return mode != AblationMode::VSD; }
  bool early_exit_enabled() const {
    return mode == AblationMode::VSD_AD_EE || mode == AblationMode::FULL;
  }
  bool overlap_enabled() const {
    if (overlap == OverlapSetting::ForceOn) return true;
    if (overlap == OverlapSetting::ForceOff) return false;
    return mode == AblationMode::FULL;
  }
};

struct ProfileConfig {
  LatencyModel ground_truth = LatencyModel::default_ground_truth();
  ProfileGrid grid = ProfileGrid::standard();
  double sigma = 0.05;
  double holdout = 0.2;
  std::uint64_t seed = 1;
};

/// Reads the config file (a JSON document with one section per module) and
/// overlays it onto the defaults. Unknown top-level sections are rejected.
SimConfig load_sim_config(const std::string& path);
ProfileConfig load_profile_config(const std::string& path);

/// Canonical JSON rendering of the resolved config; reruns hash identically.
std::string sim_config_canonical(const SimConfig& cfg);
std::string profile_config_canonical(const ProfileConfig& cfg);

/// FNV-1a digest of a canonical config rendering.
std::string config_digest(const std::string& canonical);

/// Fitted-parameter file I/O (schema documented in docs/schemas.md).
void write_latency_params(const std::string& path, const LatencyModel& model,
                          const std::vector<std::pair<std::string, double>>& stage_mape);
LatencyModel read_latency_params(const std::string& path);

void write_profiles_json(const std::string& path,
                         const std::vector<std::pair<StageKind, std::vector<ProfileSample>>>& all);

}  // namespace specsim
