#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gridsiem/events.hpp"
#include "gridsiem/rng.hpp"

namespace gridsiem {

struct SatelliteObservation {
  std::string sat_id;
  double cn0_dbhz = 0;
  TimeUs epoch_us = 0;
};

struct GpsReceiverState {
  std::string receiver_id;
  std::vector<SatelliteObservation> visible;
  bool locked = false;
  double clock_offset_us = 0;
  bool holdover = false;    // reported clock frozen by a reaction
  double held_offset_us = 0;
};

enum class SpoofMode { OverrideStrength, TooPerfect, ConstellationSwap };

std::string_view to_string(SpoofMode m);
std::optional<SpoofMode> parse_spoof_mode(std::string_view s);

struct SpoofConfig {
  std::string target_receiver;
  SpoofMode mode = SpoofMode::OverrideStrength;
  double strength_dbhz = 55.0;     // OverrideStrength
  double flat_dbhz = 44.0;         // TooPerfect: every satellite reads this
  double injected_offset_us = 500.0;
  TimeUs start_us = 0;
  TimeUs stop_us = 0;
};

struct GpsConfig {
  std::vector<std::string> receivers{"pmu1", "pmu2", "pmu3"};
  int pool_size = 32;          // satellite ids G01..Gnn
  int n_visible = 8;
  double baseline_lo_dbhz = 43.0;
  double baseline_hi_dbhz = 45.0;
  double jitter_dbhz = 1.0;
  TimeUs epoch_us = kUsPerSecond;
  // Every `rise_set_every` epochs the longest-visible satellite sets and the
  // next unused one rises; every `double_pass_every`-th such pass two swap at
  // once. 0 disables the schedule.
  int rise_set_every = 100;
  int double_pass_every = 6;
};

struct GpsSnapshot {
  std::string receiver_id;
  TimeUs epoch_us = 0;
  std::vector<SatelliteObservation> visible;
};

struct PmuReport {
  std::string receiver_id;
  TimeUs true_time_us = 0;
  double reported_us = 0;
};

struct PdcDiscrepancy {
  std::string pmu_a;
  std::string pmu_b;
  double discrepancy_us = 0;
};

/// Per-receiver satellite snapshots on a fixed epoch clock. All receivers see
/// the same sky; each has its own per-satellite baseline strengths.
class GpsSim {
 public:
  GpsSim(GpsConfig config, std::uint64_t seed);

  /// Advances one epoch and returns one snapshot per receiver.
  std::vector<GpsSnapshot> step();

  /// Throws UnknownNode for an unknown receiver.
  void inject_spoof(const SpoofConfig& cfg);

  /// Throws NotLocked when fewer than 4 satellites are visible.
  double pmu_timestamp(const std::string& receiver, TimeUs true_time_us) const;

  /// Freezes the receiver's reported clock at its last good offset.
  void flag_holdover(const std::string& receiver);

  const GpsReceiverState& receiver(const std::string& id) const;
  const std::map<std::string, GpsReceiverState>& receivers() const { return receivers_; }
  const GpsConfig& config() const { return config_; }
  const std::optional<SpoofConfig>& spoof() const { return spoof_; }
  TimeUs now() const { return now_us_; }

  std::string digest() const;

 private:
  std::string sat_name(int i) const;
  void rise_set();

  GpsConfig config_;
  Rng rng_;
  Rng spoof_rng_;
  TimeUs now_us_ = 0;
  std::int64_t epoch_index_ = 0;
  std::int64_t passes_ = 0;
  std::deque<int> sky_;  // visible satellites, oldest first
  int next_rise_ = 0;
  std::map<std::string, std::vector<double>> baseline_;  // receiver -> per sat
  std::map<std::string, GpsReceiverState> receivers_;
  std::optional<SpoofConfig> spoof_;
  std::vector<int> swap_ids_;
};

/// Pairwise reported-timestamp differences for one nominal epoch (a < b by id).
std::vector<PdcDiscrepancy> pdc_compare(const std::vector<PmuReport>& reports);

}  // namespace gridsiem
