#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gridsiem/events.hpp"
#include "gridsiem/gps.hpp"
#include "gridsiem/ipnet.hpp"
#include "gridsiem/wsn.hpp"

namespace gridsiem {

struct ThresholdProfile {
  std::string signal_name;
  double mean = 0;
  double stddev = 0;
  double k = 0;
  double threshold = 0;  // mean + k * stddev
};

/// Population mean and standard deviation of the samples. The samples are
/// sorted before summation so the result does not depend on their order.
/// Throws EmptyTraining for no samples, Error for k < 0.
ThresholdProfile train_threshold(std::span<const double> samples, double k,
                                 std::string signal_name = {});

/// A probe output line before normalization.
struct RawRecord {
  std::string source_id;
  SourceKind source_kind = SourceKind::Simulator;
  std::string native_payload;
  TimeUs ts_us = 0;

  friend bool operator==(const RawRecord&, const RawRecord&) = default;
};

// Profile names used by the probes, the normalizer and the training stage.
std::string wsn_rate_signal(const std::string& node);
std::string app_arrival_signal(const std::string& server);
std::string traffic_ratio_signal(const std::string& router);
std::string host_occupancy_signal(const std::string& server);

/// SYN per ACK. An idle link reads 1.0; SYNs with no ACK at all read +inf.
double syn_to_ack_ratio(double syn, double ack);

/// Per-node origination rate over the last reporting period, one record per
/// live node. Reads only cumulative counters, never touches the simulator.
class WsnProbe {
 public:
  explicit WsnProbe(std::string source_id = "wsn") : source_id_(std::move(source_id)) {}
  std::vector<RawRecord> fire(const WsnSim& sim, TimeUs now_us, TimeUs period_us);

 private:
  std::string source_id_;
  std::map<std::string, std::int64_t> last_;
};

/// Arrival-rate alarm at the application server. Throws NotTrained without
/// a profile. Alarms iff count / window is strictly above the threshold.
std::optional<RawRecord> app_probe(std::int64_t arrival_count, TimeUs window_us,
                                   const ThresholdProfile* profile, const std::string& server_id,
                                   TimeUs now_us);

struct LinkSample {
  std::string router_id;
  std::int64_t syn = 0;
  std::int64_t synack = 0;
  std::int64_t ack = 0;
  TimeUs window_us = 0;
};

/// `TRAF` record for one probe window on one router.
RawRecord traffic_probe(const LinkSample& s, TimeUs now_us);

/// Turns a router's cumulative handshake counters into per-window samples.
class TrafficMeter {
 public:
  LinkSample sample(const Router& r, TimeUs window_us);

 private:
  std::map<std::string, std::array<std::int64_t, 3>> last_;
};

/// `HOST` record with the instantaneous half-open table occupancy.
RawRecord host_probe(const ServerState& s, TimeUs now_us);

struct GpsProbeConfig {
  double abs_threshold_dbhz = 50.0;
  double rel_threshold_dbhz = 6.0;
  double flat_variance_floor = 0.01;
  int allowed_churn = 1;
};

/// The four GPS detection techniques, one probe source each per receiver.
/// Source ids are "<receiver>:abs", ":rel", ":persat" and ":const".
class GpsProbeBank {
 public:
  explicit GpsProbeBank(GpsProbeConfig cfg = {}) : cfg_(cfg) {}

  std::vector<RawRecord> observe(const GpsSnapshot& snap);
  const GpsProbeConfig& config() const { return cfg_; }

 private:
  struct History {
    bool seen = false;
    double mean = 0;
    std::map<std::string, double> cn0;
  };
  GpsProbeConfig cfg_;
  std::map<std::string, History> history_;
};

/// Receiver id part of a GPS probe source id.
std::string gps_receiver_of(const std::string& source_id);

}  // namespace gridsiem
