#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include "gridsiem/probes.hpp"

namespace gridsiem {

enum class CollectMode { Push, Pull };

struct CollectorConfig {
  CollectMode mode = CollectMode::Push;
  TimeUs pull_period_us = 0;  // Pull only
  std::size_t batch_max = std::numeric_limits<std::size_t>::max();
};

/// Throws Error when the config breaks its invariants.
void validate(const CollectorConfig& cfg);

constexpr std::size_t kDefaultBacklog = 10000;

/// A probe's outbox. Records wait here until a collector picks them up.
class ProbeSource {
 public:
  /// Throws Error when no parser is registered for `kind`.
  ProbeSource(std::string source_id, SourceKind kind, std::size_t backlog_max = kDefaultBacklog);

  /// Queues a record; when the backlog is full the oldest record is dropped.
  void emit(RawRecord r);

  void set_online(bool online) { online_ = online; }
  bool online() const { return online_; }

  const std::string& source_id() const { return source_id_; }
  SourceKind kind() const { return kind_; }
  std::size_t pending() const { return backlog_.size(); }
  std::int64_t dropped() const { return dropped_; }
  /// Drops since the last call; used to emit overflow events once.
  std::int64_t take_new_drops();

 private:
  friend std::vector<RawRecord> collect(const CollectorConfig&, ProbeSource&, TimeUs);

  std::string source_id_;
  SourceKind kind_;
  std::size_t backlog_max_;
  std::deque<RawRecord> backlog_;
  bool online_ = true;
  std::int64_t dropped_ = 0;
  std::int64_t reported_drops_ = 0;
  std::int64_t last_boundary_ = 0;  // pull: index of the last period boundary served
};

/// Push hands over everything pending. Pull hands over at most batch_max
/// records, and only on the first call after a new period boundary
/// (floor(now / period) increased). Throws SourceUnavailable when the source
/// is offline; its backlog is kept.
std::vector<RawRecord> collect(const CollectorConfig& cfg, ProbeSource& source, TimeUs now_us);

}  // namespace gridsiem
