#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <memory>
#include <vector>

#include "gridsiem/events.hpp"
#include "gridsiem/schema.hpp"

namespace gridsiem {

constexpr TimeUs kDefaultReorderToleranceUs = 2 * kUsPerSecond;

/// Append-only event log with a (ts_us, event_id) ordered index.
///
/// The store assigns event ids itself: the id of an appended event equals the
/// number of events stored before it. Events may arrive out of timestamp
/// order by up to `reorder_tolerance_us` behind the watermark (the largest
/// timestamp seen, or the clock set via advance_watermark); older events are
/// rejected with OutOfOrder.
///
/// Single writer. Readers see every append immediately.
class EventStore {
 public:
  explicit EventStore(SchemaRegistry registry = SchemaRegistry::builtin(),
                      TimeUs reorder_tolerance_us = kDefaultReorderToleranceUs);

  /// Mirror every accepted event to `path` in the persistent line format.
  void persist_to(const std::filesystem::path& path);

  /// Validates, assigns the id and stores. Returns the storage offset.
  std::size_t append(NormalizedEvent event);

  /// Raises the watermark to `now_us` without storing anything. Lets the
  /// scheduler seal time that passed without events.
  void advance_watermark(TimeUs now_us);

  std::vector<NormalizedEvent> query(const EventQuery& q) const;

  std::size_t size() const { return log_.size(); }
  TimeUs watermark() const { return watermark_; }
  TimeUs reorder_tolerance() const { return tolerance_; }
  const SchemaRegistry& registry() const { return registry_; }
  SchemaRegistry& registry() { return registry_; }

  /// Events in append (event_id) order.
  const std::vector<NormalizedEvent>& log() const { return log_; }

  /// Events in (ts_us, event_id) order. Positions before the first event with
  /// ts >= watermark - tolerance are stable: later appends never land there.
  std::size_t ordered_size() const { return order_.size(); }
  const NormalizedEvent& ordered_at(std::size_t i) const { return log_[order_[i]]; }

  /// Writes the whole log in append order.
  void write_log(std::ostream& os) const;

 private:
  SchemaRegistry registry_;
  TimeUs tolerance_;
  TimeUs watermark_ = 0;
  std::vector<NormalizedEvent> log_;
  std::vector<std::size_t> order_;
  std::unique_ptr<std::ofstream> sink_;
};

/// Reads a persisted log. Every line, including the last, must be complete
/// and newline-terminated; otherwise LogCorrupt names the offending line.
/// When `registry` is given each event is also schema-checked.
std::vector<NormalizedEvent> read_log(std::istream& is, const SchemaRegistry* registry = nullptr);
std::vector<NormalizedEvent> read_log_file(const std::filesystem::path& path,
                                           const SchemaRegistry* registry = nullptr);

}  // namespace gridsiem
