#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>

namespace gridsiem {

/// Simulation time in microseconds since scenario start.
using TimeUs = std::int64_t;

constexpr TimeUs kUsPerSecond = 1'000'000;

constexpr TimeUs seconds_to_us(double s) {
  return static_cast<TimeUs>(s * static_cast<double>(kUsPerSecond) + (s >= 0 ? 0.5 : -0.5));
}

enum class SourceKind {
  WsnProbe,
  AppProbe,
  TrafficProbe,
  HostProbe,
  GpsAbsProbe,
  GpsRelProbe,
  GpsPerSatProbe,
  GpsConstProbe,
  Simulator,
  Engine,
};

enum class Severity { Info, Warning, Alarm };

std::string_view to_string(SourceKind k);
std::string_view to_string(Severity s);
std::optional<SourceKind> parse_source_kind(std::string_view s);
std::optional<Severity> parse_severity(std::string_view s);

using Scalar = std::variant<std::int64_t, double, std::string>;

enum class ScalarKind { Integer, Real, String };

ScalarKind kind_of(const Scalar& v);

// Keys are kept sorted so that rendering is deterministic.
using Attrs = std::map<std::string, Scalar>;

struct NormalizedEvent {
  std::uint64_t event_id = 0;
  TimeUs ts_us = 0;
  std::string source_id;
  SourceKind source_kind = SourceKind::Simulator;
  std::string event_type;
  Severity severity = Severity::Info;
  Attrs attrs;

  // Typed accessors; throw std::out_of_range / std::bad_variant_access when
  // the attribute is absent or of a different kind. get_real accepts integers.
  const std::string& get_string(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  double get_real(const std::string& key) const;
  bool has(const std::string& key) const { return attrs.count(key) != 0; }

  friend bool operator==(const NormalizedEvent&, const NormalizedEvent&) = default;
};

struct EventQuery {
  TimeUs t_start_us = 0;
  TimeUs t_end_us = 0;  // inclusive
  std::optional<std::set<SourceKind>> source_kinds;
  std::optional<std::set<std::string>> event_types;
  Attrs attr_equals;

  bool matches(const NormalizedEvent& e) const;
};

/// Renders a scalar the way the persistent log stores it: integers in
/// decimal, reals as the shortest round-trip decimal (always carrying a '.'
/// or exponent so they stay distinguishable from integers), strings quoted.
std::string render_scalar(const Scalar& v);

/// Inverse of render_scalar. Returns nullopt for malformed text.
std::optional<Scalar> parse_scalar(std::string_view text);

/// Shortest round-trip decimal for a real, without the ".0" suffix.
std::string format_real(double d);

/// Parses a complete decimal real ("inf" and "nan" included).
std::optional<double> parse_real(std::string_view text);

/// Something a simulator wants recorded in the event log verbatim
/// (source_kind Simulator).
struct SimEvent {
  TimeUs ts_us = 0;
  std::string source_id;
  std::string event_type;
  Severity severity = Severity::Info;
  Attrs attrs;
};

/// One log line without the trailing newline.
std::string to_log_line(const NormalizedEvent& e);

/// Parses one log line (no trailing newline). Throws LogCorrupt tagged with
/// `line_no` when the line is malformed.
NormalizedEvent parse_log_line(std::string_view line, std::size_t line_no);

}  // namespace gridsiem
