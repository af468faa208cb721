#pragma once

#include <map>
#include <string>

#include "gridsiem/events.hpp"
#include "gridsiem/probes.hpp"
#include "gridsiem/schema.hpp"

namespace gridsiem {

/// What the normalizer knows beyond the record itself: probe periods and the
/// trained profiles it uses to enrich reports.
struct NormalizerContext {
  TimeUs wsn_period_us = 60 * kUsPerSecond;
  TimeUs app_window_us = 10 * kUsPerSecond;
  TimeUs traffic_window_us = 5 * kUsPerSecond;
  std::map<std::string, ThresholdProfile> profiles;  // by signal name
};

/// True when a native-line parser exists for records of this kind.
bool has_parser(SourceKind kind);

class Normalizer {
 public:
  explicit Normalizer(NormalizerContext ctx = {},
                      const SchemaRegistry& registry = SchemaRegistry::builtin());

  /// Parses the native line and builds the schema-valid event (event_id 0).
  /// Throws ParseError for anything malformed.
  NormalizedEvent normalize(const RawRecord& r) const;

  NormalizerContext& context() { return ctx_; }
  const NormalizerContext& context() const { return ctx_; }

 private:
  const ThresholdProfile* profile(const std::string& signal) const;

  NormalizerContext ctx_;
  SchemaRegistry registry_;
};

/// Normalization with the default context (no trained profiles).
NormalizedEvent normalize(const RawRecord& r);

}  // namespace gridsiem
