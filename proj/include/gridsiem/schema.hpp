#pragma once

#include <map>
#include <string>
#include <vector>

#include "gridsiem/events.hpp"

namespace gridsiem {

struct AttrSpec {
  ScalarKind kind = ScalarKind::String;
  bool required = true;
};

using EventTypeSpec = std::map<std::string, AttrSpec>;

/// Table of event_type -> allowed attributes. Every event entering the store
/// is checked against it.
class SchemaRegistry {
 public:
  /// Registry pre-populated with every event type the built-in probes,
  /// simulators and engine produce.
  static SchemaRegistry builtin();

  /// Adds or extends an event type. Extending an existing type may add
  /// optional keys only; changing the kind of an existing key throws
  /// SchemaViolation.
  void register_type(const std::string& event_type, const EventTypeSpec& spec);

  bool knows(const std::string& event_type) const { return types_.count(event_type) != 0; }
  const EventTypeSpec& spec(const std::string& event_type) const;
  std::vector<std::string> event_types() const;

  /// Throws SchemaViolation naming the offending type or key.
  void validate(const NormalizedEvent& e) const;

 private:
  std::map<std::string, EventTypeSpec> types_;
};

}  // namespace gridsiem
