#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gridsiem {

// Base of every error raised by the library. Callers that only care about
// "something in the pipeline rejected this" can catch Error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define GRIDSIEM_ERROR(Name)                \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

// events_store
GRIDSIEM_ERROR(SchemaViolation);
GRIDSIEM_ERROR(OutOfOrder);

// probes_collect
GRIDSIEM_ERROR(ParseError);
GRIDSIEM_ERROR(SourceUnavailable);
GRIDSIEM_ERROR(EmptyTraining);
GRIDSIEM_ERROR(NotTrained);

// engine
GRIDSIEM_ERROR(DuplicateRuleId);
GRIDSIEM_ERROR(InvalidRule);

// simulators
GRIDSIEM_ERROR(UnknownNode);
GRIDSIEM_ERROR(LoopDetected);
GRIDSIEM_ERROR(InsufficientDisjointness);
GRIDSIEM_ERROR(PathInvalid);
GRIDSIEM_ERROR(NotLocked);

// reaction
GRIDSIEM_ERROR(NoStrategy);
GRIDSIEM_ERROR(MissingCulprit);
GRIDSIEM_ERROR(ActionFailed);

// cli_runner
GRIDSIEM_ERROR(ConfigInvalid);

#undef GRIDSIEM_ERROR

// Raised when a persisted event log cannot be read back. Carries the 1-based
// line number of the first bad line.
class LogCorrupt : public Error {
 public:
  LogCorrupt(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace gridsiem
