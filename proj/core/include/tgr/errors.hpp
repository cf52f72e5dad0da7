#pragma once

#include <stdexcept>
#include <string>

namespace tgr {

/// Pipeline stages in execution order. Used for trace records, for the
/// error_stage field of results files, and for failure attribution.
enum class Stage {
  TemporalParser,
  EventLocalizer,
  Interval,
  TargetDetector,
  Tracker,
  Propagation,
  TargetDescriber,
  PhraseGrounder,
  Final,
};

const char* stage_name(Stage s);
Stage stage_from_name(const std::string& name);

/// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input data: degenerate boxes, invalid scripts, bad configs.
struct ValidationError : Error {
  using Error::Error;
};

/// A lookup (oracle query, corpus id) that matched nothing.
struct NotFoundError : Error {
  using Error::Error;
};

/// A lookup that matched more than one candidate where one was required.
struct AmbiguityError : Error {
  using Error::Error;
};

/// A failure inside one pipeline stage. The stage is recorded in the trace
/// so failures stay attributable.
struct StageError : Error {
  StageError(Stage stage, const std::string& what) : Error(what), stage(stage) {}
  Stage stage;
};

}  // namespace tgr
