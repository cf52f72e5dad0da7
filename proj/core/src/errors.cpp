#include "tgr/errors.hpp"

namespace tgr {

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::TemporalParser: return "temporal-parser";
    case Stage::EventLocalizer: return "event-localizer";
    case Stage::Interval: return "interval";
    case Stage::TargetDetector: return "target-detector";
    case Stage::Tracker: return "tracker";
    case Stage::Propagation: return "propagation";
    case Stage::TargetDescriber: return "target-describer";
    case Stage::PhraseGrounder: return "phrase-grounder";
    case Stage::Final: return "final";
  }
  return "unknown";
}

Stage stage_from_name(const std::string& name) {
  for (Stage s : {Stage::TemporalParser, Stage::EventLocalizer, Stage::Interval,
                  Stage::TargetDetector, Stage::Tracker, Stage::Propagation,
                  Stage::TargetDescriber, Stage::PhraseGrounder, Stage::Final}) {
    if (name == stage_name(s)) return s;
  }
  throw ValidationError("unknown stage name: " + name);
}

}  // namespace tgr
