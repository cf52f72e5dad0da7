#include "tgr/timebase.hpp"

#include <nlohmann/json.hpp>

#include "tgr/errors.hpp"

namespace tgr {

FrameIndex second_to_frame(Timestamp t, const EpisodeMeta& meta) {
  if (t.seconds < 0 || t.seconds > meta.duration_s) {
    throw ValidationError("second_to_frame: timestamp " + std::to_string(t.seconds) +
                          " outside episode duration " + std::to_string(meta.duration_s));
  }
  return FrameIndex{t.seconds * meta.fps};
}

void to_json(nlohmann::json& j, const Timestamp& t) { j = nlohmann::json{{"seconds", t.seconds}}; }
void from_json(const nlohmann::json& j, Timestamp& t) { j.at("seconds").get_to(t.seconds); }

void to_json(nlohmann::json& j, const FrameIndex& f) { j = nlohmann::json{{"index", f.value}}; }
void from_json(const nlohmann::json& j, FrameIndex& f) { j.at("index").get_to(f.value); }

void to_json(nlohmann::json& j, const FrameRange& r) {
  j = nlohmann::json{{"start", r.start}, {"end", r.end}};
}
void from_json(const nlohmann::json& j, FrameRange& r) {
  j.at("start").get_to(r.start);
  j.at("end").get_to(r.end);
}

void to_json(nlohmann::json& j, const EpisodeMeta& m) {
  j = nlohmann::json{{"fps", m.fps},
                     {"duration_s", m.duration_s},
                     {"frame_width", m.frame_width},
                     {"frame_height", m.frame_height}};
}
void from_json(const nlohmann::json& j, EpisodeMeta& m) {
  j.at("fps").get_to(m.fps);
  j.at("duration_s").get_to(m.duration_s);
  j.at("frame_width").get_to(m.frame_width);
  j.at("frame_height").get_to(m.frame_height);
}

}  // namespace tgr
