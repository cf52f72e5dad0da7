#pragma once

#include <compare>

#include <nlohmann/json_fwd.hpp>

namespace tgr {

/// Whole-second instant within an episode. Event localization works at
/// second granularity throughout.
struct Timestamp {
  int seconds = 0;
  auto operator<=>(const Timestamp&) const = default;
};

struct FrameIndex {
  int value = 0;
  auto operator<=>(const FrameIndex&) const = default;
};

/// Half-open frame interval [start, end).
struct FrameRange {
  int start = 0;
  int end = 0;
  int length() const { return end - start; }
  bool contains(int frame) const { return frame >= start && frame < end; }
  bool operator==(const FrameRange&) const = default;
};

struct EpisodeMeta {
  int fps = 30;
  int duration_s = 0;
  double frame_width = 640.0;
  double frame_height = 480.0;

  int total_frames() const { return fps * duration_s; }
  bool operator==(const EpisodeMeta&) const = default;
};

/// seconds * fps. Throws ValidationError when t lies outside [0, duration].
FrameIndex second_to_frame(Timestamp t, const EpisodeMeta& meta);

void to_json(nlohmann::json& j, const Timestamp& t);
void from_json(const nlohmann::json& j, Timestamp& t);
void to_json(nlohmann::json& j, const FrameIndex& f);
void from_json(const nlohmann::json& j, FrameIndex& f);
void to_json(nlohmann::json& j, const FrameRange& r);
void from_json(const nlohmann::json& j, FrameRange& r);
void to_json(nlohmann::json& j, const EpisodeMeta& m);
void from_json(const nlohmann::json& j, EpisodeMeta& m);

}  // namespace tgr
