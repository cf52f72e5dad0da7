#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tgr/instructions.hpp"
#include "tgr/world.hpp"

namespace tgr {

/// One enumerated candidate shown to the detector during visual prompting.
/// Labels are consecutive from 1 within one option set.
struct GroundedOption {
  int label = 0;
  BoundingBox box;
  std::string description;
};

/// Result of tracking one object across a frame range. Boxes cover a
/// contiguous prefix of the range starting at range.start.
struct TrackOutcome {
  std::vector<BoundingBox> boxes;
  bool completed = false;
  int lost_at = -1;       // frame where the target left view (when !completed)
  BoundingBox last_box;   // box at range end, or the last visible box
};

/// Abstract frame stream for one episode. Remote backends address frames by
/// ref strings; in-process backends read scene snapshots directly.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual const std::string& episode_id() const = 0;
  virtual EpisodeMeta meta() const = 0;
  virtual int frame_count() const = 0;
  virtual SceneSnapshot frame(int index) const = 0;
  virtual std::string frame_ref(int index) const;
};

/// FrameSource backed by a compiled world.
class WorldFrames : public FrameSource {
 public:
  WorldFrames(std::string episode_id, std::shared_ptr<const World> world)
      : id_(std::move(episode_id)), world_(std::move(world)) {}
  const std::string& episode_id() const override { return id_; }
  EpisodeMeta meta() const override { return world_->meta(); }
  int frame_count() const override { return world_->frame_count(); }
  SceneSnapshot frame(int index) const override { return world_->snapshot_at(index); }
  const World& world() const { return *world_; }

 private:
  std::string id_;
  std::shared_ptr<const World> world_;
};

// --- the five model roles ----------------------------------------------------

class TemporalParser {
 public:
  virtual ~TemporalParser() = default;
  virtual ParsedInstruction parse(const std::string& instruction) = 0;
};

class EventLocalizer {
 public:
  virtual ~EventLocalizer() = default;
  /// Second k in {0..T} at which the referenced interaction occurs.
  virtual Timestamp localize(const FrameSource& frames, const std::string& temporal_question) = 0;
};

/// The vision-language model role: class identification, option selection,
/// and (for the baselines) target descriptions.
class TargetDetectorModel {
 public:
  virtual ~TargetDetectorModel() = default;
  virtual std::string identify_class(const FrameSource& frames, const std::vector<int>& sample,
                                     const std::string& object_question) = 0;
  virtual int select_option(const FrameSource& frames, const std::vector<int>& sample,
                            const std::string& object_question,
                            const std::vector<GroundedOption>& options) = 0;
  virtual std::string describe_target(const FrameSource& frames,
                                      const std::string& object_question) = 0;
  virtual std::string refine_description(const FrameSource& frames,
                                         const std::string& object_question,
                                         const std::string& previous) = 0;
};

class PhraseGrounder {
 public:
  virtual ~PhraseGrounder() = default;
  /// All boxes matching the phrase in one frame; empty is a valid outcome.
  virtual std::vector<BoundingBox> ground(const FrameSource& frames, int frame,
                                          const std::string& phrase) = 0;
};

class Tracker {
 public:
  virtual ~Tracker() = default;
  /// Follows the object best matching `init` at range.start (IoU >= 0.5).
  virtual TrackOutcome track(const FrameSource& frames, FrameRange range,
                             const BoundingBox& init) = 0;
};

struct BackendSet {
  std::shared_ptr<TemporalParser> parser;
  std::shared_ptr<EventLocalizer> localizer;
  std::shared_ptr<TargetDetectorModel> detector;
  std::shared_ptr<PhraseGrounder> grounder;
  std::shared_ptr<Tracker> tracker;
};

}  // namespace tgr
