#pragma once

#include <memory>

#include "tgr/backends.hpp"

namespace tgr {

struct OracleOptions {
  /// How many trailing attributes describe_target withholds. 0 emits the
  /// full description; large values degrade it to the bare class name.
  int describe_ambiguity = 0;
};

/// Backends answering from simulator ground truth. Used to isolate pipeline
/// logic from model quality; agree with the world oracles exactly.
BackendSet make_oracle_backends(std::shared_ptr<const World> world, OracleOptions options = {});

class OracleTemporalParser : public TemporalParser {
 public:
  ParsedInstruction parse(const std::string& instruction) override;
};

class OracleEventLocalizer : public EventLocalizer {
 public:
  explicit OracleEventLocalizer(std::shared_ptr<const World> world) : world_(std::move(world)) {}
  Timestamp localize(const FrameSource& frames, const std::string& temporal_question) override;

 private:
  std::shared_ptr<const World> world_;
};

class OracleTargetDetector : public TargetDetectorModel {
 public:
  OracleTargetDetector(std::shared_ptr<const World> world, OracleOptions options)
      : world_(std::move(world)), options_(options) {}

  std::string identify_class(const FrameSource& frames, const std::vector<int>& sample,
                             const std::string& object_question) override;
  int select_option(const FrameSource& frames, const std::vector<int>& sample,
                    const std::string& object_question,
                    const std::vector<GroundedOption>& options) override;
  std::string describe_target(const FrameSource& frames,
                              const std::string& object_question) override;
  std::string refine_description(const FrameSource& frames, const std::string& object_question,
                                 const std::string& previous) override;

 private:
  /// Object the question refers to at this point of the run: the queried
  /// target, or the current occluder for a re-prompt. Throws StageError
  /// (TargetDetector) when the referenced interaction is not visible within
  /// the sampled frames.
  std::string intended_object(const FrameSource& frames, const std::vector<int>& sample,
                              const std::string& object_question);

  std::shared_ptr<const World> world_;
  OracleOptions options_;
};

class OraclePhraseGrounder : public PhraseGrounder {
 public:
  explicit OraclePhraseGrounder(std::shared_ptr<const World> world) : world_(std::move(world)) {}
  std::vector<BoundingBox> ground(const FrameSource& frames, int frame,
                                  const std::string& phrase) override;

 private:
  std::shared_ptr<const World> world_;
};

class OracleTracker : public Tracker {
 public:
  explicit OracleTracker(std::shared_ptr<const World> world) : world_(std::move(world)) {}
  TrackOutcome track(const FrameSource& frames, FrameRange range, const BoundingBox& init) override;

 private:
  std::shared_ptr<const World> world_;
};

}  // namespace tgr
