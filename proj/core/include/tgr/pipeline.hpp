#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tgr/backends.hpp"
#include "tgr/errors.hpp"

namespace tgr {

/// Frames uniformly sub-sampled from a source range. The last element is the
/// frame grounding happens on.
struct SubsampleSet {
  std::vector<int> frames;
  FrameRange source_range;
  int n = 0;
};

/// Frame interval [ (k-1)*fps, (k+1)*fps ) clamped to the episode. The
/// unclamped length is exactly 2*fps.
FrameRange construct_interval(const EpisodeMeta& meta, Timestamp k);

/// Indices start + floor(j*L/n) for j = 0..n-1, with n reduced to L when the
/// range is shorter than n. Deterministic and order-preserving.
SubsampleSet subsample(FrameRange range, int n);

struct StageRecord {
  std::string stage;
  std::string input_digest;
  nlohmann::json output;  // null when the stage failed
  std::optional<std::string> error;
  double duration_ms = 0.0;
};

/// Full structured record of one pipeline run. Stages appear in execution
/// order; at most one carries an error, and it terminates the trace.
struct GroundingTrace {
  std::string episode_id;
  std::string pipeline;  // "g2tr" | "dtvg" | "rtvg"
  uint64_t seed = 0;
  std::vector<StageRecord> stages;
  int iterations = 0;  // re-detection iterations N
  std::optional<BoundingBox> final_box;
  std::optional<std::string> error_stage;

  const StageRecord* first(const std::string& stage) const;
  std::vector<const StageRecord*> all(const std::string& stage) const;
};

struct PipelineOptions {
  int n = 15;      // frames sub-sampled per interval
  int n_max = 8;   // re-detection iteration cap
  uint64_t seed = 0;
};

struct Detection {
  BoundingBox box;
  int frame = 0;  // frame the box was grounded on
  std::string class_phrase;
  int label = 0;
  int option_count = 0;
  bool widened = false;
};

/// Three-step target detection: class identification, phrase grounding on
/// the last sub-sampled frame, visually-prompted option selection. An empty
/// candidate set triggers exactly one retry with the interval widened by one
/// second on each side.
Detection detect_target(const FrameSource& frames, const SubsampleSet& sample,
                        const std::string& object_question, const BackendSet& backends,
                        int n_subsample);

TrackOutcome track_to_present(const FrameSource& frames, int from_frame, const BoundingBox& box,
                              const BackendSet& backends);

/// Runs the full pipeline: parse, localize, interval, detect, then the
/// track/re-detect loop until tracking completes at the last frame.
GroundingTrace run_g2tr(const FrameSource& frames, const std::string& instruction,
                        const BackendSet& backends, const PipelineOptions& options);

std::string render_option_description(int label, const std::string& class_phrase,
                                      const BoundingBox& box);
std::vector<GroundedOption> make_options(const std::string& class_phrase,
                                         const std::vector<BoundingBox>& boxes);

void to_json(nlohmann::json& j, const StageRecord& r);
void from_json(const nlohmann::json& j, StageRecord& r);
/// Results-file record: episode_id, pipeline, final_box, error_stage,
/// iterations, stage_durations_ms, seed, stages.
void to_json(nlohmann::json& j, const GroundingTrace& t);
void from_json(const nlohmann::json& j, GroundingTrace& t);

}  // namespace tgr
