#include "tgr/pipeline.hpp"

#include <algorithm>
#include <chrono>

#include "tgr/instructions.hpp"
#include "trace_builder.hpp"

namespace tgr {

using detail::TraceBuilder;
using detail::digest;

FrameRange construct_interval(const EpisodeMeta& meta, Timestamp k) {
  if (k.seconds < 0 || k.seconds > meta.duration_s) {
    throw StageError(Stage::Interval, "instant outside the episode duration");
  }
  const int total = meta.total_frames();
  FrameRange r;
  r.start = std::max(0, (k.seconds - 1) * meta.fps);
  r.end = std::min(total, (k.seconds + 1) * meta.fps);
  return r;
}

SubsampleSet subsample(FrameRange range, int n) {
  if (range.length() < 1) throw StageError(Stage::Interval, "empty frame range");
  if (n < 1) throw StageError(Stage::Interval, "sub-sample count must be >= 1");
  const int length = range.length();
  const int count = std::min(n, length);
  SubsampleSet out;
  out.source_range = range;
  out.n = count;
  out.frames.reserve(static_cast<size_t>(count));
  for (int j = 0; j < count; ++j) {
    out.frames.push_back(range.start +
                         static_cast<int>(static_cast<int64_t>(j) * length / count));
  }
  return out;
}

std::string render_option_description(int label, const std::string& class_phrase,
                                      const BoundingBox& box) {
  const nlohmann::json coords{box.x_min, box.y_min, box.x_max, box.y_max};
  return "Object " + std::to_string(label) + ": " + class_phrase + " at " + coords.dump();
}

std::vector<GroundedOption> make_options(const std::string& class_phrase,
                                         const std::vector<BoundingBox>& boxes) {
  std::vector<GroundedOption> options;
  options.reserve(boxes.size());
  for (size_t i = 0; i < boxes.size(); ++i) {
    GroundedOption opt;
    opt.label = static_cast<int>(i) + 1;
    opt.box = boxes[i];
    opt.description = render_option_description(opt.label, class_phrase, boxes[i]);
    options.push_back(std::move(opt));
  }
  return options;
}

Detection detect_target(const FrameSource& frames, const SubsampleSet& sample,
                        const std::string& object_question, const BackendSet& backends,
                        int n_subsample) {
  Detection det;
  det.class_phrase = backends.detector->identify_class(frames, sample.frames, object_question);

  const EpisodeMeta meta = frames.meta();
  SubsampleSet current = sample;
  std::vector<BoundingBox> boxes =
      backends.grounder->ground(frames, current.frames.back(), det.class_phrase);
  if (boxes.empty()) {
    // One retry with the interval widened by a second on each side.
    FrameRange wide;
    wide.start = std::max(0, sample.source_range.start - meta.fps);
    wide.end = std::min(meta.total_frames(), sample.source_range.end + meta.fps);
    current = subsample(wide, n_subsample);
    det.widened = true;
    boxes = backends.grounder->ground(frames, current.frames.back(), det.class_phrase);
    if (boxes.empty()) {
      throw StageError(Stage::TargetDetector, "phrase \"" + det.class_phrase +
                                                  "\" grounded no candidates after widen retry");
    }
  }

  const auto options = make_options(det.class_phrase, boxes);
  const int label =
      backends.detector->select_option(frames, current.frames, object_question, options);
  if (label < 1 || label > static_cast<int>(options.size())) {
    throw StageError(Stage::TargetDetector,
                     "selected label " + std::to_string(label) + " names no option");
  }
  det.box = options[static_cast<size_t>(label - 1)].box;
  det.frame = current.frames.back();
  det.label = label;
  det.option_count = static_cast<int>(options.size());
  return det;
}

TrackOutcome track_to_present(const FrameSource& frames, int from_frame, const BoundingBox& box,
                              const BackendSet& backends) {
  FrameRange range{from_frame, frames.frame_count()};
  return backends.tracker->track(frames, range, box);
}

GroundingTrace run_g2tr(const FrameSource& frames, const std::string& instruction,
                        const BackendSet& backends, const PipelineOptions& options) {
  TraceBuilder builder(frames.episode_id(), "g2tr", options.seed);
  try {
    const ParsedInstruction parsed =
        builder.stage(Stage::TemporalParser, digest(instruction), [&](StageRecord& rec) {
          ParsedInstruction p = backends.parser->parse(instruction);
          rec.output = p;
          return p;
        });

    const Timestamp k = builder.stage(
        Stage::EventLocalizer, digest(parsed.temporal_question), [&](StageRecord& rec) {
          Timestamp t = backends.localizer->localize(frames, parsed.temporal_question);
          rec.output = nlohmann::json{{"k", t.seconds}};
          return t;
        });

    const EpisodeMeta meta = frames.meta();
    const SubsampleSet sample = builder.stage(
        Stage::Interval, digest(std::to_string(k.seconds)), [&](StageRecord& rec) {
          FrameRange range = construct_interval(meta, k);
          SubsampleSet s = subsample(range, options.n);
          rec.output = nlohmann::json{
              {"start", range.start}, {"end", range.end}, {"subsample", s.frames}};
          return s;
        });

    Detection det = builder.stage(
        Stage::TargetDetector, digest(parsed.object_question), [&](StageRecord& rec) {
          Detection d = detect_target(frames, sample, parsed.object_question, backends, options.n);
          rec.output = nlohmann::json{{"box", d.box},          {"frame", d.frame},
                                      {"class", d.class_phrase}, {"label", d.label},
                                      {"options", d.option_count}, {"widened", d.widened}};
          return d;
        });

    // Grounding propagation: track to the present; on loss, re-detect the
    // occluding object around the loss instant and continue with it.
    int iterations = 0;
    BoundingBox final_box;
    while (true) {
      const TrackOutcome outcome = builder.stage(
          Stage::Tracker, digest(frames.episode_id() + ":" + std::to_string(det.frame)),
          [&](StageRecord& rec) {
            TrackOutcome o = track_to_present(frames, det.frame, det.box, backends);
            rec.output = nlohmann::json{{"from", det.frame},
                                        {"status", o.completed ? "completed" : "lost"},
                                        {"box", o.last_box}};
            if (!o.completed) rec.output["lost_at"] = o.lost_at;
            return o;
          });
      if (outcome.completed) {
        final_box = outcome.last_box;
        break;
      }
      ++iterations;
      builder.trace().iterations = iterations;
      if (iterations > options.n_max) {
        builder.stage(Stage::Propagation, digest(std::to_string(iterations)),
                      [&](StageRecord&) -> int {
                        throw StageError(Stage::Propagation,
                                         "re-detection iterations exceeded n_max = " +
                                             std::to_string(options.n_max));
                      });
      }
      const int lost_second = outcome.lost_at / meta.fps;
      const std::string reprompt =
          render_occlusion_reprompt(lost_second, parsed.object_question);
      det = builder.stage(Stage::TargetDetector, digest(reprompt), [&](StageRecord& rec) {
        FrameRange range = construct_interval(meta, Timestamp{lost_second});
        SubsampleSet s = subsample(range, options.n);
        Detection d = detect_target(frames, s, reprompt, backends, options.n);
        rec.output = nlohmann::json{{"box", d.box},          {"frame", d.frame},
                                    {"class", d.class_phrase}, {"label", d.label},
                                    {"options", d.option_count}, {"widened", d.widened},
                                    {"lost_second", lost_second}};
        return d;
      });
    }

    builder.trace().iterations = iterations;
    builder.stage(Stage::Final, digest(frames.episode_id()), [&](StageRecord& rec) {
      rec.output = nlohmann::json{{"box", final_box}, {"iterations", iterations}};
      return 0;
    });
    builder.trace().final_box = final_box;
  } catch (const StageError&) {
    // Recorded by the builder; the trace ends at the failing stage.
  }
  return builder.trace();
}

const StageRecord* GroundingTrace::first(const std::string& stage) const {
  for (const auto& rec : stages) {
    if (rec.stage == stage) return &rec;
  }
  return nullptr;
}

std::vector<const StageRecord*> GroundingTrace::all(const std::string& stage) const {
  std::vector<const StageRecord*> out;
  for (const auto& rec : stages) {
    if (rec.stage == stage) out.push_back(&rec);
  }
  return out;
}

void to_json(nlohmann::json& j, const StageRecord& r) {
  j = nlohmann::json{{"stage", r.stage},
                     {"input_digest", r.input_digest},
                     {"output", r.output},
                     {"error", r.error ? nlohmann::json(*r.error) : nlohmann::json()},
                     {"duration_ms", r.duration_ms}};
}
void from_json(const nlohmann::json& j, StageRecord& r) {
  j.at("stage").get_to(r.stage);
  j.at("input_digest").get_to(r.input_digest);
  r.output = j.at("output");
  r.error.reset();
  if (!j.at("error").is_null()) r.error = j.at("error").get<std::string>();
  j.at("duration_ms").get_to(r.duration_ms);
}

void to_json(nlohmann::json& j, const GroundingTrace& t) {
  nlohmann::json durations = nlohmann::json::object();
  for (const auto& rec : t.stages) {
    durations[rec.stage] = durations.contains(rec.stage)
                               ? durations[rec.stage].get<double>() + rec.duration_ms
                               : rec.duration_ms;
  }
  j = nlohmann::json{
      {"episode_id", t.episode_id},
      {"pipeline", t.pipeline},
      {"final_box", t.final_box ? nlohmann::json(*t.final_box) : nlohmann::json()},
      {"error_stage", t.error_stage ? nlohmann::json(*t.error_stage) : nlohmann::json()},
      {"iterations", t.iterations},
      {"stage_durations_ms", std::move(durations)},
      {"seed", t.seed},
      {"stages", t.stages}};
}
void from_json(const nlohmann::json& j, GroundingTrace& t) {
  j.at("episode_id").get_to(t.episode_id);
  j.at("pipeline").get_to(t.pipeline);
  t.final_box.reset();
  if (!j.at("final_box").is_null()) t.final_box = j.at("final_box").get<BoundingBox>();
  t.error_stage.reset();
  if (!j.at("error_stage").is_null()) t.error_stage = j.at("error_stage").get<std::string>();
  j.at("iterations").get_to(t.iterations);
  j.at("seed").get_to(t.seed);
  j.at("stages").get_to(t.stages);
}

}  // namespace tgr
