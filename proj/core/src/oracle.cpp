#include "tgr/oracle.hpp"

#include <algorithm>

#include "tgr/errors.hpp"

namespace tgr {

std::string FrameSource::frame_ref(int index) const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%06d", index);
  return episode_id() + buf;
}

BackendSet make_oracle_backends(std::shared_ptr<const World> world, OracleOptions options) {
  BackendSet set;
  set.parser = std::make_shared<OracleTemporalParser>();
  set.localizer = std::make_shared<OracleEventLocalizer>(world);
  set.detector = std::make_shared<OracleTargetDetector>(world, options);
  set.grounder = std::make_shared<OraclePhraseGrounder>(world);
  set.tracker = std::make_shared<OracleTracker>(world);
  return set;
}

ParsedInstruction OracleTemporalParser::parse(const std::string& instruction) {
  return render_parsed(parse_instruction(instruction));
}

Timestamp OracleEventLocalizer::localize(const FrameSource& frames,
                                         const std::string& temporal_question) {
  const EventQuery query = parse_temporal_question(temporal_question);
  if (query.kind == EventQuery::Kind::PresentScene) {
    // No past reference: the relevant instant is the present.
    return Timestamp{frames.meta().duration_s};
  }
  try {
    return world_->oracle_event_time(query);
  } catch (const Error& e) {
    throw StageError(Stage::EventLocalizer, e.what());
  }
}

namespace {

// Seconds spanned by a frame sample, inclusive on both ends.
std::pair<int, int> sample_seconds(const FrameSource& frames, const std::vector<int>& sample) {
  if (sample.empty()) throw StageError(Stage::TargetDetector, "empty frame sample");
  const int fps = frames.meta().fps;
  return {sample.front() / fps, sample.back() / fps};
}

std::string find_unique_by_ref(const World& world, const std::string& cls,
                               const std::vector<std::string>& attrs) {
  const WorldObject* found = nullptr;
  for (const auto& o : world.script().objects) {
    if (o.class_name != cls) continue;
    bool ok = true;
    for (const auto& a : attrs) {
      if (std::find(o.attributes.begin(), o.attributes.end(), a) == o.attributes.end()) ok = false;
    }
    if (!ok) continue;
    if (found) throw StageError(Stage::TargetDetector, "several objects match \"" + cls + "\"");
    found = &o;
  }
  if (!found) throw StageError(Stage::TargetDetector, "no object matches \"" + cls + "\"");
  return found->id;
}

}  // namespace

std::string OracleTargetDetector::intended_object(const FrameSource& frames,
                                                  const std::vector<int>& sample,
                                                  const std::string& object_question) {
  if (auto lost_s = occlusion_reprompt_second(object_question)) {
    const int flip_frame = *lost_s * world_->meta().fps;
    auto transition = world_->containment_transition_at(flip_frame);
    if (!transition) {
      throw StageError(Stage::TargetDetector,
                       "no containment transition at second " + std::to_string(*lost_s));
    }
    return transition->second;  // the occluding container
  }

  const EventQuery query = parse_object_question(object_question);
  if (query.kind == EventQuery::Kind::PresentScene) {
    return find_unique_by_ref(*world_, query.object_class, query.object_attributes);
  }
  World::Match match;
  try {
    match = world_->resolve_query(query);
  } catch (const Error& e) {
    throw StageError(Stage::TargetDetector, e.what());
  }
  // The model only sees the sampled frames; an interaction outside their
  // span cannot be reasoned about visually.
  const auto [first_s, last_s] = sample_seconds(frames, sample);
  if (match.event->start_s.seconds > last_s || match.event->end_s.seconds < first_s) {
    throw StageError(Stage::TargetDetector,
                     "referenced interaction is not visible in the provided frames");
  }
  return match.object_id;
}

std::string OracleTargetDetector::identify_class(const FrameSource& frames,
                                                 const std::vector<int>& sample,
                                                 const std::string& object_question) {
  if (!occlusion_reprompt_second(object_question)) {
    const EventQuery query = parse_object_question(object_question);
    // A class stated in the question needs no visual evidence.
    if (query.kind == EventQuery::Kind::PresentScene) return query.object_class;
    if (query.role == EventQuery::Role::Instrument && !query.instrument_class.empty()) {
      return query.instrument_class;
    }
  }
  const std::string id = intended_object(frames, sample, object_question);
  return world_->object(id)->class_name;
}

int OracleTargetDetector::select_option(const FrameSource& frames, const std::vector<int>& sample,
                                        const std::string& object_question,
                                        const std::vector<GroundedOption>& options) {
  if (options.empty()) throw StageError(Stage::TargetDetector, "no options to select from");
  const std::string id = intended_object(frames, sample, object_question);
  const BoundingBox want = world_->own_box(id, sample.back());
  int best_label = options.front().label;
  double best = -1.0;
  for (const auto& opt : options) {
    const double score = iou(opt.box, want);
    if (score > best) {
      best = score;
      best_label = opt.label;
    }
  }
  return best_label;
}

std::string OracleTargetDetector::describe_target(const FrameSource& frames,
                                                  const std::string& object_question) {
  const std::vector<int> full{0, frames.frame_count() - 1};
  const std::string id = intended_object(frames, full, object_question);
  const WorldObject* obj = world_->object(id);
  const int keep = std::max(0, static_cast<int>(obj->attributes.size()) - options_.describe_ambiguity);
  return render_description(obj->class_name, obj->attributes, keep);
}

std::string OracleTargetDetector::refine_description(const FrameSource& frames,
                                                     const std::string& object_question,
                                                     const std::string& previous) {
  const std::vector<int> full{0, frames.frame_count() - 1};
  const std::string id = intended_object(frames, full, object_question);
  const WorldObject* obj = world_->object(id);
  const int have = static_cast<int>(parse_phrase(previous).attributes.size());
  return render_description(obj->class_name, obj->attributes, have + 1);
}

std::vector<BoundingBox> OraclePhraseGrounder::ground(const FrameSource& frames, int frame,
                                                      const std::string& phrase) {
  (void)frames;
  const PhraseQuery q = parse_phrase(phrase);
  std::vector<BoundingBox> out;
  for (const auto& entry : world_->snapshot_at(frame).entries) {
    if (entry.visibility != Visibility::Visible) continue;
    const WorldObject* obj = world_->object(entry.id);
    if (obj->class_name != q.class_name) continue;
    bool ok = true;
    for (const auto& a : q.attributes) {
      if (std::find(obj->attributes.begin(), obj->attributes.end(), a) == obj->attributes.end()) {
        ok = false;
      }
    }
    if (ok) out.push_back(entry.box);
  }
  return out;
}

TrackOutcome OracleTracker::track(const FrameSource& frames, FrameRange range,
                                  const BoundingBox& init) {
  (void)frames;
  if (range.start < 0 || range.end > world_->frame_count() || range.length() < 1) {
    throw StageError(Stage::Tracker, "track range outside the episode");
  }
  // Bind the init box to an object by maximum IoU over visible objects.
  std::string id;
  double best = 0.0;
  for (const auto& entry : world_->snapshot_at(range.start).entries) {
    if (entry.visibility != Visibility::Visible) continue;
    const double score = iou(init, entry.box);
    if (score > best) {
      best = score;
      id = entry.id;
    }
  }
  if (id.empty() || best < 0.5) {
    throw StageError(Stage::Tracker, "init box matches no visible object (max IoU < 0.5)");
  }

  TrackOutcome out;
  for (int f = range.start; f < range.end; ++f) {
    const VisibilityState state = world_->location_of(id, f);
    if (state.kind != Visibility::Visible) {
      out.completed = false;
      out.lost_at = f;
      out.last_box = out.boxes.back();
      return out;
    }
    out.boxes.push_back(*state.box);
  }
  out.completed = true;
  out.last_box = out.boxes.back();
  return out;
}

}  // namespace tgr
