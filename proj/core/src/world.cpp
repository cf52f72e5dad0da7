#include "tgr/world.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <nlohmann/json.hpp>

#include "tgr/errors.hpp"

namespace tgr {

const char* verb_name(Verb v) {
  switch (v) {
    case Verb::Pick: return "pick";
    case Verb::Place: return "place";
    case Verb::Pour: return "pour";
    case Verb::Wipe: return "wipe";
    case Verb::Stack: return "stack";
    case Verb::Swap: return "swap";
    case Verb::Reposition: return "reposition";
    case Verb::Drop: return "drop";
    case Verb::Cover: return "cover";
    case Verb::Remove: return "remove";
  }
  return "unknown";
}

Verb verb_from_name(const std::string& name) {
  for (Verb v : {Verb::Pick, Verb::Place, Verb::Pour, Verb::Wipe, Verb::Stack, Verb::Swap,
                 Verb::Reposition, Verb::Drop, Verb::Cover, Verb::Remove}) {
    if (name == verb_name(v)) return v;
  }
  throw ValidationError("unknown verb: " + name);
}

Timestamp event_midpoint(const InteractionEvent& e) {
  return Timestamp{(e.start_s.seconds + e.end_s.seconds) / 2};
}

const SnapshotEntry* SceneSnapshot::find(const std::string& id) const {
  for (const auto& e : entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

namespace {

bool in_bounds(const BoundingBox& b, const EpisodeMeta& m) {
  return b.x_min >= 0 && b.y_min >= 0 && b.x_max <= m.frame_width && b.y_max <= m.frame_height;
}

std::string event_label(const InteractionEvent& e, size_t index) {
  return "event #" + std::to_string(index) + " (" + verb_name(e.verb) + " " + e.patient + ")";
}

}  // namespace

int World::object_index(const std::string& id) const {
  for (size_t i = 0; i < script_.objects.size(); ++i) {
    if (script_.objects[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

const WorldObject* World::object(const std::string& id) const {
  int i = object_index(id);
  return i < 0 ? nullptr : &script_.objects[static_cast<size_t>(i)];
}

const World::Timeline& World::timeline(const std::string& id) const {
  int i = object_index(id);
  if (i < 0) throw NotFoundError("unknown object id: " + id);
  return timelines_[static_cast<size_t>(i)];
}

World World::compile(WorldScript script) {
  const EpisodeMeta& meta = script.meta;
  if (meta.fps < 1 || meta.duration_s < 1 || meta.frame_width <= 0 || meta.frame_height <= 0) {
    throw ValidationError("script meta invalid (fps/duration/frame size)");
  }
  if (script.objects.empty()) throw ValidationError("script has no objects");

  std::set<std::string> ids;
  for (const auto& o : script.objects) {
    if (o.id.empty() || o.class_name.empty()) {
      throw ValidationError("object with empty id or class_name");
    }
    if (!ids.insert(o.id).second) throw ValidationError("duplicate object id: " + o.id);
    if (!o.initial_box.valid() || !in_bounds(o.initial_box, meta)) {
      throw ValidationError("object " + o.id + " has an invalid or out-of-bounds initial box");
    }
  }

  World w;
  w.script_ = std::move(script);
  const auto& objs = w.script_.objects;
  w.timelines_.resize(objs.size());
  for (size_t i = 0; i < objs.size(); ++i) {
    w.timelines_[i].keys.push_back({0, objs[i].initial_box});
  }

  // Validate events and collect per-object motion spans for overlap checks.
  std::vector<std::vector<std::pair<int, int>>> motion_spans(objs.size());
  std::vector<size_t> order(w.script_.events.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return w.script_.events[a].start_s.seconds < w.script_.events[b].start_s.seconds;
  });

  for (size_t idx : order) {
    const InteractionEvent& e = w.script_.events[idx];
    const std::string label = event_label(e, idx);
    if (e.start_s.seconds < 0 || e.start_s >= e.end_s || e.end_s.seconds > meta.duration_s) {
      throw ValidationError(label + ": span outside episode or empty");
    }
    if (!ids.count(e.patient)) throw ValidationError(label + ": unknown patient");
    if (e.instrument) {
      if (!ids.count(*e.instrument)) throw ValidationError(label + ": unknown instrument");
      if (*e.instrument == e.patient) throw ValidationError(label + ": patient equals instrument");
    }
    if (e.verb == Verb::Cover && !e.instrument) {
      throw ValidationError(label + ": cover requires an instrument");
    }
    if (!e.motion.instrument.empty() && !e.instrument) {
      throw ValidationError(label + ": instrument motion without instrument");
    }

    const int start_f = e.start_s.seconds * meta.fps;
    const int end_f = e.end_s.seconds * meta.fps;

    auto apply_motion = [&](const std::string& id, const std::vector<MotionKey>& keys) {
      if (keys.empty()) return;
      double prev_frac = 0.0;
      for (const auto& k : keys) {
        if (k.frac <= prev_frac || k.frac > 1.0) {
          throw ValidationError(label + ": motion fracs must be strictly increasing in (0,1]");
        }
        if (!k.box.valid() || !in_bounds(k.box, meta)) {
          throw ValidationError(label + ": motion keyframe out of bounds");
        }
        prev_frac = k.frac;
      }
      const int oi = w.object_index(id);
      auto& spans = motion_spans[static_cast<size_t>(oi)];
      for (auto [s, f] : spans) {
        if (start_f < f && s < end_f) {
          throw ValidationError(label + ": overlapping motion on object " + id);
        }
      }
      spans.push_back({start_f, end_f});

      auto& tl = w.timelines_[static_cast<size_t>(oi)];
      if (tl.keys.back().first >= start_f && tl.keys.back().first != 0) {
        throw ValidationError(label + ": motion begins before a previous motion ended for " + id);
      }
      BoundingBox cur = tl.keys.back().second;
      if (tl.keys.back().first != start_f) tl.keys.push_back({start_f, cur});
      for (const auto& k : keys) {
        int kf = start_f + static_cast<int>(std::lround(k.frac * (end_f - start_f)));
        if (kf <= tl.keys.back().first) kf = tl.keys.back().first + 1;
        tl.keys.push_back({kf, k.box});
      }
    };
    apply_motion(e.patient, e.motion.patient);
    if (e.instrument) apply_motion(*e.instrument, e.motion.instrument);

    // State flips take effect when the event completes.
    if (e.verb == Verb::Cover) {
      const int pi = w.object_index(e.patient);
      auto& tl = w.timelines_[static_cast<size_t>(pi)];
      // Reject containment cycles: walk the new container's chain at end_f.
      std::string walk = *e.instrument;
      for (size_t guard = 0; guard <= objs.size(); ++guard) {
        if (walk == e.patient) throw ValidationError(label + ": containment cycle");
        const auto& wt = w.timeline(walk);
        const std::string* next = nullptr;
        for (const auto& [from, c] : wt.containers) {
          if (from <= end_f) next = &c;
        }
        if (!next) break;
        walk = *next;
      }
      tl.containers.push_back({end_f, *e.instrument});
    } else if (e.verb == Verb::Remove) {
      const int pi = w.object_index(e.patient);
      for (size_t oi = 0; oi < objs.size(); ++oi) {
        const auto& ct = w.timelines_[oi].containers;
        for (const auto& [from, c] : ct) {
          if (from <= end_f && c == e.patient) {
            throw ValidationError(label + ": removing an object that contains " + objs[oi].id);
          }
        }
      }
      w.timelines_[static_cast<size_t>(pi)].absent_from = end_f;
    }
  }
  return w;
}

BoundingBox World::box_from_keys(const Timeline& tl, int frame) const {
  const auto& keys = tl.keys;
  size_t hi = keys.size();
  size_t lo = 0;
  // last key with key.frame <= frame
  while (lo + 1 < hi) {
    size_t mid = (lo + hi) / 2;
    if (keys[mid].first <= frame) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (lo + 1 >= keys.size() || keys[lo].first == frame) return keys[lo].second;
  const auto& [f0, b0] = keys[lo];
  const auto& [f1, b1] = keys[lo + 1];
  if (frame <= f0) return b0;
  const double t = static_cast<double>(frame - f0) / static_cast<double>(f1 - f0);
  return lerp(b0, b1, t);
}

BoundingBox World::own_box(const std::string& id, int frame) const {
  return box_from_keys(timeline(id), frame);
}

SceneSnapshot World::snapshot_at(int frame) const {
  if (frame < 0 || frame >= frame_count()) {
    throw ValidationError("snapshot_at: frame " + std::to_string(frame) + " out of range");
  }
  SceneSnapshot snap;
  snap.frame = frame;
  snap.entries.reserve(script_.objects.size());
  for (size_t i = 0; i < script_.objects.size(); ++i) {
    const auto& tl = timelines_[i];
    SnapshotEntry e;
    e.id = script_.objects[i].id;
    e.box = box_from_keys(tl, frame);
    if (tl.absent_from && frame >= *tl.absent_from) {
      e.visibility = Visibility::Absent;
    } else {
      for (const auto& [from, c] : tl.containers) {
        if (from <= frame) {
          e.visibility = Visibility::Contained;
          e.contained_in = c;
        }
      }
    }
    snap.entries.push_back(std::move(e));
  }
  return snap;
}

VisibilityState World::location_of(const std::string& id, int frame) const {
  const auto& tl = timeline(id);
  if (frame < 0 || frame >= frame_count()) {
    throw ValidationError("location_of: frame out of range");
  }
  if (tl.absent_from && frame >= *tl.absent_from) return {Visibility::Absent, "", std::nullopt};
  const std::string* container = nullptr;
  for (const auto& [from, c] : tl.containers) {
    if (from <= frame) container = &c;
  }
  if (!container) return {Visibility::Visible, "", box_from_keys(tl, frame)};
  return {Visibility::Contained, *container, effective_box(*container, frame)};
}

std::optional<BoundingBox> World::effective_box(const std::string& id, int frame) const {
  std::string cur = id;
  for (size_t guard = 0; guard <= script_.objects.size(); ++guard) {
    const auto& tl = timeline(cur);
    if (tl.absent_from && frame >= *tl.absent_from) return std::nullopt;
    const std::string* container = nullptr;
    for (const auto& [from, c] : tl.containers) {
      if (from <= frame) container = &c;
    }
    if (!container) return box_from_keys(tl, frame);
    cur = *container;
  }
  throw ValidationError("effective_box: containment chain does not terminate");
}

std::vector<std::string> World::visibility_chain(const std::string& id, int frame) const {
  std::vector<std::string> chain{id};
  std::string cur = id;
  for (size_t guard = 0; guard <= script_.objects.size(); ++guard) {
    const auto& tl = timeline(cur);
    const std::string* container = nullptr;
    for (const auto& [from, c] : tl.containers) {
      if (from <= frame) container = &c;
    }
    if (!container) return chain;
    chain.push_back(*container);
    cur = *container;
  }
  throw ValidationError("visibility_chain: containment chain does not terminate");
}

std::vector<std::string> World::visible_ids(int frame) const {
  std::vector<std::string> out;
  for (const auto& e : snapshot_at(frame).entries) {
    if (e.visibility == Visibility::Visible) out.push_back(e.id);
  }
  return out;
}

std::optional<std::pair<std::string, std::string>> World::containment_transition_at(int frame) const {
  for (size_t i = 0; i < script_.objects.size(); ++i) {
    for (const auto& [from, c] : timelines_[i].containers) {
      if (from == frame) return std::make_pair(script_.objects[i].id, c);
    }
  }
  return std::nullopt;
}

namespace {

bool attrs_superset(const std::vector<std::string>& have, const std::vector<std::string>& want) {
  for (const auto& w : want) {
    if (std::find(have.begin(), have.end(), w) == have.end()) return false;
  }
  return true;
}

}  // namespace

World::Match World::resolve_query(const EventQuery& q) const {
  if (q.kind == EventQuery::Kind::PresentScene) {
    throw ValidationError("resolve_query: present-scene queries have no event");
  }

  // Events in time order (stable on script order).
  std::vector<const InteractionEvent*> ordered;
  for (const auto& e : script_.events) ordered.push_back(&e);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const InteractionEvent* a, const InteractionEvent* b) {
                     return a->start_s.seconds < b->start_s.seconds;
                   });

  std::vector<Match> found;
  if (q.kind == EventQuery::Kind::ByVerb) {
    for (const auto* e : ordered) {
      if (e->verb != q.verb) continue;
      if (!q.instrument_class.empty()) {
        if (!e->instrument) continue;
        const WorldObject* inst = object(*e->instrument);
        if (!inst || inst->class_name != q.instrument_class) continue;
      }
      if (!q.patient_class.empty()) {
        const WorldObject* pat = object(e->patient);
        if (!pat || pat->class_name != q.patient_class) continue;
      }
      if (q.role == EventQuery::Role::Instrument) {
        if (!e->instrument) continue;
        found.push_back({e, *e->instrument});
      } else {
        found.push_back({e, e->patient});
      }
    }
  } else {  // ChainToAnchor
    const WorldObject* anchor = nullptr;
    for (const auto& o : script_.objects) {
      if (o.class_name == q.anchor_class) {
        if (anchor) throw AmbiguityError("chain query: several objects of class " + q.anchor_class);
        anchor = &o;
      }
    }
    if (!anchor) throw NotFoundError("chain query: no object of class " + q.anchor_class);
    for (const auto* e : ordered) {
      const int end_f = e->end_s.seconds * meta().fps;
      auto consider = [&](const std::string& id, const std::vector<MotionKey>& keys) {
        if (keys.empty() || id == anchor->id) return;
        const BoundingBox post = own_box(id, end_f);
        if (iou(post, anchor->initial_box) >= 0.5) found.push_back({e, id});
      };
      consider(e->patient, e->motion.patient);
      if (e->instrument) consider(*e->instrument, e->motion.instrument);
    }
  }

  if (found.empty()) throw NotFoundError("no interaction matches the query");
  switch (q.qualifier) {
    case EventQuery::Qualifier::First:
      return found.front();
    case EventQuery::Qualifier::Last:
      return found.back();
    case EventQuery::Qualifier::Second:
      if (found.size() < 2) throw NotFoundError("query asks for the second match but fewer exist");
      return found[1];
    case EventQuery::Qualifier::None: {
      for (const auto& m : found) {
        if (m.object_id != found.front().object_id || m.event != found.front().event) {
          throw AmbiguityError("query matches several interactions; add a qualifier");
        }
      }
      return found.front();
    }
  }
  throw ValidationError("unreachable qualifier");
}

Timestamp World::oracle_event_time(const EventQuery& q) const {
  return event_midpoint(*resolve_query(q).event);
}

std::string World::oracle_target(const EventQuery& q) const {
  return resolve_query(q).object_id;
}

// --- JSON ---

void to_json(nlohmann::json& j, const WorldObject& o) {
  j = nlohmann::json{{"id", o.id},
                     {"class_name", o.class_name},
                     {"attributes", o.attributes},
                     {"initial_box", o.initial_box}};
}
void from_json(const nlohmann::json& j, WorldObject& o) {
  j.at("id").get_to(o.id);
  j.at("class_name").get_to(o.class_name);
  j.at("attributes").get_to(o.attributes);
  j.at("initial_box").get_to(o.initial_box);
}

void to_json(nlohmann::json& j, const MotionKey& k) {
  j = nlohmann::json{{"frac", k.frac}, {"box", k.box}};
}
void from_json(const nlohmann::json& j, MotionKey& k) {
  j.at("frac").get_to(k.frac);
  j.at("box").get_to(k.box);
}

void to_json(nlohmann::json& j, const MotionSpec& m) {
  j = nlohmann::json{{"patient", m.patient}, {"instrument", m.instrument}};
}
void from_json(const nlohmann::json& j, MotionSpec& m) {
  j.at("patient").get_to(m.patient);
  j.at("instrument").get_to(m.instrument);
}

void to_json(nlohmann::json& j, const InteractionEvent& e) {
  j = nlohmann::json{{"verb", verb_name(e.verb)},
                     {"actor_role", e.actor_role},
                     {"patient", e.patient},
                     {"instrument", e.instrument ? nlohmann::json(*e.instrument) : nlohmann::json()},
                     {"start_s", e.start_s.seconds},
                     {"end_s", e.end_s.seconds},
                     {"motion", e.motion}};
}
void from_json(const nlohmann::json& j, InteractionEvent& e) {
  e.verb = verb_from_name(j.at("verb").get<std::string>());
  j.at("actor_role").get_to(e.actor_role);
  j.at("patient").get_to(e.patient);
  if (j.contains("instrument") && !j.at("instrument").is_null()) {
    e.instrument = j.at("instrument").get<std::string>();
  } else {
    e.instrument.reset();
  }
  e.start_s.seconds = j.at("start_s").get<int>();
  e.end_s.seconds = j.at("end_s").get<int>();
  j.at("motion").get_to(e.motion);
}

void to_json(nlohmann::json& j, const WorldScript& s) {
  j = nlohmann::json{{"meta", s.meta}, {"objects", s.objects}, {"events", s.events}, {"seed", s.seed}};
}
void from_json(const nlohmann::json& j, WorldScript& s) {
  j.at("meta").get_to(s.meta);
  j.at("objects").get_to(s.objects);
  j.at("events").get_to(s.events);
  j.at("seed").get_to(s.seed);
}

void to_json(nlohmann::json& j, const SnapshotEntry& e) {
  nlohmann::json vis;
  switch (e.visibility) {
    case Visibility::Visible: vis = "visible"; break;
    case Visibility::Absent: vis = "absent"; break;
    case Visibility::Contained: vis = nlohmann::json{{"contained_in", e.contained_in}}; break;
  }
  j = nlohmann::json{{"id", e.id}, {"box", e.box}, {"visibility", vis}};
}
void from_json(const nlohmann::json& j, SnapshotEntry& e) {
  j.at("id").get_to(e.id);
  j.at("box").get_to(e.box);
  const auto& vis = j.at("visibility");
  if (vis.is_string()) {
    e.visibility = vis.get<std::string>() == "visible" ? Visibility::Visible : Visibility::Absent;
    e.contained_in.clear();
  } else {
    e.visibility = Visibility::Contained;
    vis.at("contained_in").get_to(e.contained_in);
  }
}

void to_json(nlohmann::json& j, const SceneSnapshot& s) {
  j = nlohmann::json{{"frame", s.frame}, {"entries", s.entries}};
  if (s.raster) j["raster"] = *s.raster;
}
void from_json(const nlohmann::json& j, SceneSnapshot& s) {
  j.at("frame").get_to(s.frame);
  j.at("entries").get_to(s.entries);
  if (j.contains("raster") && !j.at("raster").is_null()) s.raster = j.at("raster").get<std::string>();
}

void to_json(nlohmann::json& j, const VisibilityState& v) {
  switch (v.kind) {
    case Visibility::Visible:
      j = nlohmann::json{{"state", "visible"}, {"box", v.box ? nlohmann::json(*v.box) : nlohmann::json()}};
      break;
    case Visibility::Contained:
      j = nlohmann::json{{"state", "contained_in"},
                         {"container", v.container},
                         {"box", v.box ? nlohmann::json(*v.box) : nlohmann::json()}};
      break;
    case Visibility::Absent:
      j = nlohmann::json{{"state", "absent"}};
      break;
  }
}
void from_json(const nlohmann::json& j, VisibilityState& v) {
  const std::string state = j.at("state").get<std::string>();
  if (state == "visible") {
    v.kind = Visibility::Visible;
  } else if (state == "contained_in") {
    v.kind = Visibility::Contained;
    j.at("container").get_to(v.container);
  } else {
    v.kind = Visibility::Absent;
  }
  v.box.reset();
  if (j.contains("box") && !j.at("box").is_null()) v.box = j.at("box").get<BoundingBox>();
}

}  // namespace tgr
