#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tgr/geometry.hpp"
#include "tgr/timebase.hpp"

namespace tgr {

enum class Verb { Pick, Place, Pour, Wipe, Stack, Swap, Reposition, Drop, Cover, Remove };

const char* verb_name(Verb v);
Verb verb_from_name(const std::string& name);

struct WorldObject {
  std::string id;
  std::string class_name;
  std::vector<std::string> attributes;
  BoundingBox initial_box;
};

/// One keyframe of a scripted motion: position of the object when the
/// owning event has progressed by `frac` of its span (frac in (0,1]).
struct MotionKey {
  double frac = 1.0;
  BoundingBox box;
};

/// Piecewise-linear motion attached to one event. An empty keyframe list
/// means the participant does not move during the event.
struct MotionSpec {
  std::vector<MotionKey> patient;
  std::vector<MotionKey> instrument;
};

struct InteractionEvent {
  Verb verb = Verb::Place;
  std::string actor_role = "human";
  std::string patient;
  std::optional<std::string> instrument;
  Timestamp start_s;
  Timestamp end_s;
  MotionSpec motion;
};

struct WorldScript {
  EpisodeMeta meta;
  std::vector<WorldObject> objects;
  std::vector<InteractionEvent> events;
  uint64_t seed = 0;
};

enum class Visibility { Visible, Contained, Absent };

struct SnapshotEntry {
  std::string id;
  /// Scripted own box (frozen while contained or absent).
  BoundingBox box;
  Visibility visibility = Visibility::Visible;
  /// Direct container id when visibility == Contained.
  std::string contained_in;
};

struct SceneSnapshot {
  int frame = 0;
  std::vector<SnapshotEntry> entries;  // script object order
  std::optional<std::string> raster;   // path to rendered image, raster mode only

  const SnapshotEntry* find(const std::string& id) const;
};

/// Where an object is at some frame, chain-resolved one level: contained
/// objects report their innermost container and that container's box.
struct VisibilityState {
  Visibility kind = Visibility::Visible;
  std::string container;
  std::optional<BoundingBox> box;
};

/// Structured form of a temporal/object question, as the oracle backends
/// understand it. Produced by inverting the instruction template grammar.
struct EventQuery {
  enum class Kind { ByVerb, ChainToAnchor, PresentScene };
  enum class Role { Patient, Instrument };
  enum class Qualifier { None, First, Second, Last };

  Kind kind = Kind::ByVerb;
  Verb verb = Verb::Place;
  Role role = Role::Patient;
  Qualifier qualifier = Qualifier::None;
  std::string instrument_class;  // "" = no filter
  std::string patient_class;     // "" = no filter
  std::string anchor_class;      // ChainToAnchor only
  std::string object_class;      // PresentScene only
  std::vector<std::string> object_attributes;  // PresentScene only
};

/// Immutable compiled world. Answers snapshot and oracle queries; every
/// query is deterministic and safe to call concurrently.
class World {
 public:
  /// Validates and compiles a script. Throws ValidationError naming the
  /// offending event on overlapping motions, dangling ids, out-of-bounds
  /// keyframes, or containment cycles.
  static World compile(WorldScript script);

  const WorldScript& script() const { return script_; }
  const EpisodeMeta& meta() const { return script_.meta; }
  int frame_count() const { return script_.meta.total_frames(); }

  SceneSnapshot snapshot_at(int frame) const;

  /// Scripted own box (keyframe interpolation), ignoring containment.
  BoundingBox own_box(const std::string& id, int frame) const;

  VisibilityState location_of(const std::string& id, int frame) const;

  /// Box a grounding system should output for this object: its own box when
  /// visible, the outermost visible container's box when contained, nullopt
  /// when absent (or inside something absent).
  std::optional<BoundingBox> effective_box(const std::string& id, int frame) const;

  /// [id, container, container-of-container, ...] up to the outermost
  /// visible object. A visible object yields just [id].
  std::vector<std::string> visibility_chain(const std::string& id, int frame) const;

  /// The event and participant a query resolves to.
  struct Match {
    const InteractionEvent* event = nullptr;
    std::string object_id;
  };
  /// Throws NotFoundError when nothing matches, AmbiguityError when an
  /// unqualified query matches several distinct objects.
  Match resolve_query(const EventQuery& q) const;

  Timestamp oracle_event_time(const EventQuery& q) const;
  std::string oracle_target(const EventQuery& q) const;
  VisibilityState oracle_location(const std::string& id, int frame) const { return location_of(id, frame); }

  /// The (object, new direct container) pair whose containment begins
  /// exactly at `frame`, if any. Ties broken by script object order.
  std::optional<std::pair<std::string, std::string>> containment_transition_at(int frame) const;

  const WorldObject* object(const std::string& id) const;
  std::vector<std::string> visible_ids(int frame) const;

 private:
  World() = default;

  struct Timeline {
    std::vector<std::pair<int, BoundingBox>> keys;  // (frame, box), sorted
    std::vector<std::pair<int, std::string>> containers;  // (from_frame, container id), sorted
    std::optional<int> absent_from;
  };

  int object_index(const std::string& id) const;  // -1 if unknown
  const Timeline& timeline(const std::string& id) const;
  BoundingBox box_from_keys(const Timeline& tl, int frame) const;

  WorldScript script_;
  std::vector<Timeline> timelines_;  // parallel to script_.objects
};

/// Representative instant of an event: the midpoint second of its span.
Timestamp event_midpoint(const InteractionEvent& e);

void to_json(nlohmann::json& j, const WorldObject& o);
void from_json(const nlohmann::json& j, WorldObject& o);
void to_json(nlohmann::json& j, const MotionKey& k);
void from_json(const nlohmann::json& j, MotionKey& k);
void to_json(nlohmann::json& j, const MotionSpec& m);
void from_json(const nlohmann::json& j, MotionSpec& m);
void to_json(nlohmann::json& j, const InteractionEvent& e);
void from_json(const nlohmann::json& j, InteractionEvent& e);
void to_json(nlohmann::json& j, const WorldScript& s);
void from_json(const nlohmann::json& j, WorldScript& s);
void to_json(nlohmann::json& j, const SnapshotEntry& e);
void from_json(const nlohmann::json& j, SnapshotEntry& e);
void to_json(nlohmann::json& j, const SceneSnapshot& s);
void from_json(const nlohmann::json& j, SceneSnapshot& s);
void to_json(nlohmann::json& j, const VisibilityState& v);
void from_json(const nlohmann::json& j, VisibilityState& v);

}  // namespace tgr
