#include "tgr/corpus.hpp"

#include <algorithm>
#include <deque>
#include <fstream>

#include <nlohmann/json.hpp>

#include "tgr/errors.hpp"
#include "tgr/rng.hpp"

namespace tgr {
namespace {

// --- scene layout -----------------------------------------------------------
//
// Objects sit on a 5x3 grid of cell centers. Every object and every motion
// destination takes its own cell, so boxes of distinct objects never overlap
// at rest and IoU-based identity binding is unambiguous.

constexpr double kColX[5] = {64, 192, 320, 448, 576};
constexpr double kRowY[3] = {64, 184, 304};

struct Cell {
  int col = 0, row = 0;
  double cx() const { return kColX[col]; }
  double cy() const { return kRowY[row]; }
};

BoundingBox box_at(double cx, double cy, int size) {
  const double h = size / 2.0;
  return {cx - h, cy - h, cx + h, cy + h};
}

const std::vector<std::string> kClassPool = {
    "cup",    "bottle", "cloth", "plate",  "bowl", "marker", "notebook", "apple",
    "banana", "tray",   "mug",   "sponge", "jar",  "can",    "book"};
const std::vector<std::string> kContainerPool = {"bowl", "tray", "mug"};
const std::vector<std::string> kColors = {"red", "green", "blue", "yellow", "purple", "orange"};
const std::vector<std::string> kSizesAttr = {"small", "large"};
const std::vector<std::string> kActions = {"remove",   "pick up", "hand me",
                                           "point to", "fetch",   "clear away"};

// Referenced-event verb pools.
const std::vector<Verb> kPatientVerbs = {Verb::Reposition, Verb::Place, Verb::Drop, Verb::Pick,
                                         Verb::Stack};
const std::vector<Verb> kInstrumentVerbs = {Verb::Wipe, Verb::Pour};
const std::vector<Verb> kRepeatableVerbs = {Verb::Reposition, Verb::Place, Verb::Drop, Verb::Pick};

using Hops = BifurcationTags::Hops;
using Spatial = BifurcationTags::Spatial;
using Interactions = BifurcationTags::Interactions;
using Observability = BifurcationTags::Observability;

// --- tag table --------------------------------------------------------------

std::vector<BifurcationTags> assign_tags(const CorpusConfig& cfg, Rng& rng) {
  const int n = cfg.count;
  auto bools = [&](int truths) {
    std::vector<char> v(static_cast<size_t>(n), 0);
    std::fill(v.begin(), v.begin() + truths, 1);
    std::vector<char> shuffled = v;
    rng.shuffle(shuffled);
    return shuffled;
  };
  auto mh = bools(cfg.axes.multi_hop);
  auto sc = bools(cfg.axes.complex_spatial);
  auto mi = bools(cfg.axes.multi_interaction);
  auto po = bools(cfg.axes.partial_observability);

  // A partially-observable single-interaction episode is necessarily a
  // cover-referenced single-hop instruction, so multi-hop cannot land there.
  // Repair by swapping the multi-hop flag with a row that can take it.
  for (int r = 0; r < n; ++r) {
    if (!(po[r] && !mi[r] && mh[r])) continue;
    int partner = -1;
    for (int c = 0; c < n; ++c) {
      if (!mh[c] && !(po[c] && !mi[c])) {
        partner = c;
        break;
      }
    }
    if (partner < 0) {
      throw ValidationError(
          "infeasible bifurcation counts: too many multi-hop rows forced onto "
          "partially-observable single-interaction episodes");
    }
    std::swap(mh[r], mh[partner]);
  }

  std::vector<BifurcationTags> tags(static_cast<size_t>(n));
  for (int r = 0; r < n; ++r) {
    auto& t = tags[static_cast<size_t>(r)];
    t.hops = mh[r] ? Hops::Multi : Hops::Single;
    t.spatial = sc[r] ? Spatial::Complex : Spatial::Simple;
    t.interactions = mi[r] ? Interactions::Multi : Interactions::Single;
    t.observability = po[r] ? Observability::Partial : Observability::Full;
  }
  return tags;
}

// --- per-episode script construction ----------------------------------------

struct PlannedEvent {
  InteractionEvent event;  // start/end filled in later
  int length_s = 2;
  bool referenced = false;
};

class EpisodeBuilder {
 public:
  EpisodeBuilder(const CorpusConfig& cfg, uint64_t ep_seed, BifurcationTags tags)
      : cfg_(cfg), rng_(ep_seed), tags_(tags) {
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 5; ++c) free_cells_.push_back({c, r});
    rng_.shuffle(free_cells_);
    classes_ = kClassPool;
    rng_.shuffle(classes_);
  }

  Episode build(const std::string& id);

 private:
  Cell take_cell() {
    if (free_cells_.empty()) throw Error("episode layout ran out of grid cells");
    Cell c = free_cells_.back();
    free_cells_.pop_back();
    return c;
  }

  std::string take_class(const std::vector<std::string>& preferred = {}) {
    if (!preferred.empty()) {
      for (const auto& want : preferred) {
        auto it = std::find(classes_.begin(), classes_.end(), want);
        if (it != classes_.end()) {
          std::string cls = *it;
          classes_.erase(it);
          return cls;
        }
      }
    }
    if (classes_.empty()) throw Error("episode layout ran out of object classes");
    std::string cls = classes_.back();
    classes_.pop_back();
    return cls;
  }

  std::vector<std::string> draw_attrs() {
    return {rng_.pick(kColors), rng_.pick(kSizesAttr)};
  }

  struct Placed {
    std::string id;
    std::string cls;
    int size = 64;
    BoundingBox cur;  // box as of the last planned event
  };

  Placed& add_object(const std::string& cls, std::vector<std::string> attrs, int size) {
    Cell cell = take_cell();
    Placed p;
    p.id = cls + "_" + std::to_string(++object_counter_);
    p.cls = cls;
    p.size = size;
    p.cur = box_at(cell.cx(), cell.cy(), size);
    objects_.push_back({p.id, cls, std::move(attrs), p.cur});
    placed_.push_back(p);
    return placed_.back();
  }

  Placed& placed(const std::string& object_id) {
    for (auto& p : placed_) {
      if (p.id == object_id) return p;
    }
    throw Error("unknown planned object " + object_id);
  }

  int pick_size() { return 56 + 8 * rng_.uniform_int(0, 2); }

  PlannedEvent& push_event(Verb verb, const std::string& patient,
                           std::optional<std::string> instrument, MotionSpec motion,
                           int length_s, bool referenced) {
    PlannedEvent pe;
    pe.event.verb = verb;
    pe.event.patient = patient;
    pe.event.instrument = std::move(instrument);
    pe.event.motion = std::move(motion);
    pe.length_s = length_s;
    pe.referenced = referenced;
    events_.push_back(std::move(pe));
    return events_.back();
  }

  // Motion helpers update the builder's notion of each object's current box.
  MotionSpec move_patient_to(Placed& p, const BoundingBox& dest) {
    MotionSpec m;
    m.patient = {{1.0, dest}};
    p.cur = dest;
    return m;
  }

  MotionSpec hover_instrument_over(Placed& inst, const BoundingBox& spot) {
    MotionSpec m;
    BoundingBox over = box_at(0.5 * (spot.x_min + spot.x_max), 0.5 * (spot.y_min + spot.y_max) - 24,
                              inst.size);
    m.instrument = {{0.5, over}, {1.0, inst.cur}};
    return m;
  }

  MotionSpec oscillate_instrument_over(Placed& inst, const BoundingBox& spot) {
    MotionSpec m;
    const double cx = 0.5 * (spot.x_min + spot.x_max);
    const double cy = 0.5 * (spot.y_min + spot.y_max);
    m.instrument = {{0.25, box_at(cx - 16, cy, inst.size)},
                    {0.5, box_at(cx + 16, cy, inst.size)},
                    {0.75, box_at(cx - 16, cy, inst.size)},
                    {1.0, inst.cur}};
    return m;
  }

  void add_referenced_event();
  void add_repeat_event();
  void add_filler_event();
  void add_cover_chain();
  void add_distractors();
  void schedule_and_finalize();

  const CorpusConfig& cfg_;
  Rng rng_;
  BifurcationTags tags_;

  std::vector<Cell> free_cells_;
  std::vector<std::string> classes_;
  int object_counter_ = 0;

  std::vector<WorldObject> objects_;
  std::deque<Placed> placed_;  // deque: references stay valid while building
  std::vector<PlannedEvent> events_;

  InstructionSpec spec_;
  std::string target_id_;
  WorldScript script_;
};

void EpisodeBuilder::add_referenced_event() {
  const bool multi_hop = tags_.hops == Hops::Multi;
  const bool single_interaction = tags_.interactions == Interactions::Single;
  const bool partial = tags_.observability == Observability::Partial;

  if (multi_hop) {
    // Chained reference: "the object that is now where the <anchor> originally was".
    auto& anchor = add_object(take_class(), draw_attrs(), pick_size());
    auto& target = add_object(take_class(), draw_attrs(), pick_size());
    target_id_ = target.id;
    spec_.schema = InstructionSchema::Chain;
    spec_.anchor_class = anchor.cls;
    const BoundingBox anchor_home = anchor.cur;
    if (single_interaction) {
      // One swap exchanges both objects.
      MotionSpec m;
      m.patient = {{1.0, box_at(target.cur.center_x(), target.cur.center_y(), anchor.size)}};
      m.instrument = {{1.0, box_at(anchor_home.center_x(), anchor_home.center_y(), target.size)}};
      anchor.cur = m.patient.back().box;
      target.cur = m.instrument.back().box;
      push_event(Verb::Swap, anchor.id, target.id, std::move(m), 2, true);
    } else {
      // The anchor is moved away, then the target is placed in its old spot.
      Cell away = take_cell();
      push_event(Verb::Reposition, anchor.id, std::nullopt,
                 move_patient_to(anchor, box_at(away.cx(), away.cy(), anchor.size)), 2, false);
      push_event(Verb::Place, target.id, std::nullopt,
                 move_patient_to(target, box_at(anchor_home.center_x(), anchor_home.center_y(),
                                                target.size)),
                 2, true);
    }
    return;
  }

  if (single_interaction && partial) {
    // The single interaction is the cover itself. A long span keeps the
    // target visible in the detection interval even under small localizer
    // offsets: containment only begins when the event completes.
    auto& target = add_object(take_class(), draw_attrs(), pick_size());
    auto& container = add_object(take_class(kContainerPool), draw_attrs(), target.size + 16);
    target_id_ = target.id;
    spec_.schema = InstructionSchema::PatientRef;
    spec_.verb = Verb::Cover;
    spec_.instrument_class = container.cls;
    MotionSpec m;
    m.instrument = {{1.0, box_at(target.cur.center_x(), target.cur.center_y(), container.size)}};
    container.cur = m.instrument.back().box;
    push_event(Verb::Cover, target.id, container.id, std::move(m), 6, true);
    return;
  }

  const bool instrument_ref = rng_.chance(0.35);
  if (instrument_ref) {
    // "the <class> used for wiping/pouring": the target is the instrument.
    Verb verb = rng_.pick(kInstrumentVerbs);
    auto& patient = add_object(take_class(), draw_attrs(), pick_size());
    auto& target = add_object(take_class(), draw_attrs(), pick_size());
    target_id_ = target.id;
    spec_.schema = InstructionSchema::InstrumentRef;
    spec_.verb = verb;
    spec_.object_class = target.cls;
    MotionSpec m = verb == Verb::Wipe ? oscillate_instrument_over(target, patient.cur)
                                      : hover_instrument_over(target, patient.cur);
    push_event(verb, patient.id, target.id, std::move(m), 2, true);
    return;
  }

  Verb verb = rng_.pick(kPatientVerbs);
  auto& target = add_object(take_class(), draw_attrs(), pick_size());
  target_id_ = target.id;
  spec_.schema = InstructionSchema::PatientRef;
  spec_.verb = verb;
  MotionSpec m;
  switch (verb) {
    case Verb::Reposition:
    case Verb::Place: {
      Cell dest = take_cell();
      m = move_patient_to(target, box_at(dest.cx(), dest.cy(), target.size));
      break;
    }
    case Verb::Pick:
      m = move_patient_to(target, translated(target.cur, 0, -24));
      break;
    case Verb::Drop:
      m.patient = {{0.4, translated(target.cur, 0, -20)}, {1.0, translated(target.cur, 6, 48)}};
      target.cur = m.patient.back().box;
      break;
    case Verb::Stack: {
      auto& base = add_object(take_class(), draw_attrs(), pick_size());
      m = move_patient_to(target,
                          box_at(base.cur.center_x(), base.cur.center_y() - 24, target.size));
      push_event(Verb::Stack, target.id, base.id, std::move(m), 2, true);
      return;
    }
    default:
      throw Error("unexpected referenced verb");
  }
  push_event(verb, target.id, std::nullopt, std::move(m), 2, true);
}

// A second event with the referenced verb on a filler object; the instruction
// then needs an ordinal qualifier to disambiguate.
void EpisodeBuilder::add_repeat_event() {
  auto& filler = add_object(take_class(), draw_attrs(), pick_size());
  Cell dest = take_cell();
  Verb verb = spec_.verb;
  MotionSpec m;
  switch (verb) {
    case Verb::Reposition:
    case Verb::Place:
      m = move_patient_to(filler, box_at(dest.cx(), dest.cy(), filler.size));
      break;
    case Verb::Pick:
      m = move_patient_to(filler, translated(filler.cur, 0, -24));
      break;
    case Verb::Drop:
      m.patient = {{1.0, translated(filler.cur, -6, 48)}};
      filler.cur = m.patient.back().box;
      break;
    default:
      throw Error("repeat event with unsupported verb");
  }
  // Qualifier First: referenced event comes first; Last: it comes last.
  const bool first = rng_.chance(0.5);
  spec_.qualifier = first ? EventQuery::Qualifier::First : EventQuery::Qualifier::Last;
  PlannedEvent pe;
  pe.event.verb = verb;
  pe.event.patient = filler.id;
  pe.event.motion = std::move(m);
  pe.length_s = 2;
  pe.referenced = false;
  auto ref_it = std::find_if(events_.begin(), events_.end(),
                             [](const PlannedEvent& e) { return e.referenced; });
  if (first) {
    events_.insert(ref_it + 1, std::move(pe));
  } else {
    events_.insert(ref_it, std::move(pe));
  }
}

void EpisodeBuilder::add_filler_event() {
  auto& filler = add_object(take_class(), draw_attrs(), pick_size());
  std::vector<Verb> pool;
  for (Verb v : kRepeatableVerbs) {
    if (v != spec_.verb) pool.push_back(v);
  }
  Verb verb = rng_.pick(pool);
  MotionSpec m;
  if (verb == Verb::Reposition || verb == Verb::Place) {
    Cell dest = take_cell();
    m = move_patient_to(filler, box_at(dest.cx(), dest.cy(), filler.size));
  } else if (verb == Verb::Pick) {
    m = move_patient_to(filler, translated(filler.cur, 0, -24));
  } else {
    m.patient = {{1.0, translated(filler.cur, 6, 48)}};
    filler.cur = m.patient.back().box;
  }
  push_event(verb, filler.id, std::nullopt, std::move(m), 2, false);
}

void EpisodeBuilder::add_cover_chain() {
  auto& target = placed(target_id_);
  std::vector<std::string> pool;
  for (const auto& c : kContainerPool) {
    if (c != target.cls) pool.push_back(c);
  }
  auto& c1 = add_object(take_class(pool), draw_attrs(), target.size + 16);
  {
    MotionSpec m;
    m.instrument = {{1.0, box_at(target.cur.center_x(), target.cur.center_y(), c1.size)}};
    c1.cur = m.instrument.back().box;
    push_event(Verb::Cover, target.id, c1.id, std::move(m), 2, false);
  }
  // Occasionally the container is itself covered, mirroring a target that
  // goes out of view twice.
  if (tags_.interactions == Interactions::Multi && events_.size() < 4 && rng_.chance(0.3)) {
    std::vector<std::string> pool2;
    for (const auto& c : kContainerPool) {
      if (c != target.cls && c != c1.cls) pool2.push_back(c);
    }
    auto& c2 = add_object(take_class(pool2), draw_attrs(), c1.size + 8);
    MotionSpec m;
    m.instrument = {{1.0, box_at(c1.cur.center_x(), c1.cur.center_y(), c2.size)}};
    c2.cur = m.instrument.back().box;
    push_event(Verb::Cover, c1.id, c2.id, std::move(m), 2, false);
  }
}

void EpisodeBuilder::add_distractors() {
  if (tags_.spatial != Spatial::Complex) return;
  const std::string target_class = placed(target_id_).cls;
  std::vector<std::string> target_attrs;
  for (const auto& o : objects_) {
    if (o.id == target_id_) target_attrs = o.attributes;
  }
  // One distractor shares the target's leading attribute, so a truncated
  // description stays ambiguous; the second differs in color.
  std::vector<std::string> same_color = target_attrs;
  same_color[1] = same_color[1] == "small" ? "large" : "small";
  add_object(target_class, same_color, pick_size());

  std::vector<std::string> other = draw_attrs();
  while (other[0] == target_attrs[0]) other[0] = rng_.pick(kColors);
  add_object(target_class, other, pick_size());
}

void EpisodeBuilder::schedule_and_finalize() {
  // Covers go last so containment outlives every other interaction; the
  // ordinal repeat (if any) was already positioned around the reference.
  std::stable_sort(events_.begin(), events_.end(), [](const PlannedEvent& a, const PlannedEvent& b) {
    return (a.event.verb != Verb::Cover) > (b.event.verb != Verb::Cover);
  });

  int t = 1 + rng_.uniform_int(0, 2);
  for (auto& pe : events_) {
    pe.event.start_s = Timestamp{t};
    pe.event.end_s = Timestamp{t + pe.length_s};
    t = t + pe.length_s + 2;
  }
  int duration = (t - 2) + 2 + rng_.uniform_int(0, 2);
  duration = std::max(duration, 6);
  if (duration > 28) throw Error("episode schedule exceeds duration budget");

  script_.meta.fps = cfg_.fps;
  script_.meta.duration_s = duration;
  script_.meta.frame_width = cfg_.frame_width;
  script_.meta.frame_height = cfg_.frame_height;
  script_.seed = rng_.next_u64();
  script_.objects = objects_;
  for (auto& pe : events_) script_.events.push_back(pe.event);
}

Episode EpisodeBuilder::build(const std::string& id) {
  spec_.action = rng_.pick(kActions);

  add_referenced_event();
  const bool partial = tags_.observability == Observability::Partial;
  const bool cover_is_reference =
      spec_.schema == InstructionSchema::PatientRef && spec_.verb == Verb::Cover;
  if (partial && !cover_is_reference) add_cover_chain();

  if (tags_.interactions == Interactions::Multi) {
    const bool can_repeat = spec_.schema == InstructionSchema::PatientRef &&
                            std::find(kRepeatableVerbs.begin(), kRepeatableVerbs.end(),
                                      spec_.verb) != kRepeatableVerbs.end();
    while (events_.size() < 2 ||
           (events_.size() < 3 && objects_.size() <= 4 && rng_.chance(0.4))) {
      if (events_.size() >= 4) break;
      if (can_repeat && spec_.qualifier == EventQuery::Qualifier::None && rng_.chance(0.5)) {
        add_repeat_event();
      } else {
        add_filler_event();
      }
    }
  }
  add_distractors();
  while (objects_.size() < 3) add_object(take_class(), draw_attrs(), pick_size());

  schedule_and_finalize();

  Episode ep;
  ep.id = id;
  ep.script = script_;
  ep.tags = tags_;
  ep.instruction = render_instruction(spec_);
  ep.ground_truth.parsed = render_parsed(spec_);

  // Labels come from the compiled world's own oracles so that corpus labels
  // and oracle answers can never drift apart.
  World world = World::compile(script_);
  const EventQuery query = query_from_spec(spec_);
  ep.ground_truth.event_time_s = world.oracle_event_time(query).seconds;
  ep.ground_truth.target_id = world.oracle_target(query);
  const int last = world.frame_count() - 1;
  auto final_box = world.effective_box(ep.ground_truth.target_id, last);
  if (!final_box) throw Error("generated target is absent at the final frame");
  ep.ground_truth.final_box = *final_box;
  ep.ground_truth.visibility_chain = world.visibility_chain(ep.ground_truth.target_id, last);

  if (ep.ground_truth.target_id != target_id_) {
    throw Error("generated query resolves to an unexpected target");
  }
  const bool contained = world.location_of(target_id_, last).kind == Visibility::Contained;
  if (contained != partial) throw Error("observability tag does not match the generated script");
  const bool multi = script_.events.size() >= 2;
  if (multi != (tags_.interactions == Interactions::Multi)) {
    throw Error("interaction tag does not match the generated script");
  }
  return ep;
}

}  // namespace

CorpusConfig CorpusConfig::scaled(int count) {
  CorpusConfig cfg;
  const CorpusConfig base;
  auto scale = [&](int v) {
    return static_cast<int>(std::lround(static_cast<double>(v) * count / base.count));
  };
  cfg.count = count;
  cfg.axes.multi_hop = scale(base.axes.multi_hop);
  cfg.axes.complex_spatial = scale(base.axes.complex_spatial);
  cfg.axes.multi_interaction = scale(base.axes.multi_interaction);
  cfg.axes.partial_observability = scale(base.axes.partial_observability);
  return cfg;
}

CorpusConfig CorpusConfig::uniform(int count) {
  CorpusConfig cfg;
  cfg.count = count;
  cfg.axes = {count / 2, count / 2, count / 2, count / 2};
  return cfg;
}

const Episode* Corpus::find(const std::string& id) const {
  for (const auto& e : episodes) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

Corpus generate_corpus(const CorpusConfig& config, uint64_t seed) {
  if (config.count <= 0) throw ValidationError("corpus count must be positive");
  for (int v : {config.axes.multi_hop, config.axes.complex_spatial, config.axes.multi_interaction,
                config.axes.partial_observability}) {
    if (v < 0 || v > config.count) {
      throw ValidationError("axis count outside [0, count]");
    }
  }
  if (config.fps < 1) throw ValidationError("fps must be >= 1");

  Rng rng(hash_mix(seed, 0x746772636f727075ull));
  Corpus corpus;
  corpus.config = config;
  corpus.seed = seed;
  const auto tags = assign_tags(config, rng);
  corpus.episodes.reserve(static_cast<size_t>(config.count));
  for (int i = 0; i < config.count; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "ep%03d", i);
    EpisodeBuilder builder(config, hash_mix(seed, static_cast<uint64_t>(i) + 1),
                           tags[static_cast<size_t>(i)]);
    corpus.episodes.push_back(builder.build(buf));
  }
  return corpus;
}

TagMarginals tag_marginals(const Corpus& corpus) {
  TagMarginals m;
  for (const auto& e : corpus.episodes) {
    (e.tags.hops == Hops::Multi ? m.multi_hop : m.single_hop)++;
    (e.tags.spatial == Spatial::Complex ? m.complex_spatial : m.simple)++;
    (e.tags.interactions == Interactions::Multi ? m.multi_interaction : m.single_interaction)++;
    (e.tags.observability == Observability::Partial ? m.partial : m.full)++;
  }
  return m;
}

// --- JSON -------------------------------------------------------------------

void to_json(nlohmann::json& j, const BifurcationTags& t) {
  j = nlohmann::json{
      {"hops", t.hops == Hops::Multi ? "multi" : "single"},
      {"spatial", t.spatial == Spatial::Complex ? "complex" : "simple"},
      {"interactions", t.interactions == Interactions::Multi ? "multi" : "single"},
      {"observability", t.observability == Observability::Partial ? "partial" : "full"}};
}
void from_json(const nlohmann::json& j, BifurcationTags& t) {
  t.hops = j.at("hops").get<std::string>() == "multi" ? Hops::Multi : Hops::Single;
  t.spatial = j.at("spatial").get<std::string>() == "complex" ? Spatial::Complex : Spatial::Simple;
  t.interactions = j.at("interactions").get<std::string>() == "multi" ? Interactions::Multi
                                                                      : Interactions::Single;
  t.observability = j.at("observability").get<std::string>() == "partial" ? Observability::Partial
                                                                          : Observability::Full;
}

void to_json(nlohmann::json& j, const GroundTruth& g) {
  j = nlohmann::json{{"parsed", g.parsed},
                     {"event_time_s", g.event_time_s},
                     {"target_id", g.target_id},
                     {"final_box", g.final_box},
                     {"visibility_chain", g.visibility_chain}};
}
void from_json(const nlohmann::json& j, GroundTruth& g) {
  j.at("parsed").get_to(g.parsed);
  j.at("event_time_s").get_to(g.event_time_s);
  j.at("target_id").get_to(g.target_id);
  j.at("final_box").get_to(g.final_box);
  j.at("visibility_chain").get_to(g.visibility_chain);
}

void to_json(nlohmann::json& j, const Episode& e) {
  j = nlohmann::json{{"id", e.id},
                     {"script", e.script},
                     {"instruction", e.instruction},
                     {"ground_truth", e.ground_truth},
                     {"tags", e.tags}};
}
void from_json(const nlohmann::json& j, Episode& e) {
  j.at("id").get_to(e.id);
  j.at("script").get_to(e.script);
  j.at("instruction").get_to(e.instruction);
  j.at("ground_truth").get_to(e.ground_truth);
  j.at("tags").get_to(e.tags);
}

nlohmann::json corpus_to_json(const Corpus& corpus) {
  const TagMarginals m = tag_marginals(corpus);
  nlohmann::json meta{
      {"count", corpus.config.count},
      {"seed", corpus.seed},
      {"fps", corpus.config.fps},
      {"frame_width", corpus.config.frame_width},
      {"frame_height", corpus.config.frame_height},
      {"axis_counts",
       {{"multi_hop", corpus.config.axes.multi_hop},
        {"complex_spatial", corpus.config.axes.complex_spatial},
        {"multi_interaction", corpus.config.axes.multi_interaction},
        {"partial_observability", corpus.config.axes.partial_observability}}},
      {"tag_marginals",
       {{"hops", {{"single", m.single_hop}, {"multi", m.multi_hop}}},
        {"spatial", {{"simple", m.simple}, {"complex", m.complex_spatial}}},
        {"interactions", {{"single", m.single_interaction}, {"multi", m.multi_interaction}}},
        {"observability", {{"full", m.full}, {"partial", m.partial}}}}}};
  return nlohmann::json{{"meta", std::move(meta)}, {"episodes", corpus.episodes}};
}

Corpus corpus_from_json(const nlohmann::json& j) {
  Corpus corpus;
  const auto& meta = j.at("meta");
  corpus.config.count = meta.at("count").get<int>();
  corpus.seed = meta.at("seed").get<uint64_t>();
  corpus.config.fps = meta.at("fps").get<int>();
  corpus.config.frame_width = meta.at("frame_width").get<double>();
  corpus.config.frame_height = meta.at("frame_height").get<double>();
  const auto& axes = meta.at("axis_counts");
  corpus.config.axes.multi_hop = axes.at("multi_hop").get<int>();
  corpus.config.axes.complex_spatial = axes.at("complex_spatial").get<int>();
  corpus.config.axes.multi_interaction = axes.at("multi_interaction").get<int>();
  corpus.config.axes.partial_observability = axes.at("partial_observability").get<int>();
  j.at("episodes").get_to(corpus.episodes);
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write corpus file: " + path.string());
  out << corpus_to_json(corpus).dump(2) << "\n";
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read corpus file: " + path.string());
  nlohmann::json j;
  in >> j;
  return corpus_from_json(j);
}

}  // namespace tgr
