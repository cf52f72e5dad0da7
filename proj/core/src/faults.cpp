#include "tgr/faults.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "tgr/errors.hpp"
#include "tgr/rng.hpp"

namespace tgr {
namespace {

// Per-query randomness: the stream depends only on (profile seed, run seed,
// fingerprint), never on the rate, so the set of firing queries grows
// monotonically with the rate.
class FaultDraw {
 public:
  FaultDraw(uint64_t base, const std::string& fingerprint)
      : rng_(hash_mix(base, fnv1a64(fingerprint))), trigger_(rng_.uniform_double()) {}

  bool fires(double rate) const { return trigger_ < rate; }
  Rng& rng() { return rng_; }

 private:
  Rng rng_;
  double trigger_;
};

std::string box_fingerprint(const BoundingBox& b) {
  return nlohmann::json(b).dump();
}

class FaultyParser : public TemporalParser {
 public:
  FaultyParser(std::shared_ptr<TemporalParser> inner, FaultProfile::Parser cfg, uint64_t base)
      : inner_(std::move(inner)), cfg_(cfg), base_(base) {}

  ParsedInstruction parse(const std::string& instruction) override {
    ParsedInstruction p = inner_->parse(instruction);
    FaultDraw draw(base_, "parser|" + instruction);
    if (draw.fires(cfg_.scramble_rate)) std::swap(p.temporal_question, p.object_question);
    return p;
  }

 private:
  std::shared_ptr<TemporalParser> inner_;
  FaultProfile::Parser cfg_;
  uint64_t base_;
};

class FaultyLocalizer : public EventLocalizer {
 public:
  FaultyLocalizer(std::shared_ptr<EventLocalizer> inner, FaultProfile::Localizer cfg, uint64_t base)
      : inner_(std::move(inner)), cfg_(cfg), base_(base) {}

  Timestamp localize(const FrameSource& frames, const std::string& tq) override {
    Timestamp k = inner_->localize(frames, tq);
    FaultDraw draw(base_, "localizer|" + frames.episode_id() + "|" + tq);
    if (draw.fires(cfg_.rate) && cfg_.max_offset_s > 0) {
      int offset = draw.rng().uniform_int(1, cfg_.max_offset_s);
      if (draw.rng().chance(0.5)) offset = -offset;
      k.seconds = std::clamp(k.seconds + offset, 0, frames.meta().duration_s);
    }
    return k;
  }

 private:
  std::shared_ptr<EventLocalizer> inner_;
  FaultProfile::Localizer cfg_;
  uint64_t base_;
};

class FaultyDetector : public TargetDetectorModel {
 public:
  FaultyDetector(std::shared_ptr<TargetDetectorModel> inner, std::shared_ptr<const World> world,
                 FaultProfile::Detector cfg, uint64_t base)
      : inner_(std::move(inner)), world_(std::move(world)), cfg_(cfg), base_(base) {}

  std::string identify_class(const FrameSource& frames, const std::vector<int>& sample,
                             const std::string& oq) override {
    std::string cls = inner_->identify_class(frames, sample, oq);
    FaultDraw draw(base_, "detector.class|" + frames.episode_id() + "|" + oq + "|" +
                              std::to_string(sample.empty() ? -1 : sample.back()));
    if (draw.fires(cfg_.wrong_class_rate) && !sample.empty()) {
      std::set<std::string> visible;
      for (const auto& entry : frames.frame(sample.back()).entries) {
        if (entry.visibility != Visibility::Visible) continue;
        const WorldObject* obj = world_->object(entry.id);
        if (obj && obj->class_name != cls) visible.insert(obj->class_name);
      }
      if (!visible.empty()) {
        std::vector<std::string> pool(visible.begin(), visible.end());
        cls = pool[static_cast<size_t>(draw.rng().uniform_int(0, static_cast<int>(pool.size()) - 1))];
      }
    }
    return cls;
  }

  int select_option(const FrameSource& frames, const std::vector<int>& sample,
                    const std::string& oq, const std::vector<GroundedOption>& options) override {
    int label = inner_->select_option(frames, sample, oq, options);
    FaultDraw draw(base_, "detector.option|" + frames.episode_id() + "|" + oq + "|" +
                              std::to_string(options.size()) + "|" +
                              std::to_string(sample.empty() ? -1 : sample.back()));
    if (draw.fires(cfg_.wrong_option_rate) && options.size() > 1) {
      // Uniform over the non-chosen labels.
      int wrong = draw.rng().uniform_int(1, static_cast<int>(options.size()) - 1);
      label = wrong < label ? wrong : wrong + 1;
    }
    return label;
  }

  std::string describe_target(const FrameSource& frames, const std::string& oq) override {
    return inner_->describe_target(frames, oq);
  }
  std::string refine_description(const FrameSource& frames, const std::string& oq,
                                 const std::string& previous) override {
    return inner_->refine_description(frames, oq, previous);
  }

 private:
  std::shared_ptr<TargetDetectorModel> inner_;
  std::shared_ptr<const World> world_;
  FaultProfile::Detector cfg_;
  uint64_t base_;
};

class FaultyGrounder : public PhraseGrounder {
 public:
  FaultyGrounder(std::shared_ptr<PhraseGrounder> inner, FaultProfile::Grounder cfg, uint64_t base)
      : inner_(std::move(inner)), cfg_(cfg), base_(base) {}

  std::vector<BoundingBox> ground(const FrameSource& frames, int frame,
                                  const std::string& phrase) override {
    FaultDraw draw(base_, "grounder|" + frames.episode_id() + "|" + std::to_string(frame) + "|" +
                              phrase);
    if (draw.fires(cfg_.miss_rate)) return {};
    std::vector<BoundingBox> boxes = inner_->ground(frames, frame, phrase);
    if (cfg_.jitter_px > 0.0) {
      const EpisodeMeta meta = frames.meta();
      for (auto& b : boxes) {
        const double dx = (draw.rng().uniform_double() * 2.0 - 1.0) * cfg_.jitter_px;
        const double dy = (draw.rng().uniform_double() * 2.0 - 1.0) * cfg_.jitter_px;
        b = translated(b, dx, dy);
        b = translated(b, std::max(0.0, -b.x_min) - std::max(0.0, b.x_max - meta.frame_width),
                       std::max(0.0, -b.y_min) - std::max(0.0, b.y_max - meta.frame_height));
      }
    }
    return boxes;
  }

 private:
  std::shared_ptr<PhraseGrounder> inner_;
  FaultProfile::Grounder cfg_;
  uint64_t base_;
};

class FaultyTracker : public Tracker {
 public:
  FaultyTracker(std::shared_ptr<Tracker> inner, std::shared_ptr<const World> world,
                FaultProfile::Tracker cfg, uint64_t base)
      : inner_(std::move(inner)), world_(std::move(world)), cfg_(cfg), base_(base) {}

  TrackOutcome track(const FrameSource& frames, FrameRange range, const BoundingBox& init) override {
    FaultDraw draw(base_, "tracker|" + frames.episode_id() + "|" + std::to_string(range.start) +
                              "|" + box_fingerprint(init));
    if (!draw.fires(cfg_.identity_swap_rate)) return inner_->track(frames, range, init);

    // Rebind to the nearest same-class object, as when two objects appear
    // identical; with no twin the bind stays correct.
    const SceneSnapshot snap = frames.frame(range.start);
    const SnapshotEntry* bound = nullptr;
    double best = 0.0;
    for (const auto& entry : snap.entries) {
      if (entry.visibility != Visibility::Visible) continue;
      const double score = iou(init, entry.box);
      if (score > best) {
        best = score;
        bound = &entry;
      }
    }
    if (!bound || best < 0.5) return inner_->track(frames, range, init);
    const std::string cls = world_->object(bound->id)->class_name;
    const SnapshotEntry* twin = nullptr;
    double twin_dist = 0.0;
    for (const auto& entry : snap.entries) {
      if (entry.visibility != Visibility::Visible || entry.id == bound->id) continue;
      if (world_->object(entry.id)->class_name != cls) continue;
      const double dx = entry.box.center_x() - bound->box.center_x();
      const double dy = entry.box.center_y() - bound->box.center_y();
      const double dist = dx * dx + dy * dy;
      if (!twin || dist < twin_dist) {
        twin = &entry;
        twin_dist = dist;
      }
    }
    if (!twin) return inner_->track(frames, range, init);
    return inner_->track(frames, range, twin->box);
  }

 private:
  std::shared_ptr<Tracker> inner_;
  std::shared_ptr<const World> world_;
  FaultProfile::Tracker cfg_;
  uint64_t base_;
};

}  // namespace

void FaultProfile::validate() const {
  for (double r : {parser.scramble_rate, localizer.rate, detector.wrong_class_rate,
                   detector.wrong_option_rate, grounder.miss_rate, tracker.identity_swap_rate}) {
    if (r < 0.0 || r > 1.0) throw ValidationError("fault rate outside [0,1]");
  }
  if (grounder.jitter_px < 0.0) throw ValidationError("jitter_px must be >= 0");
  if (localizer.max_offset_s < 0) throw ValidationError("max_offset_s must be >= 0");
}

FaultProfile FaultProfile::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read fault profile: " + path.string());
  nlohmann::json j;
  in >> j;
  FaultProfile p = j.get<FaultProfile>();
  p.validate();
  return p;
}

void to_json(nlohmann::json& j, const FaultProfile& p) {
  j = nlohmann::json{
      {"parser", {{"scramble_rate", p.parser.scramble_rate}}},
      {"localizer", {{"rate", p.localizer.rate}, {"max_offset_s", p.localizer.max_offset_s}}},
      {"detector",
       {{"wrong_class_rate", p.detector.wrong_class_rate},
        {"wrong_option_rate", p.detector.wrong_option_rate}}},
      {"grounder", {{"miss_rate", p.grounder.miss_rate}, {"jitter_px", p.grounder.jitter_px}}},
      {"tracker", {{"identity_swap_rate", p.tracker.identity_swap_rate}}},
      {"seed", p.seed}};
}

void from_json(const nlohmann::json& j, FaultProfile& p) {
  p = FaultProfile{};
  if (j.contains("parser")) {
    p.parser.scramble_rate = j["parser"].value("scramble_rate", 0.0);
  }
  if (j.contains("localizer")) {
    p.localizer.rate = j["localizer"].value("rate", 0.0);
    p.localizer.max_offset_s = j["localizer"].value("max_offset_s", 5);
  }
  if (j.contains("detector")) {
    p.detector.wrong_class_rate = j["detector"].value("wrong_class_rate", 0.0);
    p.detector.wrong_option_rate = j["detector"].value("wrong_option_rate", 0.0);
  }
  if (j.contains("grounder")) {
    p.grounder.miss_rate = j["grounder"].value("miss_rate", 0.0);
    p.grounder.jitter_px = j["grounder"].value("jitter_px", 0.0);
  }
  if (j.contains("tracker")) {
    p.tracker.identity_swap_rate = j["tracker"].value("identity_swap_rate", 0.0);
  }
  p.seed = j.value("seed", static_cast<uint64_t>(0));
}

BackendSet make_faulty_backends(std::shared_ptr<const World> world, const FaultProfile& profile,
                                uint64_t run_seed, OracleOptions oracle_options) {
  profile.validate();
  const uint64_t base = hash_mix(profile.seed, run_seed);
  BackendSet oracle = make_oracle_backends(world, oracle_options);
  BackendSet set;
  set.parser = std::make_shared<FaultyParser>(oracle.parser, profile.parser, base);
  set.localizer = std::make_shared<FaultyLocalizer>(oracle.localizer, profile.localizer, base);
  set.detector = std::make_shared<FaultyDetector>(oracle.detector, world, profile.detector, base);
  set.grounder = std::make_shared<FaultyGrounder>(oracle.grounder, profile.grounder, base);
  set.tracker = std::make_shared<FaultyTracker>(oracle.tracker, world, profile.tracker, base);
  return set;
}

}  // namespace tgr
