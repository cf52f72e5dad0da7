#include "tgr/baselines.hpp"

#include "tgr/instructions.hpp"
#include "trace_builder.hpp"

namespace tgr {
namespace {

using detail::digest;
using detail::TraceBuilder;

GroundingTrace run_direct(const FrameSource& frames, const std::string& instruction,
                          const BackendSet& backends, int max_refine_rounds, uint64_t seed,
                          const std::string& name) {
  TraceBuilder builder(frames.episode_id(), name, seed);
  try {
    const ParsedInstruction parsed =
        builder.stage(Stage::TemporalParser, digest(instruction), [&](StageRecord& rec) {
          ParsedInstruction p = backends.parser->parse(instruction);
          rec.output = p;
          return p;
        });

    std::string description = builder.stage(
        Stage::TargetDescriber, digest(parsed.object_question), [&](StageRecord& rec) {
          std::string d = backends.detector->describe_target(frames, parsed.object_question);
          rec.output = nlohmann::json{{"description", d}};
          return d;
        });

    const int last = frames.frame_count() - 1;
    auto ground_once = [&](const std::string& desc) {
      return builder.stage(Stage::PhraseGrounder, digest(desc), [&](StageRecord& rec) {
        std::vector<BoundingBox> boxes = backends.grounder->ground(frames, last, desc);
        rec.output = nlohmann::json{{"frame", last}, {"candidates", boxes.size()}};
        if (boxes.empty()) {
          throw StageError(Stage::PhraseGrounder,
                           "description \"" + desc + "\" grounded no boxes in the final frame");
        }
        return boxes;
      });
    };

    std::vector<BoundingBox> boxes = ground_once(description);
    int rounds = 0;
    while (static_cast<int>(boxes.size()) > 1 && rounds < max_refine_rounds) {
      ++rounds;
      description = builder.stage(
          Stage::TargetDescriber, digest(description + "|refine"), [&](StageRecord& rec) {
            std::string d = backends.detector->refine_description(frames, parsed.object_question,
                                                                  description);
            rec.output = nlohmann::json{{"description", d}, {"round", rounds}};
            return d;
          });
      boxes = ground_once(description);
    }

    const bool ambiguous = boxes.size() > 1;
    builder.trace().iterations = rounds;
    builder.stage(Stage::Final, digest(frames.episode_id()), [&](StageRecord& rec) {
      rec.output = nlohmann::json{{"box", boxes.front()},
                                  {"candidates", boxes.size()},
                                  {"ambiguous_fallback", ambiguous}};
      return 0;
    });
    builder.trace().final_box = boxes.front();
  } catch (const StageError&) {
    // Recorded by the builder.
  }
  return builder.trace();
}

}  // namespace

GroundingTrace run_dtvg(const FrameSource& frames, const std::string& instruction,
                        const BackendSet& backends, uint64_t seed) {
  return run_direct(frames, instruction, backends, 0, seed, "dtvg");
}

GroundingTrace run_rtvg(const FrameSource& frames, const std::string& instruction,
                        const BackendSet& backends, RefineBudget budget, uint64_t seed) {
  if (budget.max_rounds < 1) throw ValidationError("refine budget must be >= 1");
  return run_direct(frames, instruction, backends, budget.max_rounds, seed, "rtvg");
}

}  // namespace tgr
