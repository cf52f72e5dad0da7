#pragma once

#include "tgr/pipeline.hpp"

namespace tgr {

/// Rounds of description refinement the refined baseline may spend.
struct RefineBudget {
  int max_rounds = 3;
};

/// Direct grounding: describe the intended object over the whole episode,
/// ground the description on the final frame, take the first box on ties.
/// Never invokes the tracker or the occlusion loop.
GroundingTrace run_dtvg(const FrameSource& frames, const std::string& instruction,
                        const BackendSet& backends, uint64_t seed);

/// Like run_dtvg, but while the description grounds to more than one box and
/// rounds remain, the description is refined and re-grounded.
GroundingTrace run_rtvg(const FrameSource& frames, const std::string& instruction,
                        const BackendSet& backends, RefineBudget budget, uint64_t seed);

}  // namespace tgr
