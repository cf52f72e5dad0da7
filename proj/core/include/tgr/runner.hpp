#pragma once

#include <functional>

#include "tgr/baselines.hpp"
#include "tgr/eval.hpp"

namespace tgr {

/// Builds the backend set used for one episode. Oracle and faulty backends
/// bind to the episode's world; remote backends ignore it.
using BackendFactory =
    std::function<BackendSet(const Episode& episode, std::shared_ptr<const World> world)>;

struct RunnerOptions {
  std::string pipeline = "g2tr";  // g2tr | dtvg | rtvg
  std::string backend_name = "oracle";
  PipelineOptions pipeline_options;
  RefineBudget budget;
  int parallelism = 1;  // bounded episode-level parallelism
};

/// Runs one pipeline over every corpus episode. Stage failures are recorded
/// in the traces, never thrown. Results arrive in corpus order regardless of
/// parallelism.
RunResults run_corpus(const Corpus& corpus, const BackendFactory& factory,
                      const RunnerOptions& options, uint64_t seed);

GroundingTrace run_episode(const Episode& episode, const BackendFactory& factory,
                           const RunnerOptions& options, uint64_t seed);

}  // namespace tgr
