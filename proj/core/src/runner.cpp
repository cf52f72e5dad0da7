#include "tgr/runner.hpp"

#include <atomic>
#include <mutex>
#include <thread>

#include "tgr/errors.hpp"

namespace tgr {

GroundingTrace run_episode(const Episode& episode, const BackendFactory& factory,
                           const RunnerOptions& options, uint64_t seed) {
  auto world = std::make_shared<const World>(World::compile(episode.script));
  WorldFrames frames(episode.id, world);
  BackendSet backends = factory(episode, world);
  PipelineOptions popts = options.pipeline_options;
  popts.seed = seed;
  if (options.pipeline == "g2tr") {
    return run_g2tr(frames, episode.instruction, backends, popts);
  }
  if (options.pipeline == "dtvg") {
    return run_dtvg(frames, episode.instruction, backends, seed);
  }
  if (options.pipeline == "rtvg") {
    return run_rtvg(frames, episode.instruction, backends, options.budget, seed);
  }
  throw ValidationError("unknown pipeline: " + options.pipeline);
}

RunResults run_corpus(const Corpus& corpus, const BackendFactory& factory,
                      const RunnerOptions& options, uint64_t seed) {
  RunResults results;
  results.pipeline = options.pipeline;
  results.backend = options.backend_name;
  results.seed = seed;
  results.traces.resize(corpus.episodes.size());

  const int workers = std::max(1, options.parallelism);
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mutex;

  auto work = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= corpus.episodes.size() || failed.load()) return;
      try {
        results.traces[i] = run_episode(corpus.episodes[i], factory, options, seed);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        failed.store(true);
        failure = corpus.episodes[i].id + ": " + e.what();
        return;
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) throw Error("episode run failed: " + failure);
  return results;
}

}  // namespace tgr
