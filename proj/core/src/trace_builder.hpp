#pragma once

#include <chrono>
#include <string>

#include "tgr/errors.hpp"
#include "tgr/pipeline.hpp"
#include "tgr/rng.hpp"

namespace tgr::detail {

inline double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
      .count();
}

inline std::string digest(const std::string& text) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(text)));
  return buf;
}

// Records stages as a run progresses; a StageError terminates the trace.
class TraceBuilder {
 public:
  TraceBuilder(std::string episode_id, std::string pipeline, uint64_t seed) {
    trace_.episode_id = std::move(episode_id);
    trace_.pipeline = std::move(pipeline);
    trace_.seed = seed;
  }

  template <typename Fn>
  auto stage(Stage stage, const std::string& input_digest, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    StageRecord rec;
    rec.stage = stage_name(stage);
    rec.input_digest = input_digest;
    try {
      auto result = fn(rec);
      rec.duration_ms = ms_since(start);
      trace_.stages.push_back(std::move(rec));
      return result;
    } catch (const StageError& e) {
      rec.duration_ms = ms_since(start);
      rec.output = nullptr;
      rec.stage = stage_name(e.stage);
      rec.error = e.what();
      trace_.stages.push_back(std::move(rec));
      trace_.error_stage = stage_name(e.stage);
      throw;
    }
  }

  GroundingTrace& trace() { return trace_; }

 private:
  GroundingTrace trace_;
};

}  // namespace tgr::detail
