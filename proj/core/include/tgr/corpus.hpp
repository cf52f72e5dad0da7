#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "tgr/instructions.hpp"
#include "tgr/world.hpp"

namespace tgr {

/// One value per corpus split axis.
struct BifurcationTags {
  enum class Hops { Single, Multi };
  enum class Spatial { Simple, Complex };
  enum class Interactions { Single, Multi };
  enum class Observability { Full, Partial };

  Hops hops = Hops::Single;
  Spatial spatial = Spatial::Simple;
  Interactions interactions = Interactions::Single;
  Observability observability = Observability::Full;

  bool operator==(const BifurcationTags&) const = default;
};

struct GroundTruth {
  ParsedInstruction parsed;
  int event_time_s = 0;
  std::string target_id;
  BoundingBox final_box;  // for contained targets: outermost visible container's box
  std::vector<std::string> visibility_chain;
};

/// One video-instruction pair: a scripted world plus the instruction, its
/// ground truth, and the bifurcation tags.
struct Episode {
  std::string id;
  WorldScript script;
  std::string instruction;
  GroundTruth ground_truth;
  BifurcationTags tags;
};

/// Absolute per-axis counts of the "second" tag value (multi/complex/
/// multi/partial). The defaults are the corpus ratios 56:99, 98:57, 62:93,
/// 119:36 at count 155.
struct AxisCounts {
  int multi_hop = 99;
  int complex_spatial = 57;
  int multi_interaction = 93;
  int partial_observability = 36;
};

struct CorpusConfig {
  int count = 155;
  AxisCounts axes{};
  int fps = 30;
  double frame_width = 640.0;
  double frame_height = 480.0;

  /// Proportionally rescale the default 155-episode axis counts.
  static CorpusConfig scaled(int count);
  /// Every axis split 50:50 (rounded down).
  static CorpusConfig uniform(int count);
};

struct Corpus {
  CorpusConfig config;
  uint64_t seed = 0;
  std::vector<Episode> episodes;

  const Episode* find(const std::string& id) const;
};

/// Deterministic corpus generation: identical (config, seed) yields a
/// byte-identical corpus file. Throws ValidationError on infeasible configs.
Corpus generate_corpus(const CorpusConfig& config, uint64_t seed);

struct TagMarginals {
  int single_hop = 0, multi_hop = 0;
  int simple = 0, complex_spatial = 0;
  int single_interaction = 0, multi_interaction = 0;
  int full = 0, partial = 0;
};
TagMarginals tag_marginals(const Corpus& corpus);

nlohmann::json corpus_to_json(const Corpus& corpus);
Corpus corpus_from_json(const nlohmann::json& j);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const BifurcationTags& t);
void from_json(const nlohmann::json& j, BifurcationTags& t);
void to_json(nlohmann::json& j, const GroundTruth& g);
void from_json(const nlohmann::json& j, GroundTruth& g);
void to_json(nlohmann::json& j, const Episode& e);
void from_json(const nlohmann::json& j, Episode& e);

}  // namespace tgr
