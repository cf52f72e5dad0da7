#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>

#include <nlohmann/json_fwd.hpp>

#include "tgr/backends.hpp"
#include "tgr/oracle.hpp"

namespace tgr {

/// Per-role error rates and corruption kinds. All rates live in [0,1];
/// corruption is a pure function of (seed, query), so a given query either
/// always fires at a given rate or never does, and raising a rate only adds
/// failures (ablation sweeps are monotone by construction).
struct FaultProfile {
  struct Parser {
    double scramble_rate = 0.0;  // swap temporal and object questions
  } parser;
  struct Localizer {
    double rate = 0.0;
    int max_offset_s = 5;  // offset drawn uniformly from +-[1, max_offset_s]
  } localizer;
  struct Detector {
    double wrong_class_rate = 0.0;
    double wrong_option_rate = 0.0;
  } detector;
  struct Grounder {
    double miss_rate = 0.0;
    double jitter_px = 0.0;
  } grounder;
  struct Tracker {
    double identity_swap_rate = 0.0;  // start tracking the nearest same-class object
  } tracker;
  uint64_t seed = 0;

  void validate() const;  // throws ValidationError on rates outside [0,1]
  static FaultProfile from_file(const std::filesystem::path& path);
};

void to_json(nlohmann::json& j, const FaultProfile& p);
void from_json(const nlohmann::json& j, FaultProfile& p);

/// Oracle backends wrapped with configured corruption. With all rates zero
/// the set is observationally identical to the oracle set.
BackendSet make_faulty_backends(std::shared_ptr<const World> world, const FaultProfile& profile,
                                uint64_t run_seed, OracleOptions oracle_options = {});

}  // namespace tgr
