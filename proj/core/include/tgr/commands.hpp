#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tgr/corpus.hpp"
#include "tgr/eval.hpp"
#include "tgr/faults.hpp"

namespace tgr::cmd {

// Exit codes: 0 success, 1 runtime/config failure, 2 usage error.

struct SimulateOptions {
  std::string out;
  int count = 155;
  uint64_t seed = 1;
  bool uniform_tags = false;
  std::optional<AxisCounts> axes;  // explicit per-axis counts
  int fps = 30;
  bool force = false;
  std::string raster_dir;  // when set, render every frame of every episode
};
int simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err);

struct RunOptions {
  std::string corpus;
  std::string out_dir = ".";
  std::string pipeline = "g2tr";  // g2tr | dtvg | rtvg | all
  std::string backend = "oracle";  // oracle | faulty | remote
  std::string fault_profile;       // path, faulty backend
  std::string endpoint_config;     // path, remote backend
  std::vector<uint64_t> seeds = {1};
  int n = 15;
  int n_max = 8;
  int refine_budget = 3;
  int parallel = 1;
  int ambiguity = 0;  // describe_target ambiguity level of the oracle
};
int run(const RunOptions& options, std::ostream& out, std::ostream& err);

struct EvalOptions {
  std::string corpus;
  std::vector<std::string> results;
  double threshold = 0.7;
  std::string format = "table";
  std::string out;  // empty: stdout
};
int evaluate(const EvalOptions& options, std::ostream& out, std::ostream& err);

struct ReportOptions {
  std::string in;  // eval JSON document
  std::string format = "table";
  std::string out;
};
int report(const ReportOptions& options, std::ostream& out, std::ostream& err);

struct AblateOptions {
  std::string corpus;
  std::string field;  // e.g. "localizer.rate"
  std::vector<double> values;
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string fault_profile;  // optional base profile
  double threshold = 0.7;
  std::string format = "table";
  std::string out;
  int n = 15;
  int n_max = 8;
  int parallel = 1;
};
int ablate(const AblateOptions& options, std::ostream& out, std::ostream& err);

/// Accuracy series produced by one sweep.
struct AblationPoint {
  double value = 0.0;
  double mean_accuracy = 0.0;
  double std_dev = 0.0;
  std::vector<double> per_seed;
};
std::vector<AblationPoint> sweep_fault_field(const Corpus& corpus, const std::string& field,
                                             const std::vector<double>& values,
                                             const std::vector<uint64_t>& seeds,
                                             const FaultProfile& base, double threshold,
                                             const PipelineOptions& popts, int parallel);

}  // namespace tgr::cmd
