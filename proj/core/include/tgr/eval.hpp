#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tgr/corpus.hpp"
#include "tgr/pipeline.hpp"

namespace tgr {

/// Correct iff the result is a box with iou(result, truth) >= threshold.
/// A missing box (any error stage) is incorrect.
bool score_box(const std::optional<BoundingBox>& result, const BoundingBox& truth,
               double threshold);
bool score_episode(const GroundingTrace& trace, const BoundingBox& truth, double threshold);

/// All traces of one (pipeline, seed) execution over a corpus.
struct RunResults {
  std::string pipeline;
  std::string backend;
  uint64_t seed = 0;
  std::string corpus_path;
  std::vector<GroundingTrace> traces;
};

nlohmann::json results_to_json(const RunResults& results);
RunResults results_from_json(const nlohmann::json& j);
void save_results(const RunResults& results, const std::filesystem::path& path);
RunResults load_results(const std::filesystem::path& path);

struct CellStats {
  double mean = 0.0;
  double std_dev = 0.0;
};

/// Report row cells in emission order.
extern const std::vector<std::string> kReportCells;  // overall sh mh ss sc co po si mi

struct PipelineReport {
  std::string pipeline;
  std::map<std::string, CellStats> cells;                 // accuracy % per cell
  std::map<std::string, int> cell_episodes;               // episodes per cell
  std::map<std::string, std::vector<int>> cell_correct;   // per-run correct counts
  std::map<std::string, int> failure_stages;              // attribution counts
  std::map<std::string, CellStats> stage_runtime_ms;
  int runs = 0;
};

struct EvalReport {
  double threshold = 0.7;
  int episodes = 0;
  int runs = 0;
  /// The +- semantics: population standard deviation across seeded runs
  /// (per-run accuracy is a point estimate).
  std::string std_semantics = "population standard deviation over seeded runs";
  std::vector<PipelineReport> pipelines;  // ordered g2tr, dtvg, rtvg
};

/// Scores every trace against the corpus, aggregates accuracy per
/// bifurcation cell (mean +- std over runs) and attributes every failure to
/// a stage. Throws Error when a result references an unknown episode.
EvalReport aggregate(const std::vector<RunResults>& runs, const Corpus& corpus, double threshold);

/// Earliest stage whose output disagrees with the oracle answer for that
/// stage; explicit stage errors attribute to themselves. Precondition: the
/// episode scored incorrect (throws ValidationError otherwise).
std::string attribute_failure(const GroundingTrace& trace, const Episode& episode,
                              const World& world, double threshold);

enum class ReportFormat { Table, Csv, Json };
ReportFormat report_format_from_name(const std::string& name);

/// Byte-deterministic rendering of a report.
std::string emit_report(const EvalReport& report, ReportFormat format);

nlohmann::json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

}  // namespace tgr
