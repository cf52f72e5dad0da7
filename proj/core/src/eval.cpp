#include "tgr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "tgr/errors.hpp"

namespace tgr {

const std::vector<std::string> kReportCells = {"overall", "sh", "mh", "ss", "sc",
                                               "co",      "po", "si", "mi"};

bool score_box(const std::optional<BoundingBox>& result, const BoundingBox& truth,
               double threshold) {
  if (!truth.valid()) throw ValidationError("score: ground-truth box is degenerate");
  if (!result || !result->valid()) return false;
  return iou(*result, truth) >= threshold;
}

bool score_episode(const GroundingTrace& trace, const BoundingBox& truth, double threshold) {
  if (trace.error_stage) return false;
  return score_box(trace.final_box, truth, threshold);
}

namespace {

bool in_cell(const BifurcationTags& t, const std::string& cell) {
  using H = BifurcationTags::Hops;
  using S = BifurcationTags::Spatial;
  using I = BifurcationTags::Interactions;
  using O = BifurcationTags::Observability;
  if (cell == "overall") return true;
  if (cell == "sh") return t.hops == H::Single;
  if (cell == "mh") return t.hops == H::Multi;
  if (cell == "ss") return t.spatial == S::Simple;
  if (cell == "sc") return t.spatial == S::Complex;
  if (cell == "co") return t.observability == O::Full;
  if (cell == "po") return t.observability == O::Partial;
  if (cell == "si") return t.interactions == I::Single;
  if (cell == "mi") return t.interactions == I::Multi;
  throw ValidationError("unknown report cell: " + cell);
}

CellStats stats_over(const std::vector<double>& xs) {
  CellStats s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  s.std_dev = std::sqrt(var / static_cast<double>(xs.size()));
  return s;
}

std::optional<BoundingBox> json_box(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<BoundingBox>();
}

// Binds a detected box to an object id by max IoU over visible objects.
std::string bind_box(const World& world, const BoundingBox& box, int frame) {
  std::string best_id;
  double best = 0.0;
  for (const auto& entry : world.snapshot_at(frame).entries) {
    if (entry.visibility != Visibility::Visible) continue;
    const double score = iou(box, entry.box);
    if (score > best) {
      best = score;
      best_id = entry.id;
    }
  }
  return best < 0.5 ? std::string() : best_id;
}

std::string attribute_baseline(const GroundingTrace& trace) {
  for (const auto& rec : trace.stages) {
    if (rec.error) return rec.stage;
  }
  const StageRecord* final_rec = trace.first("final");
  if (final_rec && final_rec->output.is_object() &&
      final_rec->output.value("ambiguous_fallback", false)) {
    return stage_name(Stage::TargetDescriber);
  }
  return stage_name(Stage::PhraseGrounder);
}

}  // namespace

std::string attribute_failure(const GroundingTrace& trace, const Episode& episode,
                              const World& world, double threshold) {
  if (score_episode(trace, episode.ground_truth.final_box, threshold)) {
    throw ValidationError("attribute_failure: episode " + episode.id + " scored correct");
  }
  if (trace.pipeline != "g2tr") return attribute_baseline(trace);

  const GroundTruth& gt = episode.ground_truth;
  size_t detect_index = 0;
  for (const auto& rec : trace.stages) {
    if (rec.stage == stage_name(Stage::TemporalParser)) {
      if (rec.error) return rec.stage;
      if (rec.output.get<ParsedInstruction>() != gt.parsed) return rec.stage;
    } else if (rec.stage == stage_name(Stage::EventLocalizer)) {
      if (rec.error) return rec.stage;
      // The +-1 s interval makes any k within one second of truth
      // recoverable downstream, so only larger deviations are this stage's
      // fault.
      if (std::abs(rec.output.at("k").get<int>() - gt.event_time_s) > 1) return rec.stage;
    } else if (rec.stage == stage_name(Stage::TargetDetector)) {
      if (rec.error) return rec.stage;
      const auto box = json_box(rec.output, "box");
      if (!box) return rec.stage;
      const int frame = rec.output.at("frame").get<int>();
      const std::string id = bind_box(world, *box, frame);
      if (detect_index < gt.visibility_chain.size() &&
          id != gt.visibility_chain[detect_index]) {
        return rec.stage;
      }
      ++detect_index;
    } else if (rec.error) {
      return rec.stage;
    }
  }
  // Every intermediate stage agreed; the tracked endpoint is off.
  if (!trace.final_box || !score_box(trace.final_box, gt.final_box, threshold)) {
    return stage_name(Stage::Tracker);
  }
  throw Error("attribute_failure: no disagreeing stage found for " + episode.id);
}

EvalReport aggregate(const std::vector<RunResults>& runs, const Corpus& corpus, double threshold) {
  if (runs.empty()) throw ValidationError("aggregate: no runs");
  EvalReport report;
  report.threshold = threshold;
  report.episodes = static_cast<int>(corpus.episodes.size());

  // Group runs by pipeline, in fixed emission order.
  std::vector<std::string> order;
  for (const char* p : {"g2tr", "dtvg", "rtvg"}) {
    for (const auto& r : runs) {
      if (r.pipeline == p && std::find(order.begin(), order.end(), p) == order.end()) {
        order.push_back(p);
      }
    }
  }
  for (const auto& r : runs) {
    if (std::find(order.begin(), order.end(), r.pipeline) == order.end()) {
      order.push_back(r.pipeline);
    }
  }

  std::map<std::string, std::shared_ptr<World>> worlds;
  auto world_for = [&](const Episode& ep) -> const World& {
    auto it = worlds.find(ep.id);
    if (it == worlds.end()) {
      it = worlds.emplace(ep.id, std::make_shared<World>(World::compile(ep.script))).first;
    }
    return *it->second;
  };

  for (const auto& name : order) {
    PipelineReport pr;
    pr.pipeline = name;
    for (const auto& cell : kReportCells) {
      pr.cell_episodes[cell] = 0;
      pr.cell_correct[cell] = {};
    }
    for (const auto& ep : corpus.episodes) {
      for (const auto& cell : kReportCells) {
        if (in_cell(ep.tags, cell)) pr.cell_episodes[cell]++;
      }
    }

    std::map<std::string, std::vector<double>> cell_acc;
    std::map<std::string, std::vector<double>> stage_durations;
    for (const auto& run : runs) {
      if (run.pipeline != name) continue;
      pr.runs++;
      std::map<std::string, int> correct;
      for (const auto& trace : run.traces) {
        const Episode* ep = corpus.find(trace.episode_id);
        if (!ep) {
          throw Error("results reference unknown episode " + trace.episode_id);
        }
        const bool ok = score_episode(trace, ep->ground_truth.final_box, threshold);
        for (const auto& cell : kReportCells) {
          if (ok && in_cell(ep->tags, cell)) correct[cell]++;
        }
        if (!ok) {
          pr.failure_stages[attribute_failure(trace, *ep, world_for(*ep), threshold)]++;
        }
        for (const auto& rec : trace.stages) {
          stage_durations[rec.stage].push_back(rec.duration_ms);
        }
      }
      for (const auto& cell : kReportCells) {
        pr.cell_correct[cell].push_back(correct[cell]);
        const int total = pr.cell_episodes[cell];
        cell_acc[cell].push_back(total == 0 ? 0.0 : 100.0 * correct[cell] / total);
      }
    }
    for (const auto& cell : kReportCells) pr.cells[cell] = stats_over(cell_acc[cell]);
    for (const auto& [stage, xs] : stage_durations) pr.stage_runtime_ms[stage] = stats_over(xs);
    report.runs = std::max(report.runs, pr.runs);
    report.pipelines.push_back(std::move(pr));
  }
  return report;
}

// --- emission ----------------------------------------------------------------

namespace {

std::string fmt_cell(const CellStats& s) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.2f±%.2f", s.mean, s.std_dev);
  return buf;
}

std::string emit_csv(const EvalReport& report) {
  std::string out = "pipeline,overall,sh,mh,ss,sc,co,po,si,mi\n";
  for (const auto& pr : report.pipelines) {
    out += pr.pipeline;
    for (const auto& cell : kReportCells) out += "," + fmt_cell(pr.cells.at(cell));
    out += "\n";
  }
  return out;
}

std::string emit_table(const EvalReport& report) {
  std::ostringstream out;
  auto pad = [](const std::string& s, size_t width) {
    // +- is two bytes in UTF-8; pad by display width.
    size_t display = s.size();
    for (size_t i = 0; i + 1 < s.size(); ++i) {
      if (static_cast<unsigned char>(s[i]) == 0xc2 && static_cast<unsigned char>(s[i + 1]) == 0xb1)
        display--;
    }
    return s + std::string(display < width ? width - display : 1, ' ');
  };
  out << pad("pipeline", 10);
  for (const auto& cell : kReportCells) out << pad(cell, 14);
  out << "\n";
  for (const auto& pr : report.pipelines) {
    out << pad(pr.pipeline, 10);
    for (const auto& cell : kReportCells) out << pad(fmt_cell(pr.cells.at(cell)), 14);
    out << "\n";
  }
  out << "\n";
  char line[160];
  std::snprintf(line, sizeof(line), "episodes: %d  runs: %d  threshold: %.2f  (%s)\n",
                report.episodes, report.runs, report.threshold, report.std_semantics.c_str());
  out << line;
  for (const auto& pr : report.pipelines) {
    if (pr.failure_stages.empty()) continue;
    out << "failure stages [" << pr.pipeline << "]:";
    for (const auto& [stage, count] : pr.failure_stages) out << " " << stage << "=" << count;
    out << "\n";
  }
  for (const auto& pr : report.pipelines) {
    out << "stage runtime ms [" << pr.pipeline << "]:";
    for (const auto& [stage, s] : pr.stage_runtime_ms) out << " " << stage << "=" << fmt_cell(s);
    out << "\n";
  }
  return out.str();
}

}  // namespace

nlohmann::json report_to_json(const EvalReport& report) {
  nlohmann::json pipelines = nlohmann::json::array();
  for (const auto& pr : report.pipelines) {
    nlohmann::json cells = nlohmann::json::object();
    for (const auto& cell : kReportCells) {
      const auto& s = pr.cells.at(cell);
      cells[cell] = {{"mean", s.mean},
                     {"std", s.std_dev},
                     {"episodes", pr.cell_episodes.at(cell)},
                     {"correct_per_run", pr.cell_correct.at(cell)}};
    }
    nlohmann::json runtime = nlohmann::json::object();
    for (const auto& [stage, s] : pr.stage_runtime_ms) {
      runtime[stage] = {{"mean", s.mean}, {"std", s.std_dev}};
    }
    pipelines.push_back({{"pipeline", pr.pipeline},
                         {"runs", pr.runs},
                         {"cells", std::move(cells)},
                         {"failure_stages", pr.failure_stages},
                         {"stage_runtime_ms", std::move(runtime)}});
  }
  return nlohmann::json{{"threshold", report.threshold},
                        {"episodes", report.episodes},
                        {"runs", report.runs},
                        {"std_semantics", report.std_semantics},
                        {"pipelines", std::move(pipelines)}};
}

EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport report;
  j.at("threshold").get_to(report.threshold);
  j.at("episodes").get_to(report.episodes);
  j.at("runs").get_to(report.runs);
  j.at("std_semantics").get_to(report.std_semantics);
  for (const auto& pj : j.at("pipelines")) {
    PipelineReport pr;
    pj.at("pipeline").get_to(pr.pipeline);
    pj.at("runs").get_to(pr.runs);
    for (const auto& cell : kReportCells) {
      const auto& cj = pj.at("cells").at(cell);
      pr.cells[cell] = {cj.at("mean").get<double>(), cj.at("std").get<double>()};
      pr.cell_episodes[cell] = cj.at("episodes").get<int>();
      pr.cell_correct[cell] = cj.at("correct_per_run").get<std::vector<int>>();
    }
    if (pj.contains("failure_stages")) {
      pr.failure_stages = pj.at("failure_stages").get<std::map<std::string, int>>();
    }
    for (const auto& [stage, sj] : pj.at("stage_runtime_ms").items()) {
      pr.stage_runtime_ms[stage] = {sj.at("mean").get<double>(), sj.at("std").get<double>()};
    }
    report.pipelines.push_back(std::move(pr));
  }
  return report;
}

ReportFormat report_format_from_name(const std::string& name) {
  if (name == "table") return ReportFormat::Table;
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  throw ValidationError("unknown report format: " + name + " (expected table|csv|json)");
}

std::string emit_report(const EvalReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Table: return emit_table(report);
    case ReportFormat::Csv: return emit_csv(report);
    case ReportFormat::Json: return report_to_json(report).dump(2) + "\n";
  }
  throw ValidationError("unreachable report format");
}

// --- results files -----------------------------------------------------------

nlohmann::json results_to_json(const RunResults& results) {
  return nlohmann::json{{"meta",
                         {{"pipeline", results.pipeline},
                          {"backend", results.backend},
                          {"seed", results.seed},
                          {"corpus", results.corpus_path},
                          {"episode_count", results.traces.size()}}},
                        {"results", results.traces}};
}

RunResults results_from_json(const nlohmann::json& j) {
  RunResults r;
  const auto& meta = j.at("meta");
  meta.at("pipeline").get_to(r.pipeline);
  meta.at("backend").get_to(r.backend);
  meta.at("seed").get_to(r.seed);
  meta.at("corpus").get_to(r.corpus_path);
  j.at("results").get_to(r.traces);
  return r;
}

void save_results(const RunResults& results, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write results file: " + path.string());
  out << results_to_json(results).dump(2) << "\n";
}

RunResults load_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read results file: " + path.string());
  nlohmann::json j;
  in >> j;
  return results_from_json(j);
}

}  // namespace tgr
