#include "tgr/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "tgr/errors.hpp"
#include "tgr/faults.hpp"
#include "tgr/raster.hpp"
#include "tgr/remote.hpp"
#include "tgr/runner.hpp"

namespace tgr::cmd {
namespace fs = std::filesystem;

namespace {

int fail(std::ostream& err, const std::string& message, int code = 1) {
  err << "error: " << message << "\n";
  return code;
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path);
  if (!file) throw Error("cannot write " + path);
  file << text;
}

double* fault_field(FaultProfile& p, const std::string& name) {
  if (name == "parser.scramble_rate") return &p.parser.scramble_rate;
  if (name == "localizer.rate") return &p.localizer.rate;
  if (name == "detector.wrong_class_rate") return &p.detector.wrong_class_rate;
  if (name == "detector.wrong_option_rate") return &p.detector.wrong_option_rate;
  if (name == "grounder.miss_rate") return &p.grounder.miss_rate;
  if (name == "grounder.jitter_px") return &p.grounder.jitter_px;
  if (name == "tracker.identity_swap_rate") return &p.tracker.identity_swap_rate;
  return nullptr;
}

}  // namespace

int simulate(const SimulateOptions& options, std::ostream& out, std::ostream& err) {
  try {
    if (options.out.empty()) return fail(err, "simulate needs --out", 2);
    if (fs::exists(options.out) && !options.force) {
      return fail(err, "refusing to overwrite " + options.out + " (pass --force)");
    }
    CorpusConfig config = options.uniform_tags ? CorpusConfig::uniform(options.count)
                                               : CorpusConfig::scaled(options.count);
    if (options.axes) {
      config.count = options.count;
      config.axes = *options.axes;
    }
    config.fps = options.fps;
    const Corpus corpus = generate_corpus(config, options.seed);
    save_corpus(corpus, options.out);

    const TagMarginals m = tag_marginals(corpus);
    out << "corpus: " << corpus.episodes.size() << " episodes -> " << options.out << "\n";
    out << "hops single:multi = " << m.single_hop << ":" << m.multi_hop << "\n";
    out << "spatial simple:complex = " << m.simple << ":" << m.complex_spatial << "\n";
    out << "interactions single:multi = " << m.single_interaction << ":" << m.multi_interaction
        << "\n";
    out << "observability full:partial = " << m.full << ":" << m.partial << "\n";

    if (!options.raster_dir.empty()) {
      size_t rendered = 0;
      for (const auto& ep : corpus.episodes) {
        const World world = World::compile(ep.script);
        fs::create_directories(fs::path(options.raster_dir) / ep.id);
        for (int f = 0; f < world.frame_count(); ++f) {
          write_ppm(raster_path(options.raster_dir, ep.id, f), render_frame_ppm(world, f));
          ++rendered;
        }
      }
      out << "rendered " << rendered << " frames under " << options.raster_dir << "\n";
    }
    return 0;
  } catch (const std::exception& e) {
    return fail(err, e.what());
  }
}

int run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  try {
    if (options.corpus.empty()) return fail(err, "run needs --corpus", 2);
    if (options.seeds.empty()) return fail(err, "run needs at least one --seed", 2);
    const Corpus corpus = load_corpus(options.corpus);

    std::vector<std::string> pipelines;
    if (options.pipeline == "all") {
      pipelines = {"g2tr", "dtvg", "rtvg"};
    } else if (options.pipeline == "g2tr" || options.pipeline == "dtvg" ||
               options.pipeline == "rtvg") {
      pipelines = {options.pipeline};
    } else {
      return fail(err, "unknown pipeline " + options.pipeline, 2);
    }

    OracleOptions oracle_options;
    oracle_options.describe_ambiguity = options.ambiguity;

    std::optional<FaultProfile> profile;
    std::optional<BackendSet> remote_set;
    if (options.backend == "faulty") {
      profile = options.fault_profile.empty() ? FaultProfile{}
                                              : FaultProfile::from_file(options.fault_profile);
    } else if (options.backend == "remote") {
      RemoteConfig rc = options.endpoint_config.empty()
                            ? RemoteConfig::from_environment()
                            : RemoteConfig::from_file(options.endpoint_config);
      remote_set = make_remote_backends(rc);
    } else if (options.backend != "oracle") {
      return fail(err, "unknown backend " + options.backend, 2);
    }

    fs::create_directories(options.out_dir);
    for (const auto& pipeline : pipelines) {
      for (uint64_t seed : options.seeds) {
        RunnerOptions ropts;
        ropts.pipeline = pipeline;
        ropts.backend_name = options.backend;
        ropts.pipeline_options.n = options.n;
        ropts.pipeline_options.n_max = options.n_max;
        ropts.budget.max_rounds = options.refine_budget;
        ropts.parallelism = options.parallel;

        BackendFactory factory;
        if (options.backend == "oracle") {
          factory = [&](const Episode&, std::shared_ptr<const World> world) {
            return make_oracle_backends(std::move(world), oracle_options);
          };
        } else if (options.backend == "faulty") {
          factory = [&, seed](const Episode&, std::shared_ptr<const World> world) {
            return make_faulty_backends(std::move(world), *profile, seed, oracle_options);
          };
        } else {
          factory = [&](const Episode&, std::shared_ptr<const World>) { return *remote_set; };
        }

        RunResults results = run_corpus(corpus, factory, ropts, seed);
        results.corpus_path = options.corpus;
        const fs::path path = fs::path(options.out_dir) /
                              ("results_" + pipeline + "_seed" + std::to_string(seed) + ".json");
        save_results(results, path);

        int errors = 0;
        for (const auto& t : results.traces) errors += t.error_stage ? 1 : 0;
        out << pipeline << " seed " << seed << ": " << results.traces.size() << " episodes, "
            << errors << " stage errors -> " << path.string() << "\n";
      }
    }
    return 0;
  } catch (const std::exception& e) {
    return fail(err, e.what());
  }
}

int evaluate(const EvalOptions& options, std::ostream& out, std::ostream& err) {
  try {
    if (options.corpus.empty() || options.results.empty()) {
      return fail(err, "eval needs --corpus and at least one --results file", 2);
    }
    const ReportFormat format = report_format_from_name(options.format);
    const Corpus corpus = load_corpus(options.corpus);
    std::vector<RunResults> runs;
    runs.reserve(options.results.size());
    for (const auto& path : options.results) runs.push_back(load_results(path));
    const EvalReport report = aggregate(runs, corpus, options.threshold);
    write_text(options.out, emit_report(report, format), out);
    return 0;
  } catch (const std::exception& e) {
    return fail(err, e.what());
  }
}

int report(const ReportOptions& options, std::ostream& out, std::ostream& err) {
  try {
    if (options.in.empty()) return fail(err, "report needs --in (an eval JSON document)", 2);
    const ReportFormat format = report_format_from_name(options.format);
    std::ifstream in(options.in);
    if (!in) return fail(err, "cannot read " + options.in);
    nlohmann::json j;
    in >> j;
    write_text(options.out, emit_report(report_from_json(j), format), out);
    return 0;
  } catch (const std::exception& e) {
    return fail(err, e.what());
  }
}

std::vector<AblationPoint> sweep_fault_field(const Corpus& corpus, const std::string& field,
                                             const std::vector<double>& values,
                                             const std::vector<uint64_t>& seeds,
                                             const FaultProfile& base, double threshold,
                                             const PipelineOptions& popts, int parallel) {
  std::vector<AblationPoint> series;
  for (double value : values) {
    FaultProfile profile = base;
    double* slot = fault_field(profile, field);
    if (!slot) throw ValidationError("unknown fault profile field: " + field);
    *slot = value;
    profile.validate();

    AblationPoint point;
    point.value = value;
    for (uint64_t seed : seeds) {
      RunnerOptions ropts;
      ropts.pipeline = "g2tr";
      ropts.backend_name = "faulty";
      ropts.pipeline_options = popts;
      ropts.parallelism = parallel;
      BackendFactory factory = [&](const Episode&, std::shared_ptr<const World> world) {
        return make_faulty_backends(std::move(world), profile, seed);
      };
      const RunResults results = run_corpus(corpus, factory, ropts, seed);
      int correct = 0;
      for (const auto& trace : results.traces) {
        const Episode* ep = corpus.find(trace.episode_id);
        if (ep && score_episode(trace, ep->ground_truth.final_box, threshold)) correct++;
      }
      point.per_seed.push_back(100.0 * correct / static_cast<double>(corpus.episodes.size()));
    }
    double sum = 0.0;
    for (double a : point.per_seed) sum += a;
    point.mean_accuracy = sum / static_cast<double>(point.per_seed.size());
    double var = 0.0;
    for (double a : point.per_seed) {
      var += (a - point.mean_accuracy) * (a - point.mean_accuracy);
    }
    point.std_dev = std::sqrt(var / static_cast<double>(point.per_seed.size()));
    series.push_back(std::move(point));
  }
  return series;
}

int ablate(const AblateOptions& options, std::ostream& out, std::ostream& err) {
  try {
    if (options.corpus.empty()) return fail(err, "ablate needs --corpus", 2);
    if (options.field.empty()) return fail(err, "ablate needs --field", 2);
    if (options.values.empty()) return fail(err, "ablate needs a non-empty --values list", 2);
    if (options.seeds.empty()) return fail(err, "ablate needs at least one --seed", 2);
    {
      FaultProfile probe;
      if (!fault_field(probe, options.field)) {
        return fail(err, "unknown fault profile field: " + options.field, 2);
      }
    }
    const Corpus corpus = load_corpus(options.corpus);
    const FaultProfile base = options.fault_profile.empty()
                                  ? FaultProfile{}
                                  : FaultProfile::from_file(options.fault_profile);
    PipelineOptions popts;
    popts.n = options.n;
    popts.n_max = options.n_max;
    const auto series = sweep_fault_field(corpus, options.field, options.values, options.seeds,
                                          base, options.threshold, popts, options.parallel);

    std::string text;
    if (options.format == "json") {
      nlohmann::json points = nlohmann::json::array();
      for (const auto& p : series) {
        points.push_back({{"value", p.value},
                          {"mean_accuracy", p.mean_accuracy},
                          {"std", p.std_dev},
                          {"per_seed", p.per_seed}});
      }
      text = nlohmann::json{{"field", options.field}, {"points", std::move(points)}}.dump(2) + "\n";
    } else if (options.format == "csv") {
      text = "value,mean,std\n";
      for (const auto& p : series) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%g,%.2f,%.2f\n", p.value, p.mean_accuracy, p.std_dev);
        text += buf;
      }
    } else if (options.format == "table") {
      text = "field: " + options.field + " (g2tr accuracy % over " +
             std::to_string(options.seeds.size()) + " seeds)\n";
      char header[64];
      std::snprintf(header, sizeof(header), "%-10s%-12s%-12s\n", "value", "mean", "std");
      text += header;
      for (const auto& p : series) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%-10g%-12.2f%-12.2f\n", p.value, p.mean_accuracy,
                      p.std_dev);
        text += buf;
      }
    } else {
      return fail(err, "unknown format " + options.format, 2);
    }
    write_text(options.out, text, out);
    return 0;
  } catch (const std::exception& e) {
    return fail(err, e.what());
  }
}

}  // namespace tgr::cmd
