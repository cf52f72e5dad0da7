#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tgr/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"tgr - grounded temporal reasoning pipelines over a scripted tabletop world"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from a config file (flags override it)");

  // simulate
  tgr::cmd::SimulateOptions sim;
  std::string all_tags = "paper";
  int mh = -1, sc = -1, mi = -1, po = -1;
  auto* simulate = app.add_subcommand("simulate", "generate a synthetic corpus");
  simulate->add_option("--out", sim.out, "corpus output path")->required();
  simulate->add_option("--count", sim.count, "episode count");
  simulate->add_option("--seed", sim.seed, "corpus seed");
  simulate->add_option("--fps", sim.fps, "frames per second");
  simulate->add_option("--all-tags", all_tags, "tag ratios: paper | uniform")
      ->check(CLI::IsMember({"paper", "uniform"}));
  simulate->add_option("--multi-hop", mh, "episodes tagged multi-hop");
  simulate->add_option("--complex", sc, "episodes tagged spatially complex");
  simulate->add_option("--multi-interaction", mi, "episodes tagged multi-interaction");
  simulate->add_option("--partial", po, "episodes tagged partially observable");
  simulate->add_flag("--force", sim.force, "overwrite an existing output file");
  simulate->add_option("--raster", sim.raster_dir, "render every frame as PPM under this directory");

  // run
  tgr::cmd::RunOptions run;
  auto* runc = app.add_subcommand("run", "run a pipeline over a corpus");
  runc->add_option("--corpus", run.corpus, "corpus file")->required();
  runc->add_option("--out", run.out_dir, "results output directory");
  runc->add_option("--pipeline", run.pipeline, "g2tr | dtvg | rtvg | all")
      ->check(CLI::IsMember({"g2tr", "dtvg", "rtvg", "all"}));
  runc->add_option("--backend", run.backend, "oracle | faulty | remote")
      ->check(CLI::IsMember({"oracle", "faulty", "remote"}));
  runc->add_option("--fault-profile", run.fault_profile, "fault profile JSON (faulty backend)");
  runc->add_option("--endpoint-config", run.endpoint_config,
                   "endpoint config JSON (remote backend; TGR_ENDPOINT/TGR_API_KEY override)");
  runc->add_option("--seed", run.seeds, "run seed (repeatable)");
  runc->add_option("--n", run.n, "frames sub-sampled per interval");
  runc->add_option("--n-max", run.n_max, "occlusion re-detection cap");
  runc->add_option("--refine-budget", run.refine_budget, "rtvg refinement rounds");
  runc->add_option("--parallel", run.parallel, "episode-level parallelism");
  runc->add_option("--ambiguity", run.ambiguity, "oracle description ambiguity level");

  // eval
  tgr::cmd::EvalOptions eval;
  auto* evalc = app.add_subcommand("eval", "score results and emit a report");
  evalc->add_option("--corpus", eval.corpus, "corpus file")->required();
  evalc->add_option("--results", eval.results, "results file (repeatable)")->required();
  evalc->add_option("--threshold", eval.threshold, "IoU correctness threshold");
  evalc->add_option("--format", eval.format, "table | csv | json")
      ->check(CLI::IsMember({"table", "csv", "json"}));
  evalc->add_option("--out", eval.out, "write the report here instead of stdout");

  // report
  tgr::cmd::ReportOptions rep;
  auto* repc = app.add_subcommand("report", "re-emit a saved eval JSON report");
  repc->add_option("--in", rep.in, "eval report JSON")->required();
  repc->add_option("--format", rep.format, "table | csv | json")
      ->check(CLI::IsMember({"table", "csv", "json"}));
  repc->add_option("--out", rep.out, "write here instead of stdout");

  // ablate
  tgr::cmd::AblateOptions abl;
  auto* ablc = app.add_subcommand("ablate", "sweep one fault-profile field");
  ablc->add_option("--corpus", abl.corpus, "corpus file")->required();
  ablc->add_option("--field", abl.field, "fault field, e.g. localizer.rate")->required();
  ablc->add_option("--values", abl.values, "sweep values (repeatable)");
  ablc->add_option("--seed", abl.seeds, "run seed (repeatable; default 1..5)");
  ablc->add_option("--fault-profile", abl.fault_profile, "base fault profile JSON");
  ablc->add_option("--threshold", abl.threshold, "IoU correctness threshold");
  ablc->add_option("--format", abl.format, "table | csv | json")
      ->check(CLI::IsMember({"table", "csv", "json"}));
  ablc->add_option("--out", abl.out, "write here instead of stdout");
  ablc->add_option("--n", abl.n, "frames sub-sampled per interval");
  ablc->add_option("--n-max", abl.n_max, "occlusion re-detection cap");
  ablc->add_option("--parallel", abl.parallel, "episode-level parallelism");

  CLI11_PARSE(app, argc, argv);

  if (*simulate) {
    if (all_tags == "uniform") sim.uniform_tags = true;
    if (mh >= 0 || sc >= 0 || mi >= 0 || po >= 0) {
      tgr::AxisCounts axes = sim.uniform_tags ? tgr::CorpusConfig::uniform(sim.count).axes
                                              : tgr::CorpusConfig::scaled(sim.count).axes;
      if (mh >= 0) axes.multi_hop = mh;
      if (sc >= 0) axes.complex_spatial = sc;
      if (mi >= 0) axes.multi_interaction = mi;
      if (po >= 0) axes.partial_observability = po;
      sim.axes = axes;
    }
    return tgr::cmd::simulate(sim, std::cout, std::cerr);
  }
  if (*runc) return tgr::cmd::run(run, std::cout, std::cerr);
  if (*evalc) return tgr::cmd::evaluate(eval, std::cout, std::cerr);
  if (*repc) return tgr::cmd::report(rep, std::cout, std::cerr);
  if (*ablc) return tgr::cmd::ablate(abl, std::cout, std::cerr);
  return 2;
}
