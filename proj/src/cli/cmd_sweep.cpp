#include "cli_internal.hpp"
#include "nol/error.hpp"
#include "nol/metrics.hpp"
#include "nol/serialize.hpp"

namespace nol::cli {

using nlohmann::json;

namespace {

struct SweepOptions {
  CommonOptions common;
  std::vector<std::string> shapes{"box", "cylinder"};
  std::vector<double> trans_levels{0.0, 0.0025, 0.005, 0.0075, 0.01};
  std::vector<double> rot_levels{0.0, 0.0125, 0.025, 0.0375, 0.05};
  bool diagonal = false;
  int trials = 50;
  int n_sources = 5;
  int resolution = 128;
  int max_iters = 50;
  double step = 1.0;
  bool ignore_source_mask = false;
};

json summary_json(const MetricSummary& s) {
  return {{"refined_mean", s.refined_mean},
          {"refined_std", s.refined_std},
          {"unrefined_mean", s.unrefined_mean},
          {"unrefined_std", s.unrefined_std}};
}

void sweep(const SweepOptions& o) {
  SweepConfig cfg;
  cfg.shapes.clear();
  for (const std::string& s : o.shapes) {
    const std::optional<PrimitiveKind> kind = parse_primitive(s);
    if (!kind) throw InputError("unknown shape '" + s + "' (box or cylinder)");
    cfg.shapes.push_back(*kind);
  }
  if (cfg.shapes.empty()) throw InputError("no shapes given");
  if (o.diagonal) {
    if (o.trans_levels.size() != o.rot_levels.size()) {
      throw InputError("--diagonal needs as many translation as rotation levels");
    }
    for (std::size_t i = 0; i < o.trans_levels.size(); ++i) cfg.levels.push_back({o.trans_levels[i], o.rot_levels[i]});
  } else {
    for (double t : o.trans_levels) {
      for (double r : o.rot_levels) cfg.levels.push_back({t, r});
    }
  }
  for (const ErrorLevel& l : cfg.levels) {
    if (l.trans_m < 0.0 || l.rot_rad < 0.0) throw InputError("error levels must be nonnegative");
  }
  cfg.trials = o.trials;
  cfg.n_sources = o.n_sources;
  cfg.seed = o.common.seed;
  cfg.workers = o.common.workers;
  cfg.trial.resolution = o.resolution;
  cfg.refine.max_iters = o.max_iters;
  cfg.refine.step_delta = o.step;
  cfg.refine.require_source_mask = !o.ignore_source_mask;
  cfg.refine.validate();

  const fs::path out(o.common.out);
  ensure_directory(out);
  log("sweeping " + std::to_string(cfg.shapes.size() * cfg.levels.size()) + " cells x " +
      std::to_string(cfg.trials) + " trials");
  const SweepReport report = sensitivity_sweep(cfg);

  json cells = json::array();
  for (const SweepCell& c : report.cells) {
    cells.push_back({{"shape", to_string(c.shape)},
                     {"trans_err", c.level.trans_m},
                     {"rot_err", c.level.rot_rad},
                     {"n", c.count},
                     {"l1", summary_json(c.l1)},
                     {"psnr", summary_json(c.psnr)},
                     {"ssim", summary_json(c.ssim)},
                     {"seeds", c.seeds}});
  }
  json doc = {{"seed", cfg.seed}, {"trials", cfg.trials}, {"n_sources", cfg.n_sources},
              {"resolution", cfg.trial.resolution}, {"cells", cells}};
  write_file_atomic(out / "sweep_trials.csv", sweep_trials_csv(report));
  write_file_atomic(out / "sweep.csv", sweep_csv(report));
  write_json(out / "sweep.json", doc);
  log("wrote " + (out / "sweep.csv").string());
}

}  // namespace

CLI::App* add_sweep(CLI::App& app, Runner& run) {
  auto opts = std::make_shared<SweepOptions>();
  CLI::App* sub = app.add_subcommand("sweep", "Image error with and without refinement over pose-error levels");
  add_common_options(sub, opts->common, true);
  sub->add_option("--shapes", opts->shapes, "Shapes to test");
  sub->add_option("--trans-levels", opts->trans_levels, "Translation error levels (m)");
  sub->add_option("--rot-levels", opts->rot_levels, "Rotation error levels (rad)");
  sub->add_flag("--diagonal", opts->diagonal, "Pair levels index-wise instead of taking the full grid");
  sub->add_option("--trials", opts->trials, "Trials per cell")->check(CLI::PositiveNumber);
  sub->add_option("--n-sources", opts->n_sources, "Source views per trial")->check(CLI::Range(1, 8));
  sub->add_option("--resolution", opts->resolution, "Image size (pixels)");
  sub->add_option("--max-iters", opts->max_iters, "Refinement iteration cap");
  sub->add_option("--step", opts->step, "Refinement step multiplier");
  sub->add_flag("--ignore-source-mask", opts->ignore_source_mask,
                "Count samples outside the source mask in the projection error");
  sub->callback([opts, &run] { run = [opts] { sweep(*opts); }; });
  return sub;
}

}  // namespace nol::cli
