#include <iostream>

#include "cli_internal.hpp"
#include "nol/error.hpp"
#include "nol/mesh_io.hpp"
#include "nol/metrics.hpp"
#include "nol/serialize.hpp"

namespace nol::cli {

using nlohmann::json;

namespace {

struct EvalOptions {
  CommonOptions common;
  std::string mesh;
  std::string gt;
  std::string est;
  bool symmetric = false;
  double threshold = kPoseThresholdFraction;
};

void evaluate(const EvalOptions& o) {
  const TriangleMesh mesh = load_mesh(o.mesh);
  const std::vector<RigidPose> gt = read_pose_list(o.gt);
  const std::vector<RigidPose> est = read_pose_list(o.est);
  if (gt.size() != est.size()) throw InputError("ground-truth and estimated pose counts differ");
  if (gt.empty()) throw InputError("no poses to evaluate");

  json rows = json::array();
  int correct = 0;
  double diameter_mm = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const PoseEvalResult r = evaluate_pose(mesh, gt[i], est[i], o.symmetric, o.threshold);
    diameter_mm = r.diameter_mm;
    correct += r.correct ? 1 : 0;
    rows.push_back({{"index", i}, {"add_mm", r.add_mm}, {"adi_mm", r.adi_mm}, {"correct", r.correct}});
  }
  const json report = {{"metric", o.symmetric ? "adi" : "add"},
                       {"threshold_fraction", o.threshold},
                       {"diameter_mm", diameter_mm},
                       {"rows", rows},
                       {"recall", static_cast<double>(correct) / static_cast<double>(gt.size())}};
  log("recall " + std::to_string(report["recall"].get<double>()) + " over " + std::to_string(gt.size()) + " poses");
  if (o.common.out.empty()) {
    std::cout << report.dump(2) << '\n';
  } else {
    write_json(o.common.out, report);
  }
}

}  // namespace

CLI::App* add_eval(CLI::App& app, Runner& run) {
  auto opts = std::make_shared<EvalOptions>();
  CLI::App* sub = app.add_subcommand("eval", "ADD/ADI pose scores against ground truth");
  add_common_options(sub, opts->common, false);
  sub->add_option("--mesh", opts->mesh, "Object mesh (OBJ or PLY)")->required();
  sub->add_option("--gt", opts->gt, "Ground-truth pose file")->required();
  sub->add_option("--est", opts->est, "Estimated pose file")->required();
  sub->add_flag("--symmetric", opts->symmetric, "Score with ADI instead of ADD");
  sub->add_option("--threshold", opts->threshold, "Correctness threshold as a fraction of the diameter");
  sub->callback([opts, &run] { run = [opts] { evaluate(*opts); }; });
  return sub;
}

}  // namespace nol::cli
