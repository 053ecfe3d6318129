#include <cstdio>

#include "cli_internal.hpp"
#include "nol/error.hpp"
#include "nol/image_io.hpp"
#include "nol/mesh_io.hpp"
#include "nol/parallel.hpp"
#include "nol/refine.hpp"
#include "nol/sampling.hpp"
#include "nol/serialize.hpp"

namespace nol::cli {

using nlohmann::json;

namespace {

struct RenderCmdOptions {
  CommonOptions common;
  std::string manifest;
  bool no_refine = false;
  bool gt_poses = false;
  bool hemisphere = false;
  double az_step = 5.0;
  double el_step = 5.0;
  double radius = 0.0;
  bool inplane = false;
  int k = 6;
  int max_iters = 50;
  double step = 1.0;
  double temperature = kDefaultTemperature;
  bool ignore_source_mask = false;
};

struct Job {
  std::int64_t target_id = 0;
  double angle_deg = 0.0;
  bool variant = false;
  RigidPose pose;
};

std::string output_stem(const Job& job) {
  char buf[64];
  if (job.variant) {
    std::snprintf(buf, sizeof(buf), "render_%04lld_r%+03d", static_cast<long long>(job.target_id),
                  static_cast<int>(std::lround(job.angle_deg)));
  } else {
    std::snprintf(buf, sizeof(buf), "render_%04lld", static_cast<long long>(job.target_id));
  }
  return buf;
}

void render(const RenderCmdOptions& o) {
  if (o.k < 1 || o.k > 8) throw InputError("--k must be between 1 and 8");
  const Manifest m = read_manifest(o.manifest);
  if (m.mesh.empty() || m.camera.empty()) throw InputError("manifest needs \"mesh\" and \"camera\"");
  if (m.frames.empty()) throw InputError("manifest lists no frames");
  const TriangleMesh mesh = load_mesh(m.resolve(m.mesh));
  const Camera camera = camera_from_json(read_json_file(m.resolve(m.camera)));

  const std::size_t n = m.frames.size();
  std::vector<SourceView> views(n);
  for (std::size_t i = 0; i < n; ++i) {
    const FrameEntry& f = m.frames[i];
    if (f.image.empty() || f.mask.empty()) throw InputError("frame " + std::to_string(f.id) + " lacks image or mask");
    if (o.gt_poses && f.pose_gt.empty()) throw InputError("frame " + std::to_string(f.id) + " has no pose_gt");
    views[i].image = read_png(m.resolve(f.image));
    views[i].mask = read_mask_png(m.resolve(f.mask));
    views[i].pose = read_pose_list(m.resolve(o.gt_poses ? f.pose_gt : f.pose)).at(0);
    if (views[i].image.width() != camera.width || views[i].image.height() != camera.height) {
      throw InputError("frame " + std::to_string(f.id) + " does not match the camera resolution");
    }
    views[i].validate();
  }
  log("encoding " + std::to_string(n) + " source views");
  std::vector<FrameRecord> records(n);
  parallel_for(n, o.common.workers, [&](std::size_t i) {
    views[i].features = std::make_shared<const FeatureMap>(encode_features(views[i], mesh, camera));
    records[i] = make_frame_record(m.frames[i].id, views[i].pose, mesh, camera);
  });

  std::vector<std::pair<std::int64_t, RigidPose>> targets;
  if (o.hemisphere) {
    double radius = o.radius;
    if (radius <= 0.0) {
      for (const SourceView& v : views) radius += v.pose.camera_center().norm();
      radius /= static_cast<double>(n);
    }
    const PoseGrid grid = hemisphere_poses(o.az_step, o.el_step, radius);
    for (std::size_t i = 0; i < grid.poses.size(); ++i) targets.emplace_back(static_cast<std::int64_t>(i), grid.poses[i]);
  } else {
    if (m.targets.empty()) throw InputError("manifest lists no targets (use --hemisphere)");
    for (const TargetEntry& t : m.targets) targets.emplace_back(t.id, read_pose_list(m.resolve(t.pose)).at(0));
  }

  std::vector<Job> jobs;
  for (const auto& [id, pose] : targets) {
    if (o.inplane) {
      for (const InplaneVariant& v : inplane_rotations(pose)) jobs.push_back({id, v.angle_deg, true, v.pose});
    } else {
      jobs.push_back({id, 0.0, false, pose});
    }
  }

  const fs::path out(o.common.out);
  ensure_directory(out);
  if (!o.no_refine) ensure_directory(out / "traces");

  RenderOptions ropts;
  ropts.refine_poses = !o.no_refine;
  ropts.refine.max_iters = o.max_iters;
  ropts.refine.step_delta = o.step;
  ropts.refine.temperature = o.temperature;
  ropts.refine.require_source_mask = !o.ignore_source_mask;
  ropts.refine.validate();

  log("rendering " + std::to_string(jobs.size()) + " images");
  std::vector<json> entries(jobs.size());
  parallel_for(jobs.size(), o.common.workers, [&](std::size_t j) {
    const Job& job = jobs[j];
    std::vector<std::size_t> chosen;
    bool warning = false;
    if (n <= static_cast<std::size_t>(o.k)) {
      for (std::size_t i = 0; i < n; ++i) chosen.push_back(i);
    } else {
      const ViewSelection sel = select_views_for_target(job.pose, records, mesh, camera, o.k);
      warning = sel.empty_warning;
      for (const FrameRecord& r : sel.views) {
        for (std::size_t i = 0; i < n; ++i) {
          if (records[i].id == r.id) chosen.push_back(i);
        }
      }
    }
    const std::string stem = output_stem(job);
    json entry = {{"target", job.target_id}, {"angle_deg", job.angle_deg}, {"image", stem + ".png"},
                  {"pose", pose_to_json(job.pose)}};
    json ids = json::array();
    for (std::size_t i : chosen) ids.push_back(m.frames[i].id);
    entry["views"] = ids;

    Image image(camera.height, camera.width, 3);
    if (chosen.empty()) {
      entry["warning"] = "no source view covers the target";
    } else {
      std::vector<SourceView> subset;
      for (std::size_t i : chosen) subset.push_back(views[i]);
      const RenderResult r = render_nol(subset, mesh, camera, job.pose, ropts);
      image = r.rendering;
      if (warning) entry["warning"] = "no source view covers the target";
      if (r.status == RenderStatus::kAllStarved) entry["warning"] = "refinement starved for every view";
      if (ropts.refine_poses) {
        json trace = {{"views", ids}, {"traces", json::array()}};
        for (const RefineTrace& t : r.traces) trace["traces"].push_back(trace_to_json(t));
        write_json(out / "traces" / (stem + ".json"), trace);
        entry["trace"] = "traces/" + stem + ".json";
      }
    }
    write_file_atomic(out / (stem + ".png"), encode_png(image));
    entries[j] = std::move(entry);
  });

  json index = {{"refined", !o.no_refine}, {"images", entries}};
  write_json(out / "index.json", index);
  log("wrote " + std::to_string(jobs.size()) + " images to " + out.string());
}

}  // namespace

CLI::App* add_render(CLI::App& app, Runner& run) {
  auto opts = std::make_shared<RenderCmdOptions>();
  CLI::App* sub = app.add_subcommand("render", "Render target poses from a frame manifest");
  add_common_options(sub, opts->common, true);
  sub->add_option("--manifest", opts->manifest, "Frame manifest (JSON)")->required();
  sub->add_flag("--no-refine", opts->no_refine, "Skip source-pose refinement");
  sub->add_flag("--gt-poses", opts->gt_poses, "Use each frame's pose_gt instead of its annotated pose");
  sub->add_flag("--hemisphere", opts->hemisphere, "Render an upper-hemisphere pose grid instead of the targets");
  sub->add_option("--az-step", opts->az_step, "Hemisphere azimuth step (deg)");
  sub->add_option("--el-step", opts->el_step, "Hemisphere elevation step (deg)");
  sub->add_option("--radius", opts->radius, "Hemisphere radius (m); default: mean source distance");
  sub->add_flag("--inplane", opts->inplane, "Add in-plane rotations -45..45 deg in 15 deg steps");
  sub->add_option("--k", opts->k, "Views per target");
  sub->add_option("--max-iters", opts->max_iters, "Refinement iteration cap");
  sub->add_option("--step", opts->step, "Refinement step multiplier");
  sub->add_option("--temperature", opts->temperature, "Fusion softmax temperature");
  sub->add_flag("--ignore-source-mask", opts->ignore_source_mask,
                "Count samples outside the source mask in the projection error");
  sub->callback([opts, &run] { run = [opts] { render(*opts); }; });
  return sub;
}

}  // namespace nol::cli
