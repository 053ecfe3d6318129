#include <iostream>

#include "cli_internal.hpp"
#include "nol/error.hpp"
#include "nol/mesh_io.hpp"
#include "nol/parallel.hpp"
#include "nol/sampling.hpp"
#include "nol/serialize.hpp"

namespace nol::cli {

using nlohmann::json;

namespace {

struct SampleOptions {
  CommonOptions common;
  std::string manifest;
  std::string strategy = "diversity";
  int max_count = 16;
  double trans_mm = 300.0;
  double rot_deg = 45.0;
};

void sample(const SampleOptions& o) {
  if (o.strategy != "diversity" && o.strategy != "visibility") {
    throw InputError("unknown strategy '" + o.strategy + "' (diversity or visibility)");
  }
  const Manifest m = read_manifest(o.manifest);
  if (m.frames.empty()) throw InputError("manifest lists no frames");
  const std::size_t n = m.frames.size();
  std::vector<FrameRecord> records(n);
  if (o.strategy == "visibility") {
    if (m.mesh.empty() || m.camera.empty()) throw InputError("visibility sampling needs \"mesh\" and \"camera\"");
    const TriangleMesh mesh = load_mesh(m.resolve(m.mesh));
    const Camera camera = camera_from_json(read_json_file(m.resolve(m.camera)));
    std::vector<RigidPose> poses;
    for (const FrameEntry& f : m.frames) poses.push_back(read_pose_list(m.resolve(f.pose)).at(0));
    parallel_for(n, o.common.workers, [&](std::size_t i) {
      records[i] = make_frame_record(m.frames[i].id, poses[i], mesh, camera);
    });
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      records[i].id = m.frames[i].id;
      records[i].pose = read_pose_list(m.resolve(m.frames[i].pose)).at(0);
    }
  }

  std::vector<FrameRecord> picked;
  if (o.strategy == "diversity") {
    DiversityOptions d;
    d.trans_mm = o.trans_mm;
    d.rot_deg = o.rot_deg;
    d.max_count = o.max_count;
    d.seed = o.common.seed;
    picked = diversity_sample(records, d);
  } else {
    picked = greedy_visibility_sample(records);
    if (static_cast<int>(picked.size()) > o.max_count) picked.resize(o.max_count);
  }
  json ids = json::array();
  for (const FrameRecord& r : picked) ids.push_back(r.id);
  log(o.strategy + " sampling kept " + std::to_string(picked.size()) + " of " + std::to_string(n) + " frames");
  if (o.common.out.empty()) {
    std::cout << ids.dump() << '\n';
  } else {
    write_json(o.common.out, ids);
  }
}

}  // namespace

CLI::App* add_sample(CLI::App& app, Runner& run) {
  auto opts = std::make_shared<SampleOptions>();
  CLI::App* sub = app.add_subcommand("sample", "Select source frames from a frame manifest");
  add_common_options(sub, opts->common, false);
  sub->add_option("--manifest", opts->manifest, "Frame manifest (JSON)")->required();
  sub->add_option("--strategy", opts->strategy, "diversity or visibility");
  sub->add_option("--max-count", opts->max_count, "Maximum number of frames")->check(CLI::PositiveNumber);
  sub->add_option("--trans-mm", opts->trans_mm, "Diversity translation threshold (mm)");
  sub->add_option("--rot-deg", opts->rot_deg, "Diversity rotation threshold (deg)");
  sub->callback([opts, &run] { run = [opts] { sample(*opts); }; });
  return sub;
}

}  // namespace nol::cli
