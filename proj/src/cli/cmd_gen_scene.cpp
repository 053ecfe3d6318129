#include <cstdio>

#include "cli_internal.hpp"
#include "nol/error.hpp"
#include "nol/image_io.hpp"
#include "nol/mesh_io.hpp"
#include "nol/rng.hpp"
#include "nol/scenegen.hpp"
#include "nol/serialize.hpp"

namespace nol::cli {

namespace {

struct GenSceneOptions {
  CommonOptions common;
  std::string shape = "box";
  int n_sources = 5;
  double trans_err = 0.01;
  double rot_err = 0.05;
  int resolution = 256;
  double focal_scale = 1.6;
  double distance = 0.45;
  int texture_size = 256;
  bool augment = false;
};

std::string numbered(const char* stem, int i, const char* suffix) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%03d%s", stem, i, suffix);
  return buf;
}

void gen_scene(const GenSceneOptions& o) {
  const std::optional<PrimitiveKind> parsed = parse_primitive(o.shape);
  if (!parsed) throw InputError("unknown shape '" + o.shape + "' (box or cylinder)");
  const PrimitiveKind kind = *parsed;
  if (o.n_sources < 1) throw InputError("--n-sources must be at least 1");
  if (o.trans_err < 0.0 || o.rot_err < 0.0) throw InputError("error ranges must be nonnegative");
  TrialConfig cfg;
  cfg.resolution = o.resolution;
  cfg.focal_scale = o.focal_scale;
  cfg.distance = o.distance;
  cfg.texture_size = o.texture_size;

  const fs::path out(o.common.out);
  ensure_directory(out);
  ensure_directory(out / "sources");
  ensure_directory(out / "targets");

  log("generating " + o.shape + " trial with " + std::to_string(o.n_sources) + " sources");
  const RigidPose target = random_target_pose(derive_seed(o.common.seed, 7), cfg);
  const TrialSet set = make_trial_set(kind, target, o.n_sources, o.trans_err, o.rot_err, o.common.seed, cfg);

  Manifest m;
  m.mesh = "mesh.obj";
  m.camera = "camera.json";
  m.extra["shape"] = to_string(kind);
  m.extra["seed"] = o.common.seed;
  m.extra["trans_err_max"] = o.trans_err;
  m.extra["rot_err_max"] = o.rot_err;
  m.extra["texture"] = "texture.png";
  m.extra["augment"] = o.augment;

  write_file_atomic(out / m.mesh, to_obj(set.object.mesh));
  write_json(out / m.camera, camera_to_json(set.camera));
  write_file_atomic(out / "texture.png", encode_png(set.object.texture));

  Rng augment_rng(derive_seed(o.common.seed, 3));
  for (int i = 0; i < static_cast<int>(set.sources.size()); ++i) {
    const TrialSource& s = set.sources[i];
    Image image = s.image;
    if (o.augment) {
      const AugmentSample params = sample_augment(AugmentRanges{}, augment_rng);
      image = color_augment(image, params, derive_seed(o.common.seed, 200 + i));
    }
    FrameEntry f;
    f.id = i;
    f.image = "sources/" + numbered("src", i, ".png");
    f.mask = "sources/" + numbered("src", i, "_mask.png");
    f.pose = "sources/" + numbered("src", i, "_pose.json");
    f.pose_gt = "sources/" + numbered("src", i, "_pose_gt.json");
    write_file_atomic(out / f.image, encode_png(image));
    write_file_atomic(out / f.mask, encode_mask_png(s.mask));
    write_json(out / f.pose, pose_to_json(s.perturbed_pose));
    write_json(out / f.pose_gt, pose_to_json(s.exact_pose));
    m.frames.push_back(f);
  }
  TargetEntry t;
  t.id = 0;
  t.image = "targets/" + numbered("target", 0, ".png");
  t.mask = "targets/" + numbered("target", 0, "_mask.png");
  t.pose = "targets/" + numbered("target", 0, "_pose.json");
  write_file_atomic(out / t.image, encode_png(set.target_image));
  write_file_atomic(out / t.mask, encode_mask_png(set.target_mask));
  write_json(out / t.pose, pose_to_json(set.target_pose));
  m.targets.push_back(t);

  write_json(out / "manifest.json", manifest_to_json(m));
  log("wrote " + (out / "manifest.json").string());
}

}  // namespace

CLI::App* add_gen_scene(CLI::App& app, Runner& run) {
  auto opts = std::make_shared<GenSceneOptions>();
  CLI::App* sub = app.add_subcommand("gen-scene", "Generate a synthetic trial set (mesh, sources, target)");
  add_common_options(sub, opts->common, true);
  sub->add_option("--shape", opts->shape, "box or cylinder");
  sub->add_option("--n-sources", opts->n_sources, "Number of source views");
  sub->add_option("--trans-err", opts->trans_err, "Max translation error per axis (m)");
  sub->add_option("--rot-err", opts->rot_err, "Max rotation error per Euler angle (rad)");
  sub->add_option("--resolution", opts->resolution, "Image size (pixels)");
  sub->add_option("--focal-scale", opts->focal_scale, "Focal length in image widths");
  sub->add_option("--distance", opts->distance, "Camera distance (m)");
  sub->add_option("--texture-size", opts->texture_size, "Procedural texture size");
  sub->add_flag("--augment", opts->augment, "Apply random color augmentation to source images");
  sub->callback([opts, &run] { run = [opts] { gen_scene(*opts); }; });
  return sub;
}

}  // namespace nol::cli
