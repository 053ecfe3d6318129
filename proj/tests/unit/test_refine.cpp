#include <cmath>

#include "doctest.h"
#include "nol/error.hpp"
#include "nol/fusion.hpp"
#include "nol/refine.hpp"
#include "scenes.hpp"

using namespace nol;

namespace {

struct Setup {
  TrialSet set;
  std::vector<SourceView> views;
  TargetGeometry target;
  FusionResult fused;
};

Setup make_setup(PrimitiveKind kind, std::uint64_t seed, double trans_err, double rot_err) {
  Setup s{testing::small_trial(kind, seed, trans_err, rot_err), {}, {}, {}};
  s.views = testing::encoded_views(s.set, true);
  s.target = prepare_target(s.set.object.mesh, s.set.target_pose, s.set.camera);
  std::vector<ProjectedMap> projected;
  for (std::size_t i = 0; i < s.views.size(); ++i) {
    projected.push_back(project_view(s.views[i], s.set.object.mesh, s.set.camera, s.target, static_cast<int>(i)));
  }
  s.fused = fuse(projected);
  return s;
}

// Constant maps on an all-interior target.
struct Flat {
  ProjectedMap projected;
  FeatureMap reference;
  TargetGeometry target;
  Mask mask;
};

Flat flat(int h, int w) {
  Flat f;
  f.projected.features = FeatureMap(h, w, kFeatureChannels);
  f.projected.features.valid = Mask(h, w, true);
  f.reference = FeatureMap(h, w, kFeatureChannels);
  f.reference.valid = Mask(h, w, true);
  f.target.interior = Mask(h, w, true);
  f.mask = Mask(h, w, true);
  return f;
}

}  // namespace

TEST_CASE("projection error closed form") {
  Flat f = flat(8, 8);
  for (std::size_t p = 0; p < 64; ++p) f.projected.features.values.pixel(p)[5] = 0.2;
  const ProjectionError e = projection_error(f.projected, f.reference, f.mask, f.target);
  CHECK_FALSE(e.starved);
  CHECK(e.pixels == 64);
  CHECK(e.value == doctest::Approx(0.2 / 17.0).epsilon(1e-12));

  const Mask region = error_region(f.projected, f.reference, f.mask, f.target);
  const FeatureMap residual = projection_residual(f.projected, f.reference, region);
  CHECK(residual.values.pixel(3)[5] == doctest::Approx(1.0 / (64.0 * 17.0)));
  CHECK(residual.values.pixel(3)[4] == 0.0);
}

TEST_CASE("projection error starves below the pixel floor") {
  Flat f = flat(8, 8);
  f.mask = Mask(8, 8);
  for (int p = 0; p < kMinErrorPixels - 1; ++p) f.mask.set(static_cast<std::size_t>(p), true);
  ProjectionError e = projection_error(f.projected, f.reference, f.mask, f.target);
  CHECK(e.starved);
  f.mask.set(static_cast<std::size_t>(kMinErrorPixels - 1), true);
  e = projection_error(f.projected, f.reference, f.mask, f.target);
  CHECK_FALSE(e.starved);
  CHECK(e.value == 0.0);

  Flat g = flat(8, 8);
  g.target.interior = Mask(8, 8);
  CHECK(std::isinf(projection_error(g.projected, g.reference, g.mask, g.target).value));
}

TEST_CASE("analytic gradient matches central differences") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Setup s = make_setup(seed % 2 ? PrimitiveKind::kCylinder : PrimitiveKind::kBox, 100 + seed, 0.01, 0.05);
    const SourceView& view = s.views[seed % s.views.size()];
    const PoseGradient g = projection_error_gradient(view, s.set.object.mesh, s.set.camera, s.target,
                                                     s.fused.weighted, s.fused.union_mask);
    REQUIRE_FALSE(g.starved);
    const PoseDelta fd = finite_diff_gradient(view, s.set.object.mesh, s.set.camera, s.target, s.fused.weighted,
                                              s.fused.union_mask, 1e-6, 1e-6);
    const double rt = (g.delta.d_translation - fd.d_translation).norm() / fd.d_translation.norm();
    const double rr = (g.delta.d_euler - fd.d_euler).norm() / fd.d_euler.norm();
    CHECK(rt <= 1e-2);
    CHECK(rr <= 1e-2);
  }
}

TEST_CASE("refinement loop contracts") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Setup s = make_setup(seed % 2 ? PrimitiveKind::kCylinder : PrimitiveKind::kBox, 200 + seed, 0.01, 0.05);
    RefineConfig cfg;
    for (const SourceView& view : s.views) {
      const RefineResult r = refine_pose(view, s.set.object.mesh, s.set.camera, s.target, s.fused.weighted,
                                         s.fused.union_mask, cfg);
      const RefineTrace& t = r.trace;
      CHECK(t.iterations_run <= cfg.max_iters);
      CHECK(t.errors.size() == static_cast<std::size_t>(t.iterations_run) + 1);
      CHECK(t.poses.size() == t.errors.size());
      CHECK(t.final_pose == r.pose);
      CHECK(so3_error(r.pose.rotation()) <= 1e-9);
      for (const RigidPose& p : t.poses) CHECK(so3_error(p.rotation()) <= 1e-9);
      const TargetGeometry& tg = s.target;
      SourceView moved = view;
      moved.pose = r.pose;
      const ProjectedMap pm = project_view(moved, s.set.object.mesh, s.set.camera, tg);
      const double final_error = projection_error(pm, s.fused.weighted, s.fused.union_mask, tg).value;
      CHECK(final_error <= t.errors.front());
    }
  }
}

TEST_CASE("iteration cap") {
  const Setup s = make_setup(PrimitiveKind::kBox, 300, 0.01, 0.05);
  RefineConfig cfg;
  cfg.max_iters = 2;
  cfg.patience = 100;
  const RefineResult r = refine_pose(s.views[0], s.set.object.mesh, s.set.camera, s.target, s.fused.weighted,
                                     s.fused.union_mask, cfg);
  CHECK(r.trace.iterations_run <= 2);
}

TEST_CASE("config validation") {
  RefineConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.step_delta = 0.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = {};
  cfg.max_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  cfg = {};
  cfg.temperature = -1.0;
  CHECK_THROWS_AS(cfg.validate(), InputError);
  CHECK(to_string(StopReason::kMaxIters) == "max_iters");
}

TEST_CASE("exact poses make refinement a no-op") {
  const TrialSet set = testing::small_trial(PrimitiveKind::kCylinder, 400);
  const std::vector<SourceView> views = testing::encoded_views(set, false);
  const RenderResult r = render_nol(views, set.object.mesh, set.camera, set.target_pose);
  REQUIRE(r.rendering.same_shape(r.initial_rendering));
  double worst = 0.0;
  for (std::size_t i = 0; i < r.rendering.values().size(); ++i) {
    worst = std::max(worst, std::abs(r.rendering.values()[i] - r.initial_rendering.values()[i]));
  }
  CHECK(worst <= 1e-6);
  CHECK(r.traces.size() == views.size());
  CHECK(r.refined_poses.size() == views.size());
}

TEST_CASE("render without refinement keeps the annotated poses") {
  const TrialSet set = testing::small_trial(PrimitiveKind::kBox, 401, 0.01, 0.05, 3);
  const std::vector<SourceView> views = set.source_views(true);
  RenderOptions opts;
  opts.refine_poses = false;
  const RenderResult r = render_nol(views, set.object.mesh, set.camera, set.target_pose, opts);
  CHECK(r.rendering == r.initial_rendering);
  CHECK(r.union_mask == r.initial_mask);
  CHECK(r.union_mask.count() > 0);

  CHECK_THROWS_AS(render_nol(std::span<const SourceView>{}, set.object.mesh, set.camera, set.target_pose), InputError);
  std::vector<SourceView> nine(9, views[0]);
  CHECK_THROWS_AS(render_nol(nine, set.object.mesh, set.camera, set.target_pose), InputError);
}

TEST_CASE("render is independent of worker count") {
  const TrialSet set = testing::small_trial(PrimitiveKind::kBox, 402, 0.01, 0.05, 4);
  const std::vector<SourceView> views = set.source_views(true);
  RenderOptions one, four;
  four.workers = 4;
  const RenderResult a = render_nol(views, set.object.mesh, set.camera, set.target_pose, one);
  const RenderResult b = render_nol(views, set.object.mesh, set.camera, set.target_pose, four);
  CHECK(a.rendering == b.rendering);
  CHECK(a.refined_poses == b.refined_poses);
}
