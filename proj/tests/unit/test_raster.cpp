#include <algorithm>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "nol/error.hpp"
#include "nol/pyramid.hpp"
#include "nol/raster.hpp"
#include "nol/rng.hpp"
#include "scenes.hpp"

using namespace nol;

namespace {

Camera small_camera() {
  Camera cam;
  cam.fx = cam.fy = 100.0;
  cam.cx = cam.cy = 31.5;
  cam.width = cam.height = 64;
  return cam;
}

Vec3 back_project(const Camera& cam, double u, double v, double z) {
  return {(u - cam.cx) / cam.fx * z, (v - cam.cy) / cam.fy * z, z};
}

double edge(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

// Ray through pixel (u, v) against triangle (a, b, c) in the camera frame.
bool ray_hit(const Camera& cam, double u, double v, const Vec3& a, const Vec3& b, const Vec3& c, double& depth,
             double& min_bary) {
  const Vec3 dir((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 pv = dir.cross(e2);
  const double det = e1.dot(pv);
  if (std::abs(det) < 1e-15) return false;
  const Vec3 tv = -a;
  const double w1 = tv.dot(pv) / det;
  const Vec3 qv = tv.cross(e1);
  const double w2 = dir.dot(qv) / det;
  depth = e2.dot(qv) / det;
  min_bary = std::min({w1, w2, 1.0 - w1 - w2});
  return min_bary >= 0.0 && depth > 0.0;
}

}  // namespace

TEST_CASE("coverage matches the half-plane oracle") {
  const Camera cam = small_camera();
  const double us[3] = {5.3, 57.1, 20.6}, vs[3] = {8.2, 25.7, 55.9}, zs[3] = {1.0, 1.5, 0.8};
  std::vector<Vec3> verts;
  for (int i = 0; i < 3; ++i) verts.push_back(back_project(cam, us[i], vs[i], zs[i]));
  const TriangleMesh mesh(verts, {{0, 1, 2}});
  const FragmentBuffer frags = rasterize(mesh, RigidPose::identity(), cam);
  int inside = 0;
  for (int r = 0; r < cam.height; ++r) {
    for (int c = 0; c < cam.width; ++c) {
      const double e0 = edge(us[0], vs[0], us[1], vs[1], c, r);
      const double e1 = edge(us[1], vs[1], us[2], vs[2], c, r);
      const double e2 = edge(us[2], vs[2], us[0], vs[0], c, r);
      const double lo = std::min({e0, e1, e2}), hi = std::max({e0, e1, e2});
      const bool in = (lo >= 0.0) || (hi <= 0.0);
      if (std::min(std::abs(e0), std::min(std::abs(e1), std::abs(e2))) < 1e-6) continue;
      CHECK(frags.covered(r, c) == in);
      inside += in;
    }
  }
  CHECK(inside > 500);
}

TEST_CASE("perspective-correct barycentrics") {
  const Camera cam = small_camera();
  std::vector<Vec3> verts = {back_project(cam, 3, 4, 0.6), back_project(cam, 60, 10, 2.0),
                             back_project(cam, 30, 60, 1.1)};
  const TriangleMesh mesh(verts, {{0, 1, 2}});
  const FragmentBuffer frags = rasterize(mesh, RigidPose::identity(), cam);
  int n = 0;
  for (int r = 0; r < cam.height; ++r) {
    for (int c = 0; c < cam.width; ++c) {
      const std::size_t p = frags.index(r, c);
      if (!frags.covered(r, c)) {
        CHECK(std::isinf(frags.depth[p]));
        continue;
      }
      const auto& b = frags.bary[p];
      CHECK(b[0] + b[1] + b[2] == doctest::Approx(1.0).epsilon(1e-12));
      const Vec3 x = fragment_point(mesh, frags, p);
      const Projection proj = project_point(cam, x);
      CHECK(std::abs(proj.u - c) < 1e-9);
      CHECK(std::abs(proj.v - r) < 1e-9);
      CHECK(std::abs(x.z() - frags.depth[p]) < 1e-12);
      ++n;
    }
  }
  CHECK(n > 500);
}

TEST_CASE("z-buffer matches brute-force ray casting") {
  const Camera cam = small_camera();
  Rng rng(5);
  std::vector<Vec3> verts;
  std::vector<TriangleMesh::Face> faces;
  for (int f = 0; f < 25; ++f) {
    for (int k = 0; k < 3; ++k) {
      verts.push_back(back_project(cam, rng.uniform(-10, 74), rng.uniform(-10, 74), rng.uniform(0.5, 2.0)));
    }
    faces.push_back({3 * f, 3 * f + 1, 3 * f + 2});
  }
  const TriangleMesh mesh(verts, faces);
  const RigidPose pose = RigidPose::identity();
  const FragmentBuffer frags = rasterize(mesh, pose, cam);
  int compared = 0;
  for (int r = 0; r < cam.height; ++r) {
    for (int c = 0; c < cam.width; ++c) {
      double best = std::numeric_limits<double>::infinity(), second = best;
      int best_face = -1;
      bool ambiguous = false;
      for (int f = 0; f < 25; ++f) {
        double depth, mb;
        const Vec3 &a = verts[3 * f], &b = verts[3 * f + 1], &cc = verts[3 * f + 2];
        const bool hit = ray_hit(cam, c, r, a, b, cc, depth, mb);
        if (std::abs(mb) < 1e-7) ambiguous = true;
        if (!hit) continue;
        if (depth < best) {
          second = best;
          best = depth;
          best_face = f;
        } else {
          second = std::min(second, depth);
        }
      }
      if (ambiguous || second - best < 1e-9) continue;
      const std::size_t p = frags.index(r, c);
      CHECK(frags.face[p] == best_face);
      if (best_face >= 0) CHECK(std::abs(frags.depth[p] - best) < 1e-9);
      ++compared;
    }
  }
  CHECK(compared > 3000);
}

TEST_CASE("depth ties keep the lower face index") {
  const Camera cam = small_camera();
  std::vector<Vec3> verts = {back_project(cam, 5, 5, 1.0), back_project(cam, 60, 5, 1.0),
                             back_project(cam, 30, 60, 1.0)};
  const TriangleMesh mesh(verts, {{0, 1, 2}, {0, 1, 2}, {0, 1, 2}});
  const FragmentBuffer frags = rasterize(mesh, RigidPose::identity(), cam);
  int covered = 0;
  for (int f : frags.face) {
    if (f < 0) continue;
    CHECK(f == 0);
    ++covered;
  }
  CHECK(covered > 500);
}

TEST_CASE("faces crossing the camera plane are culled") {
  const Camera cam = small_camera();
  const TriangleMesh mesh({Vec3(-1, -1, -0.5), Vec3(1, -1, 1), Vec3(0, 1, 1)}, {{0, 1, 2}});
  const FragmentBuffer frags = rasterize(mesh, RigidPose::identity(), cam);
  CHECK(frags.coverage().count() == 0);
}

TEST_CASE("depth probe interpolates the face plane") {
  const Camera cam = small_camera();
  const TriangleMesh plane = testing::grid_mesh(4, 0.2, 0.0);
  const RigidPose pose(euler_to_rotation({0.3, -0.2, 0.1}), Vec3(0.0, 0.0, 0.8));
  const DepthProbe probe(plane, pose, cam);
  const Vec3 n = pose.rotation().col(2);
  const double d = n.dot(pose.translation());
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const double u = rng.uniform(20, 44), v = rng.uniform(20, 44);
    const Vec3 dir((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0);
    CHECK(probe.depth_at(u, v) == doctest::Approx(d / n.dot(dir)).epsilon(1e-12));
  }
  const RigidPose far(Mat3::Identity(), Vec3(5.0, 0, 0.8));
  CHECK(std::isinf(DepthProbe(plane, far, cam).depth_at(31.5, 31.5)));
}

TEST_CASE("bilinear sampling") {
  Image img(2, 2, 2);
  img.at(0, 0, 0) = 0; img.at(0, 1, 0) = 1; img.at(1, 0, 0) = 2; img.at(1, 1, 0) = 3;
  img.at(0, 0, 1) = 4; img.at(0, 1, 1) = 4; img.at(1, 0, 1) = 4; img.at(1, 1, 1) = 4;
  double out[2];
  sample_bilinear(img, 1.0, 0.0, out);
  CHECK(out[0] == 1.0);
  sample_bilinear(img, 0.5, 0.5, out);
  CHECK(out[0] == doctest::Approx(1.5));
  CHECK(out[1] == doctest::Approx(4.0));
  sample_bilinear(img, 0.25, 1.0, out);
  CHECK(out[0] == doctest::Approx(2.25));
  sample_bilinear(img, 1.0, 1.0, out);
  CHECK(out[0] == 3.0);
}

TEST_CASE("pyramid responds to a step edge") {
  Image img(64, 64, 3, 0.2);
  for (int r = 0; r < 64; ++r) {
    for (int c = 32; c < 64; ++c) {
      for (int ch = 0; ch < 3; ++ch) img.at(r, c, ch) = 0.8;
    }
  }
  const Image pyr = pyramid_features(img);
  REQUIRE(pyr.channels() == kPyramidChannels);
  CHECK(pyr.at(32, 31, 3) > 0.05);
  CHECK(std::abs(pyr.at(32, 4, 3)) < 1e-9);
  CHECK(std::abs(pyr.at(32, 60, 3)) < 1e-9);
  CHECK(pyr.at(32, 4, 0) == doctest::Approx(0.2));
  CHECK(pyr.at(32, 60, 0) == doctest::Approx(0.8));

  const Image flat = pyramid_features(Image(32, 32, 3, 0.5));
  for (int ch : {3, 5, 6, 8, 9, 11, 12}) {
    for (int r = 0; r < 32; ++r) CHECK(std::abs(flat.at(r, 7, ch)) < 1e-12);
  }
  for (int ch : {0, 1, 2}) CHECK(flat.at(10, 10, ch) == doctest::Approx(0.5));
}

TEST_CASE("encoded features") {
  const TrialSet set = testing::small_trial(PrimitiveKind::kBox, 3);
  const SourceView view = set.source_views(false)[0];
  const FeatureMap f = encode_features(view, set.object.mesh, set.camera);
  CHECK(f.channels() == kFeatureChannels);
  CHECK(f.valid.count() == f.valid.pixel_count());
  const FragmentBuffer frags = rasterize(set.object.mesh, view.pose, set.camera);
  for (std::size_t p = 0; p < view.image.pixel_count(); ++p) {
    for (int c = 0; c < 3; ++c) CHECK(f.values.pixel(p)[c] == view.image.pixel(p)[c]);
    const double angle = f.values.pixel(p)[kFaceAngleChannel];
    if (frags.face[p] < 0) {
      CHECK(angle == 0.0);
    } else {
      CHECK(angle <= 1.0);
      CHECK(angle >= -1.0);
    }
  }
  SourceView bad = view;
  bad.mask = Mask(3, 3);
  CHECK_THROWS_AS(bad.validate(), InputError);
  CHECK(with_features(view, set.object.mesh, set.camera).features);
}

TEST_CASE("identity reprojection reproduces the source") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const TrialSet set = testing::small_trial(seed % 2 ? PrimitiveKind::kCylinder : PrimitiveKind::kBox, seed);
    const SourceView view = testing::encoded_views(set, false)[0];
    const TargetGeometry target = prepare_target(set.object.mesh, view.pose, set.camera);
    const ProjectedMap proj = project_view(view, set.object.mesh, set.camera, target);
    double sum = 0.0;
    int n = 0;
    for (std::size_t p = 0; p < view.image.pixel_count(); ++p) {
      if (!target.interior[p] || !proj.valid()[p]) continue;
      for (int c = 0; c < 3; ++c) sum += std::abs(proj.features.values.pixel(p)[c] - view.image.pixel(p)[c]);
      ++n;
    }
    REQUIRE(n > 200);
    CHECK(sum / (3.0 * n) < 1e-3);
  }
}

TEST_CASE("reprojection to a rotated target matches ground truth") {
  const TrialSet set = testing::small_trial(PrimitiveKind::kBox, 21);
  const SourceView view = testing::encoded_views(set, false)[0];
  const RigidPose target_pose = view.pose * RigidPose(euler_to_rotation({0.0, 0.0, 10.0 * 3.14159265358979 / 180}),
                                                      Vec3::Zero());
  const TargetGeometry target = prepare_target(set.object.mesh, target_pose, set.camera);
  const ProjectedMap proj = project_view(view, set.object.mesh, set.camera, target);
  const GroundTruthView gt = render_gt_view(set.object, target_pose, set.camera,
                                            target_pose.rotation() * set.light_dir_object, set.ambient);
  double sum = 0.0;
  int n = 0;
  for (std::size_t p = 0; p < gt.image.pixel_count(); ++p) {
    if (!target.interior[p] || !proj.valid()[p]) continue;
    for (int c = 0; c < 3; ++c) sum += std::abs(proj.features.values.pixel(p)[c] - gt.image.pixel(p)[c]);
    ++n;
  }
  REQUIRE(n > 200);
  CHECK(sum / (3.0 * n) < 0.02);
}

TEST_CASE("projection validity") {
  const TrialSet set = testing::small_trial(PrimitiveKind::kBox, 4);
  const SourceView view = testing::encoded_views(set, false)[0];
  const ProjectedMap proj = project_view(view, set.object.mesh, set.camera, set.target_pose);
  const TargetGeometry target = prepare_target(set.object.mesh, set.target_pose, set.camera);
  std::size_t valid = 0;
  for (std::size_t p = 0; p < proj.valid().pixel_count(); ++p) {
    if (!proj.valid()[p]) {
      for (double x : proj.features.values.pixel(p)) CHECK(x == 0.0);
      continue;
    }
    ++valid;
    CHECK(target.fragments.face[p] >= 0);
    const auto uv = proj.source_uv[p];
    CHECK(view.mask(static_cast<int>(std::lround(uv[1])), static_cast<int>(std::lround(uv[0]))));
  }
  CHECK(valid > 0);
  const ProjectedMap loose = project_view(view, set.object.mesh, set.camera, target, 0, kVisibilityEpsilon, false);
  CHECK(loose.valid().count() >= proj.valid().count());
}

TEST_CASE("zero residual gives zero gradient") {
  const TrialSet set = testing::small_trial(PrimitiveKind::kCylinder, 5);
  const SourceView view = testing::encoded_views(set, false)[0];
  FeatureMap residual(set.camera.height, set.camera.width, kFeatureChannels);
  residual.valid = Mask(set.camera.height, set.camera.width, true);
  const PoseGradient g = pose_gradient(view, set.object.mesh, set.camera, set.target_pose, residual);
  CHECK(g.delta.is_zero());
  CHECK(g.pixels_used > 0);
}
