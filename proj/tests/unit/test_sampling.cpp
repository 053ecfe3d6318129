#include <cmath>
#include <set>

#include "doctest.h"
#include "nol/error.hpp"
#include "nol/rng.hpp"
#include "nol/sampling.hpp"
#include "nol/scenegen.hpp"

using namespace nol;

namespace {

FrameRecord record(std::int64_t id, std::vector<int> visible) {
  FrameRecord r;
  r.id = id;
  r.visible = std::move(visible);
  return r;
}

std::size_t covered(const std::vector<FrameRecord>& frames) {
  std::set<int> s;
  for (const auto& f : frames) s.insert(f.visible.begin(), f.visible.end());
  return s.size();
}

}  // namespace

TEST_CASE("greedy visibility picks by new coverage") {
  const std::vector<FrameRecord> frames = {record(1, {0, 1, 2}), record(2, {2, 3}), record(3, {1, 2})};
  const auto picked = greedy_visibility_sample(frames);
  REQUIRE(picked.size() == 2);
  CHECK(picked[0].id == 1);
  CHECK(picked[1].id == 2);

  const std::vector<FrameRecord> tie = {record(9, {0, 1}), record(4, {2, 3}), record(7, {0, 1, 2, 3, 4})};
  const auto t = greedy_visibility_sample(tie);
  REQUIRE(t.size() == 1);
  CHECK(t[0].id == 7);

  const std::vector<FrameRecord> even = {record(9, {0, 1}), record(4, {2, 3})};
  const auto e = greedy_visibility_sample(even);
  REQUIRE(e.size() == 2);
  CHECK(e[0].id == 4);

  const std::vector<int> restrict_to = {3};
  const auto r = greedy_visibility_sample(frames, restrict_to);
  REQUIRE(r.size() == 1);
  CHECK(r[0].id == 2);
}

TEST_CASE("greedy coverage matches an exhaustive union") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<FrameRecord> frames;
    for (int i = 0; i < 12; ++i) {
      std::vector<int> vis;
      for (int v = 0; v < 60; ++v) {
        if (rng.uniform() < 0.15) vis.push_back(v);
      }
      frames.push_back(record(i, vis));
    }
    const auto picked = greedy_visibility_sample(frames);
    CHECK(covered(picked) == covered(frames));
    // Every pick adds something.
    std::set<int> seen;
    for (const auto& f : picked) {
      const std::size_t before = seen.size();
      seen.insert(f.visible.begin(), f.visible.end());
      CHECK(seen.size() > before);
    }
  }
}

TEST_CASE("diversity sampling") {
  const RigidPose base = look_at(Vec3(0.5, 0.2, 0.4), Vec3::Zero());
  std::vector<FrameRecord> dupes;
  for (int i = 0; i < 10; ++i) dupes.push_back({i, base, {}, 0.0});
  CHECK(diversity_sample(dupes).size() == 1);

  const PoseGrid grid = hemisphere_poses(10.0, 10.0, 0.6);
  std::vector<FrameRecord> frames;
  for (std::size_t i = 0; i < grid.poses.size(); ++i) frames.push_back({static_cast<std::int64_t>(i), grid.poses[i], {}, 0.0});
  DiversityOptions opts;
  opts.trans_mm = 1.0;
  opts.rot_deg = 1.0;
  opts.seed = 3;
  const auto many = diversity_sample(frames, opts);
  CHECK(many.size() == 16);

  opts.trans_mm = 300.0;
  opts.rot_deg = 45.0;
  const auto picked = diversity_sample(frames, opts);
  CHECK(picked.size() <= 16);
  CHECK(picked.size() >= 2);
  for (std::size_t i = 0; i < picked.size(); ++i) {
    for (std::size_t j = i + 1; j < picked.size(); ++j) {
      const PoseDistance d = pose_distance(picked[i].pose, picked[j].pose);
      CHECK((d.translation_mm >= 300.0 || d.rotation_deg >= 45.0));
    }
  }
  const auto again = diversity_sample(frames, opts);
  REQUIRE(again.size() == picked.size());
  for (std::size_t i = 0; i < picked.size(); ++i) CHECK(again[i].id == picked[i].id);
  CHECK_THROWS_AS(diversity_sample(std::span<const FrameRecord>{}), InputError);
}

TEST_CASE("hemisphere grid") {
  const PoseGrid grid = hemisphere_poses();
  CHECK(grid.poses.size() == 1296);
  CHECK(hemisphere_poses(90.0, 45.0).poses.size() == 8);
  for (std::size_t i = 0; i < grid.poses.size(); i += 37) {
    const RigidPose& p = grid.poses[i];
    CHECK(p.camera_center().norm() == doctest::Approx(1.0));
    CHECK(p.camera_center().z() > 0.0);
    CHECK(p.apply(Vec3::Zero()).head<2>().norm() < 1e-9);
    CHECK(grid.elevations_deg[i] > 0.0);
    CHECK(grid.elevations_deg[i] <= 90.0);
    CHECK(grid.azimuths_deg[i] < 360.0);
  }
}

TEST_CASE("in-plane variants") {
  const RigidPose base = look_at(Vec3(0.5, 0.2, 0.4), Vec3::Zero());
  const auto variants = inplane_rotations(base);
  REQUIRE(variants.size() == 7);
  CHECK(variants.front().angle_deg == -45.0);
  CHECK(variants.back().angle_deg == 45.0);
  CHECK(variants[3].angle_deg == 0.0);
  CHECK(variants[3].pose == base);
  for (const auto& v : variants) {
    CHECK((v.pose.camera_center() - base.camera_center()).norm() < 1e-12);
    CHECK(rotation_angle(v.pose.rotation(), base.rotation()) ==
          doctest::Approx(std::abs(v.angle_deg) * 3.14159265358979323846 / 180.0));
  }
  CHECK_THROWS_AS(inplane_rotations(base, 10.0, -10.0), InputError);
}

TEST_CASE("per-target view selection") {
  const TriangleMesh mesh = make_primitive(PrimitiveSpec::default_for(PrimitiveKind::kBox));
  const Camera cam = Camera::centered(64, 1.6);
  const PoseGrid grid = hemisphere_poses(30.0, 30.0, 0.45);
  std::vector<FrameRecord> frames;
  for (std::size_t i = 0; i < grid.poses.size(); ++i) {
    frames.push_back(make_frame_record(static_cast<std::int64_t>(i), grid.poses[i], mesh, cam));
  }
  for (const RigidPose& target : {grid.poses[1], look_at(Vec3(0.1, -0.3, 0.3), Vec3::Zero())}) {
    for (int k : {1, 3, 6}) {
      const ViewSelection sel = select_views_for_target(target, frames, mesh, cam, k);
      CHECK_FALSE(sel.empty_warning);
      CHECK(static_cast<int>(sel.views.size()) <= k);
      CHECK_FALSE(sel.views.empty());
    }
  }
  const RigidPose away(Mat3::Identity(), Vec3(0, 0, -1.0));
  CHECK(select_views_for_target(away, frames, mesh, cam).empty_warning);
  CHECK_THROWS_AS(select_views_for_target(grid.poses[0], {}, mesh, cam), InputError);
}

TEST_CASE("frame record visibility") {
  const TriangleMesh mesh = make_primitive(PrimitiveSpec::default_for(PrimitiveKind::kBox));
  const Camera cam = Camera::centered(64, 1.6);
  const FrameRecord r = make_frame_record(5, look_at(Vec3(0.3, 0.3, 0.3), Vec3::Zero()), mesh, cam);
  CHECK(r.id == 5);
  CHECK(r.visible == visible_vertices(mesh, r.pose, cam));
  CHECK(r.visibility_fraction == doctest::Approx(double(r.visible.size()) / mesh.vertices().size()));
}
