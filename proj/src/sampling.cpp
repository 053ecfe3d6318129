#include "nol/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nol/error.hpp"
#include "nol/rng.hpp"

namespace nol {
namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

// Count of range steps; throws unless `step` divides the span.
int step_count(double span, double step, const char* what) {
  if (!(step > 0.0)) throw InputError(std::string(what) + " step must be positive");
  const double n = span / step;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-9 * std::max(1.0, n)) {
    throw InputError(std::string(what) + " step must divide its range");
  }
  return static_cast<int>(rounded);
}

}  // namespace

FrameRecord make_frame_record(std::int64_t id, const RigidPose& pose, const TriangleMesh& mesh,
                              const Camera& camera) {
  FrameRecord r;
  r.id = id;
  r.pose = pose;
  r.visible = visible_vertices(mesh, pose, camera);
  r.visibility_fraction = static_cast<double>(r.visible.size()) / static_cast<double>(mesh.vertices().size());
  return r;
}

std::vector<FrameRecord> diversity_sample(std::span<const FrameRecord> frames, const DiversityOptions& options) {
  if (frames.empty()) throw InputError("no frames to sample");
  std::vector<std::size_t> pool(frames.size());
  for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
  Rng rng(options.seed);
  std::vector<FrameRecord> selected;
  while (!pool.empty() && static_cast<int>(selected.size()) < options.max_count) {
    const std::size_t pick = pool[rng.below(pool.size())];
    const FrameRecord& chosen = frames[pick];
    selected.push_back(chosen);
    std::erase_if(pool, [&](std::size_t i) {
      if (i == pick) return true;
      const PoseDistance d = pose_distance(chosen.pose, frames[i].pose);
      return d.translation_mm < options.trans_mm && d.rotation_deg < options.rot_deg;
    });
  }
  return selected;
}

std::vector<FrameRecord> greedy_visibility_sample(std::span<const FrameRecord> frames,
                                                  std::span<const int> restrict_to) {
  std::vector<FrameRecord> selected;
  if (frames.empty()) return selected;
  int max_vertex = 0;
  for (const FrameRecord& f : frames) {
    if (!f.visible.empty()) max_vertex = std::max(max_vertex, f.visible.back());
  }
  for (int v : restrict_to) max_vertex = std::max(max_vertex, v);
  std::vector<char> counts(static_cast<std::size_t>(max_vertex) + 1, restrict_to.empty() ? 1 : 0);
  for (int v : restrict_to) counts[v] = 1;  // eligible
  std::vector<char> seen(counts.size(), 0);
  std::vector<char> used(frames.size(), 0);

  while (true) {
    int best_gain = 0;
    std::size_t best = frames.size();
    for (std::size_t i = 0; i < frames.size(); ++i) {
      if (used[i]) continue;
      int gain = 0;
      for (int v : frames[i].visible) gain += (counts[v] && !seen[v]) ? 1 : 0;
      if (gain > best_gain || (gain == best_gain && gain > 0 && best < frames.size() && frames[i].id < frames[best].id)) {
        best_gain = gain;
        best = i;
      }
    }
    if (best_gain == 0) break;
    used[best] = 1;
    for (int v : frames[best].visible) seen[v] = 1;
    selected.push_back(frames[best]);
  }
  return selected;
}

PoseGrid hemisphere_poses(double az_step_deg, double el_step_deg, double radius) {
  if (!(radius > 0.0)) throw InputError("hemisphere radius must be positive");
  const int n_az = step_count(360.0, az_step_deg, "azimuth");
  const int n_el = step_count(90.0, el_step_deg, "elevation");
  PoseGrid grid;
  grid.azimuth_step_deg = az_step_deg;
  grid.elevation_step_deg = el_step_deg;
  grid.radius = radius;
  for (int e = 1; e <= n_el; ++e) {
    const double el = e * el_step_deg;
    for (int a = 0; a < n_az; ++a) {
      const double az = a * az_step_deg;
      const double ce = std::cos(el * kDeg), se = std::sin(el * kDeg);
      const double ca = std::cos(az * kDeg), sa = std::sin(az * kDeg);
      const Vec3 eye = radius * Vec3(ce * ca, ce * sa, se);
      const Vec3 forward = -eye / radius;
      Vec3 right = forward.cross(Vec3::UnitZ());
      // At the pole, continue the azimuth-dependent limit of the right axis.
      right = right.norm() < 1e-9 ? Vec3(-sa, ca, 0.0) : Vec3(right.normalized());
      const Vec3 down = forward.cross(right);
      Mat3 rotation;
      rotation.row(0) = right.transpose();
      rotation.row(1) = down.transpose();
      rotation.row(2) = forward.transpose();
      grid.poses.emplace_back(rotation, -(rotation * eye), 1e-9);
      grid.azimuths_deg.push_back(az);
      grid.elevations_deg.push_back(el);
    }
  }
  return grid;
}

RigidPose roll_pose(const RigidPose& pose, double angle_rad) {
  const Mat3 roll = euler_to_rotation({0.0, 0.0, angle_rad});
  return RigidPose(roll * pose.rotation(), roll * pose.translation(), 1e-6);
}

std::vector<InplaneVariant> inplane_rotations(const RigidPose& pose, double min_deg, double max_deg, double step_deg) {
  if (max_deg < min_deg) throw InputError("in-plane range is empty");
  const int n = step_count(max_deg - min_deg, step_deg, "in-plane");
  std::vector<InplaneVariant> out;
  for (int i = 0; i <= n; ++i) {
    const double angle = min_deg + i * step_deg;
    out.push_back({angle, angle == 0.0 ? pose : roll_pose(pose, angle * kDeg)});
  }
  return out;
}

ViewSelection select_views_for_target(const RigidPose& target_pose, std::span<const FrameRecord> candidates,
                                      const TriangleMesh& mesh, const Camera& camera, int k) {
  if (candidates.empty()) throw InputError("no candidate views");
  if (k < 1) throw InputError("view count must be positive");
  const std::vector<int> target_visible = visible_vertices(mesh, target_pose, camera);
  ViewSelection out;
  if (!target_visible.empty()) out.views = greedy_visibility_sample(candidates, target_visible);
  if (static_cast<int>(out.views.size()) > k) out.views.resize(k);
  out.empty_warning = out.views.empty();
  return out;
}

}  // namespace nol
