#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nol/geometry.hpp"

namespace nol {

struct FrameRecord {
  std::int64_t id = 0;
  RigidPose pose;
  std::vector<int> visible;       // sorted vertex indices
  double visibility_fraction = 0.0;
};

/// Builds a record with the visible-vertex set computed from the mesh.
FrameRecord make_frame_record(std::int64_t id, const RigidPose& pose, const TriangleMesh& mesh,
                              const Camera& camera);

struct DiversityOptions {
  double trans_mm = 300.0;
  double rot_deg = 45.0;
  int max_count = 16;
  std::uint64_t seed = 0;
};

/// Random pick-then-prune. A remaining frame is pruned when it is closer
/// than both thresholds to the picked frame.
std::vector<FrameRecord> diversity_sample(std::span<const FrameRecord> frames, const DiversityOptions& options = {});

/// Greedy max coverage of visible vertices; ties go to the lower frame id;
/// stops when no frame adds a vertex. `restrict_to`, when non-empty, limits
/// the vertices that count (sorted).
std::vector<FrameRecord> greedy_visibility_sample(std::span<const FrameRecord> frames,
                                                  std::span<const int> restrict_to = {});

struct PoseGrid {
  double azimuth_step_deg = 5.0;
  double elevation_step_deg = 5.0;
  double radius = 1.0;
  std::vector<double> azimuths_deg;     // per pose
  std::vector<double> elevations_deg;   // per pose
  std::vector<RigidPose> poses;
};

/// Azimuth in {0, step, ..., 360 - step}, elevation in {step, ..., 90};
/// cameras at `radius` looking at the origin with +z up.
PoseGrid hemisphere_poses(double az_step_deg = 5.0, double el_step_deg = 5.0, double radius = 1.0);

struct InplaneVariant {
  double angle_deg = 0.0;
  RigidPose pose;
};

/// Roll about the optical axis for angles min, min+step, ..., max.
std::vector<InplaneVariant> inplane_rotations(const RigidPose& pose, double min_deg = -45.0, double max_deg = 45.0,
                                              double step_deg = 15.0);
RigidPose roll_pose(const RigidPose& pose, double angle_rad);

struct ViewSelection {
  std::vector<FrameRecord> views;
  /// No candidate sees any target-visible vertex.
  bool empty_warning = false;
};

ViewSelection select_views_for_target(const RigidPose& target_pose, std::span<const FrameRecord> candidates,
                                      const TriangleMesh& mesh, const Camera& camera, int k = 6);

}  // namespace nol
