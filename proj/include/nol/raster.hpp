#pragma once

#include <array>
#include <memory>
#include <vector>

#include "nol/geometry.hpp"
#include "nol/image.hpp"

namespace nol {

/// Channel layout of an encoded source map.
inline constexpr int kColorChannels = 3;
inline constexpr int kFaceAngleChannel = 3;
inline constexpr int kPyramidFirstChannel = 4;
inline constexpr int kPyramidChannels = 13;
inline constexpr int kFeatureChannels = kPyramidFirstChannel + kPyramidChannels;  // 17

/// Output of the fragment stage: nearest face per pixel with
/// perspective-correct barycentrics.
struct FragmentBuffer {
  int width = 0;
  int height = 0;
  std::vector<int> face;                     // -1 where uncovered
  std::vector<std::array<double, 3>> bary;   // perspective-correct weights
  std::vector<double> depth;                 // camera-frame z; +inf where uncovered

  bool covered(int row, int col) const { return face[index(row, col)] >= 0; }
  std::size_t index(int row, int col) const { return static_cast<std::size_t>(row) * width + col; }
  Mask coverage() const;
  bool operator==(const FragmentBuffer&) const = default;
};

/// Z-buffered rasterization sampling pixel centers at integer coordinates.
/// Faces with any vertex at depth <= kMinDepth are culled whole. Depth ties
/// keep the lower face index.
FragmentBuffer rasterize(const TriangleMesh& mesh, const RigidPose& pose, const Camera& camera);

/// Object-frame surface point of a covered fragment.
Vec3 fragment_point(const TriangleMesh& mesh, const FragmentBuffer& fragments, std::size_t pixel);

/// Sub-pixel depth lookup: intersects the ray through (u, v) with the plane
/// of the face covering the nearest pixel. Returns +inf where nothing is
/// rendered.
class DepthProbe {
 public:
  DepthProbe(const TriangleMesh& mesh, const RigidPose& pose, const Camera& camera);
  DepthProbe(const TriangleMesh& mesh, const RigidPose& pose, const Camera& camera, FragmentBuffer fragments);

  double depth_at(double u, double v) const;
  const FragmentBuffer& fragments() const { return fragments_; }

 private:
  Camera camera_;
  FragmentBuffer fragments_;
  // Camera-frame plane per face: n . x = d
  std::vector<Vec3> plane_normals_;
  std::vector<double> plane_offsets_;
};

/// One posed observation of the object.
struct SourceView {
  Image image;   // H x W x 3, [0, 1]
  Mask mask;     // object mask
  RigidPose pose;
  /// Encoded features; filled by encode_features / with_features. Shared so
  /// copies of a view stay cheap.
  std::shared_ptr<const FeatureMap> features;

  /// Throws InputError on mismatched dimensions.
  void validate() const;
};

/// 17-channel encoding: color (0-2), face angle at the view's pose (3), fixed
/// multi-scale pyramid (4-16). All pixels are valid.
FeatureMap encode_features(const SourceView& view, const TriangleMesh& mesh, const Camera& camera);

/// Copy of `view` with `features` computed if missing.
SourceView with_features(SourceView view, const TriangleMesh& mesh, const Camera& camera);

/// Target-side geometry shared by every projection at one target pose.
struct TargetGeometry {
  RigidPose pose;
  FragmentBuffer fragments;
  std::vector<Vec3> points;        // object-frame surface point per pixel (covered only)
  Mask interior;                   // covered, away from silhouettes and occlusion edges
};

TargetGeometry prepare_target(const TriangleMesh& mesh, const RigidPose& target_pose, const Camera& camera);

/// Feature map of one source view re-rendered at the target pose.
struct ProjectedMap {
  FeatureMap features;
  int source_index = 0;
  /// Source-image coordinates sampled for each valid pixel.
  std::vector<std::array<double, 2>> source_uv;

  const Mask& valid() const { return features.valid; }
};

ProjectedMap project_view(const SourceView& view, const TriangleMesh& mesh, const Camera& camera,
                          const TargetGeometry& target, int source_index = 0,
                          double visibility_epsilon = kVisibilityEpsilon, bool require_mask = true);
ProjectedMap project_view(const SourceView& view, const TriangleMesh& mesh, const Camera& camera,
                          const RigidPose& target_pose, int source_index = 0);

struct PoseGradient {
  PoseDelta delta;
  /// No pixel contributed.
  bool starved = false;
  int pixels_used = 0;
};

/// dE/d(pose) of the source view for a per pixel-channel residual dE/dP.
/// Sums over pixels where the residual map is valid, the projection is valid
/// and the target pixel is interior.
PoseGradient pose_gradient(const SourceView& view, const TriangleMesh& mesh, const Camera& camera,
                           const TargetGeometry& target, const ProjectedMap& projected, const FeatureMap& residual);
PoseGradient pose_gradient(const SourceView& view, const TriangleMesh& mesh, const Camera& camera,
                           const RigidPose& target_pose, const FeatureMap& residual);

/// Bilinear sample of all channels at (u, v); the caller guarantees
/// 0 <= u <= W-1 and 0 <= v <= H-1.
void sample_bilinear(const Image& image, double u, double v, double* out);

}  // namespace nol
