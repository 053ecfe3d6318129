#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace nol {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Depth below which a camera-frame point counts as behind the camera.
inline constexpr double kMinDepth = 1e-6;
/// Default depth-buffer tolerance used by visibility tests (meters).
inline constexpr double kVisibilityEpsilon = 3e-3;

/// Indexed triangle mesh in object coordinates (meters).
///
/// Construction validates the index buffer, recomputes area-weighted vertex
/// normals and the exact (all-pairs) diameter.
class TriangleMesh {
 public:
  using Face = std::array<int, 3>;

  TriangleMesh() = default;
  TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces);

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<Vec3>& vertex_normals() const { return vertex_normals_; }
  /// Unit geometric normal per face, from the counter-clockwise winding.
  const std::vector<Vec3>& face_normals() const { return face_normals_; }
  double diameter() const { return diameter_; }
  Vec3 centroid() const;

  bool faces_share_vertex(int a, int b) const;

 private:
  std::vector<Vec3> vertices_;
  std::vector<Face> faces_;
  std::vector<Vec3> vertex_normals_;
  std::vector<Vec3> face_normals_;
  double diameter_ = 0.0;
};

/// Rigid transform mapping object coordinates into the camera frame:
/// x_cam = rotation * x_obj + translation.
class RigidPose {
 public:
  RigidPose() = default;
  /// Throws InputError unless `rotation` is in SO(3) within `tolerance`.
  RigidPose(const Mat3& rotation, const Vec3& translation, double tolerance = 1e-9);

  static RigidPose identity() { return {}; }
  /// Projects a nearly-orthonormal matrix onto SO(3) (SVD); used for poses
  /// read from text files with truncated digits.
  static RigidPose from_approximate(const Mat3& rotation, const Vec3& translation);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  /// (this * other)(p) = this(other(p))
  RigidPose operator*(const RigidPose& other) const;
  RigidPose inverse() const;
  /// Camera center expressed in object coordinates.
  Vec3 camera_center() const { return -rotation_.transpose() * translation_; }

  bool operator==(const RigidPose&) const = default;

 private:
  Mat3 rotation_ = Mat3::Identity();
  Vec3 translation_ = Vec3::Zero();
};

/// Fixed-axis X-then-Y-then-Z angles: R = Rz(rz) * Ry(ry) * Rx(rx).
struct EulerAngles {
  double rx = 0.0;
  double ry = 0.0;
  double rz = 0.0;

  Vec3 as_vector() const { return {rx, ry, rz}; }
  static EulerAngles from_vector(const Vec3& v) { return {v.x(), v.y(), v.z()}; }
};

struct EulerDecomposition {
  EulerAngles angles;
  /// Set at gimbal lock (|cos ry| ~ 0); rz is then forced to 0.
  bool degenerate = false;
};

/// Pinhole intrinsics; pixel centers sit at integer coordinates.
struct Camera {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;

  /// Throws InputError if the intrinsics are not usable.
  void validate() const;
  /// Square image of `size` pixels with focal length `focal_scale * size`.
  static Camera centered(int size, double focal_scale);
  /// Same field of view, resolution scaled to `size`.
  Camera resized(int width, int height) const;

  bool operator==(const Camera&) const = default;
};

/// Gradient or step over the six pose parameters: translation (camera frame)
/// and Euler angles of a rotation increment applied in the object frame.
struct PoseDelta {
  Vec3 d_translation = Vec3::Zero();
  Vec3 d_euler = Vec3::Zero();

  bool is_finite() const { return d_translation.allFinite() && d_euler.allFinite(); }
  bool is_zero() const { return d_translation.isZero(0.0) && d_euler.isZero(0.0); }
};

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
  bool valid = false;
};

struct PoseDistance {
  double translation_mm = 0.0;
  double rotation_deg = 0.0;
};

Mat3 euler_to_rotation(const EulerAngles& e);
EulerDecomposition rotation_to_euler(const Mat3& r);

/// Pose with the rotation replaced by R * euler_to_rotation(increment) and
/// the translation offset by `d_translation`.
RigidPose apply_local_increment(const RigidPose& pose, const Vec3& d_translation, const Vec3& d_euler);

/// Max deviation of R from SO(3): max(|R^T R - I|_inf, |det R - 1|).
double so3_error(const Mat3& r);

Projection project_point(const Camera& camera, const Vec3& camera_point);
std::vector<Projection> project(const Camera& camera, const RigidPose& pose, std::span<const Vec3> points);

/// Cosine between each face normal and the camera's viewing direction
/// (optical axis); front-facing faces are positive.
std::vector<double> face_view_angles(const TriangleMesh& mesh, const RigidPose& pose, const Camera& camera);

/// Sorted indices of vertices that project inside the image and are not
/// occluded by more than `epsilon` (meters).
std::vector<int> visible_vertices(const TriangleMesh& mesh, const RigidPose& pose, const Camera& camera,
                                  double epsilon = kVisibilityEpsilon);

PoseDistance pose_distance(const RigidPose& a, const RigidPose& b);

/// Geodesic angle of R_a R_b^T in radians.
double rotation_angle(const Mat3& a, const Mat3& b);

/// Uniform translation offsets in [-trans_range, trans_range] per axis and a
/// rotation increment with Euler angles uniform in [-rot_range, rot_range],
/// composed in the object frame.
RigidPose perturb_pose(const RigidPose& pose, double trans_range_m, double rot_range_rad, std::uint64_t seed);

/// Camera pose looking at `target` from `eye` (object frame), image y axis
/// pointing along -`up` as far as possible.
RigidPose look_at(const Vec3& eye, const Vec3& target, const Vec3& up = Vec3::UnitZ());

}  // namespace nol
