#include "nol/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <Eigen/SVD>

#include "nol/error.hpp"
#include "nol/raster.hpp"
#include "nol/rng.hpp"

namespace nol {

TriangleMesh::TriangleMesh(std::vector<Vec3> vertices, std::vector<Face> faces)
    : vertices_(std::move(vertices)), faces_(std::move(faces)) {
  const int n = static_cast<int>(vertices_.size());
  if (n < 3 || faces_.empty()) throw InputError("mesh needs at least 3 vertices and 1 face");
  for (const Vec3& v : vertices_) {
    if (!v.allFinite()) throw InputError("mesh vertex is not finite");
  }
  face_normals_.reserve(faces_.size());
  vertex_normals_.assign(vertices_.size(), Vec3::Zero());
  for (std::size_t f = 0; f < faces_.size(); ++f) {
    const Face& face = faces_[f];
    for (int idx : face) {
      if (idx < 0 || idx >= n) {
        throw InputError("face " + std::to_string(f) + " references vertex " + std::to_string(idx) + " of " +
                         std::to_string(n));
      }
    }
    if (face[0] == face[1] || face[1] == face[2] || face[0] == face[2]) {
      throw InputError("face " + std::to_string(f) + " is degenerate");
    }
    const Vec3 cross = (vertices_[face[1]] - vertices_[face[0]]).cross(vertices_[face[2]] - vertices_[face[0]]);
    const double norm = cross.norm();
    face_normals_.push_back(norm > 0.0 ? Vec3(cross / norm) : Vec3::Zero());
    // Unnormalized cross product weights by area.
    for (int idx : face) vertex_normals_[idx] += cross;
  }
  for (Vec3& normal : vertex_normals_) {
    const double norm = normal.norm();
    normal = norm > 0.0 ? Vec3(normal / norm) : Vec3::UnitZ();
  }
  double max_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) max_sq = std::max(max_sq, (vertices_[i] - vertices_[j]).squaredNorm());
  }
  diameter_ = std::sqrt(max_sq);
  if (!(diameter_ > 0.0)) throw InputError("mesh has zero diameter");
}

Vec3 TriangleMesh::centroid() const {
  Vec3 sum = Vec3::Zero();
  for (const Vec3& v : vertices_) sum += v;
  return sum / static_cast<double>(vertices_.size());
}

bool TriangleMesh::faces_share_vertex(int a, int b) const {
  if (a == b) return true;
  for (int i : faces_[a]) {
    for (int j : faces_[b]) {
      if (i == j) return true;
    }
  }
  return false;
}

double so3_error(const Mat3& r) {
  const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
  return std::max(ortho, std::abs(r.determinant() - 1.0));
}

RigidPose::RigidPose(const Mat3& rotation, const Vec3& translation, double tolerance)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite()) throw InputError("pose has non-finite entries");
  if (so3_error(rotation) > tolerance) throw InputError("rotation is not in SO(3)");
}

RigidPose RigidPose::from_approximate(const Mat3& rotation, const Vec3& translation) {
  if (!rotation.allFinite()) throw InputError("pose has non-finite entries");
  if (so3_error(rotation) > 1e-3) throw InputError("rotation is too far from SO(3) to repair");
  Eigen::JacobiSVD<Mat3> svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return RigidPose(u * v.transpose(), translation);
}

RigidPose RigidPose::operator*(const RigidPose& other) const {
  RigidPose out;
  out.rotation_ = rotation_ * other.rotation_;
  out.translation_ = rotation_ * other.translation_ + translation_;
  return out;
}

RigidPose RigidPose::inverse() const {
  RigidPose out;
  out.rotation_ = rotation_.transpose();
  out.translation_ = -(out.rotation_ * translation_);
  return out;
}

void Camera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw InputError("camera focal lengths must be positive");
  if (width <= 0 || height <= 0) throw InputError("camera image size must be positive");
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    throw InputError("camera principal point must lie inside the image");
  }
}

Camera Camera::centered(int size, double focal_scale) {
  const double f = focal_scale * size;
  return Camera{f, f, (size - 1) / 2.0, (size - 1) / 2.0, size, size};
}

Camera Camera::resized(int new_width, int new_height) const {
  const double sx = static_cast<double>(new_width) / width;
  const double sy = static_cast<double>(new_height) / height;
  // Pixel centers are at integer coordinates, so the half-pixel offsets move.
  return Camera{fx * sx, fy * sy, (cx + 0.5) * sx - 0.5, (cy + 0.5) * sy - 0.5, new_width, new_height};
}

Mat3 euler_to_rotation(const EulerAngles& e) {
  const double cxr = std::cos(e.rx), sxr = std::sin(e.rx);
  const double cyr = std::cos(e.ry), syr = std::sin(e.ry);
  const double czr = std::cos(e.rz), szr = std::sin(e.rz);
  Mat3 rx, ry, rz;
  rx << 1, 0, 0, 0, cxr, -sxr, 0, sxr, cxr;
  ry << cyr, 0, syr, 0, 1, 0, -syr, 0, cyr;
  rz << czr, -szr, 0, szr, czr, 0, 0, 0, 1;
  return rz * ry * rx;
}

EulerDecomposition rotation_to_euler(const Mat3& r) {
  EulerDecomposition out;
  const double cos_ry = std::hypot(r(0, 0), r(1, 0));
  if (cos_ry > 1e-6) {
    out.angles.rx = std::atan2(r(2, 1), r(2, 2));
    out.angles.ry = std::atan2(-r(2, 0), cos_ry);
    out.angles.rz = std::atan2(r(1, 0), r(0, 0));
    return out;
  }
  // Gimbal lock: only rx -/+ rz is observable; rz = 0 by convention.
  out.degenerate = true;
  out.angles.rz = 0.0;
  if (r(2, 0) < 0.0) {
    out.angles.ry = std::numbers::pi / 2.0;
    out.angles.rx = std::atan2(r(0, 1), r(1, 1));
  } else {
    out.angles.ry = -std::numbers::pi / 2.0;
    out.angles.rx = std::atan2(-r(0, 1), r(1, 1));
  }
  return out;
}

RigidPose apply_local_increment(const RigidPose& pose, const Vec3& d_translation, const Vec3& d_euler) {
  const Mat3 rotation = pose.rotation() * euler_to_rotation(EulerAngles::from_vector(d_euler));
  return RigidPose(rotation, pose.translation() + d_translation, 1e-6);
}

Projection project_point(const Camera& camera, const Vec3& p) {
  Projection out;
  out.depth = p.z();
  if (!(p.z() > kMinDepth)) return out;
  out.u = camera.fx * p.x() / p.z() + camera.cx;
  out.v = camera.fy * p.y() / p.z() + camera.cy;
  out.valid = true;
  return out;
}

std::vector<Projection> project(const Camera& camera, const RigidPose& pose, std::span<const Vec3> points) {
  std::vector<Projection> out;
  out.reserve(points.size());
  for (const Vec3& p : points) out.push_back(project_point(camera, pose.apply(p)));
  return out;
}

std::vector<double> face_view_angles(const TriangleMesh& mesh, const RigidPose& pose, const Camera& /*camera*/) {
  std::vector<double> out;
  out.reserve(mesh.faces().size());
  for (const Vec3& n : mesh.face_normals()) {
    // Viewing direction is +z in the camera frame.
    const double c = -(pose.rotation() * n).z();
    out.push_back(std::clamp(c, -1.0, 1.0));
  }
  return out;
}

std::vector<int> visible_vertices(const TriangleMesh& mesh, const RigidPose& pose, const Camera& camera,
                                  double epsilon) {
  std::vector<int> out;
  const DepthProbe probe(mesh, pose, camera);
  const auto& vertices = mesh.vertices();
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Projection p = project_point(camera, pose.apply(vertices[i]));
    if (!p.valid) continue;
    if (p.u < 0.0 || p.v < 0.0 || p.u > camera.width - 1 || p.v > camera.height - 1) continue;
    if (p.depth <= probe.depth_at(p.u, p.v) + epsilon) out.push_back(static_cast<int>(i));
  }
  return out;
}

double rotation_angle(const Mat3& a, const Mat3& b) {
  const double c = std::clamp(((a * b.transpose()).trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

PoseDistance pose_distance(const RigidPose& a, const RigidPose& b) {
  PoseDistance d;
  d.translation_mm = (a.translation() - b.translation()).norm() * 1000.0;
  d.rotation_deg = rotation_angle(a.rotation(), b.rotation()) * 180.0 / std::numbers::pi;
  return d;
}

RigidPose perturb_pose(const RigidPose& pose, double trans_range_m, double rot_range_rad, std::uint64_t seed) {
  if (trans_range_m < 0.0 || rot_range_rad < 0.0) throw InputError("perturbation ranges must be nonnegative");
  Rng rng(seed);
  Vec3 dt, de;
  for (int i = 0; i < 3; ++i) dt[i] = rng.uniform(-trans_range_m, trans_range_m);
  for (int i = 0; i < 3; ++i) de[i] = rng.uniform(-rot_range_rad, rot_range_rad);
  return apply_local_increment(pose, dt, de);
}

RigidPose look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(up);
  if (right.norm() < 1e-9) {
    // Looking along `up`: any perpendicular works; pick one from the x axis.
    right = forward.cross(Vec3::UnitX());
    if (right.norm() < 1e-9) right = forward.cross(Vec3::UnitY());
  }
  right.normalize();
  const Vec3 down = forward.cross(right);
  Mat3 rotation;
  rotation.row(0) = right.transpose();
  rotation.row(1) = down.transpose();
  rotation.row(2) = forward.transpose();
  return RigidPose(rotation, -(rotation * eye), 1e-9);
}

}  // namespace nol
