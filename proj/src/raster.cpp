#include "nol/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nol/error.hpp"
#include "nol/kernels.hpp"
#include "nol/pyramid.hpp"

namespace nol {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Bilinear taps lighter than this do not need to lie inside the mask.
constexpr double kTapWeightFloor = 1e-6;

inline double edge(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

struct Taps {
  int u0, u1, v0, v1;
  double a, b;  // fractional offsets along u and v
};

inline Taps make_taps(double u, double v, int width, int height) {
  Taps t;
  t.u0 = std::min(static_cast<int>(std::floor(u)), width - 1);
  t.v0 = std::min(static_cast<int>(std::floor(v)), height - 1);
  t.u1 = std::min(t.u0 + 1, width - 1);
  t.v1 = std::min(t.v0 + 1, height - 1);
  t.a = u - t.u0;
  t.b = v - t.v0;
  return t;
}

inline bool in_image(double u, double v, const Camera& camera) {
  return u >= 0.0 && v >= 0.0 && u <= camera.width - 1 && v <= camera.height - 1;
}

}  // namespace

Mask FragmentBuffer::coverage() const {
  Mask m(height, width);
  for (std::size_t p = 0; p < face.size(); ++p) m.set(p, face[p] >= 0);
  return m;
}

FragmentBuffer rasterize(const TriangleMesh& mesh, const RigidPose& pose, const Camera& camera) {
  camera.validate();
  FragmentBuffer fb;
  fb.width = camera.width;
  fb.height = camera.height;
  const std::size_t n = static_cast<std::size_t>(fb.width) * fb.height;
  fb.face.assign(n, -1);
  fb.bary.assign(n, {0.0, 0.0, 0.0});
  fb.depth.assign(n, kInf);

  const auto& vertices = mesh.vertices();
  std::vector<Vec3> cam(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) cam[i] = pose.apply(vertices[i]);

  const auto& faces = mesh.faces();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const auto& face = faces[f];
    const Vec3& p0 = cam[face[0]];
    const Vec3& p1 = cam[face[1]];
    const Vec3& p2 = cam[face[2]];
    if (p0.z() <= kMinDepth || p1.z() <= kMinDepth || p2.z() <= kMinDepth) continue;
    const double x0 = camera.fx * p0.x() / p0.z() + camera.cx, y0 = camera.fy * p0.y() / p0.z() + camera.cy;
    const double x1 = camera.fx * p1.x() / p1.z() + camera.cx, y1 = camera.fy * p1.y() / p1.z() + camera.cy;
    const double x2 = camera.fx * p2.x() / p2.z() + camera.cx, y2 = camera.fy * p2.y() / p2.z() + camera.cy;
    const double area = edge(x0, y0, x1, y1, x2, y2);
    if (std::abs(area) < 1e-12) continue;

    const int col_min = std::max(0, static_cast<int>(std::ceil(std::min({x0, x1, x2}))));
    const int col_max = std::min(fb.width - 1, static_cast<int>(std::floor(std::max({x0, x1, x2}))));
    const int row_min = std::max(0, static_cast<int>(std::ceil(std::min({y0, y1, y2}))));
    const int row_max = std::min(fb.height - 1, static_cast<int>(std::floor(std::max({y0, y1, y2}))));
    const double inv_z0 = 1.0 / p0.z(), inv_z1 = 1.0 / p1.z(), inv_z2 = 1.0 / p2.z();

    for (int row = row_min; row <= row_max; ++row) {
      for (int col = col_min; col <= col_max; ++col) {
        const double w0 = edge(x1, y1, x2, y2, col, row) / area;
        const double w1 = edge(x2, y2, x0, y0, col, row) / area;
        const double w2 = edge(x0, y0, x1, y1, col, row) / area;
        if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
        const double q0 = w0 * inv_z0, q1 = w1 * inv_z1, q2 = w2 * inv_z2;
        const double sum = q0 + q1 + q2;
        const double depth = 1.0 / sum;
        const std::size_t idx = fb.index(row, col);
        if (depth < fb.depth[idx]) {
          fb.depth[idx] = depth;
          fb.face[idx] = static_cast<int>(f);
          fb.bary[idx] = {q0 / sum, q1 / sum, q2 / sum};
        }
      }
    }
  }
  return fb;
}

Vec3 fragment_point(const TriangleMesh& mesh, const FragmentBuffer& fragments, std::size_t pixel) {
  const auto& face = mesh.faces()[fragments.face[pixel]];
  const auto& b = fragments.bary[pixel];
  const auto& v = mesh.vertices();
  return b[0] * v[face[0]] + b[1] * v[face[1]] + b[2] * v[face[2]];
}

DepthProbe::DepthProbe(const TriangleMesh& mesh, const RigidPose& pose, const Camera& camera)
    : DepthProbe(mesh, pose, camera, rasterize(mesh, pose, camera)) {}

DepthProbe::DepthProbe(const TriangleMesh& mesh, const RigidPose& pose, const Camera& camera,
                       FragmentBuffer fragments)
    : camera_(camera), fragments_(std::move(fragments)) {
  const auto& faces = mesh.faces();
  plane_normals_.resize(faces.size());
  plane_offsets_.resize(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Vec3 n = pose.rotation() * mesh.face_normals()[f];
    plane_normals_[f] = n;
    plane_offsets_[f] = n.dot(pose.apply(mesh.vertices()[faces[f][0]]));
  }
}

double DepthProbe::depth_at(double u, double v) const {
  const int col = static_cast<int>(std::lround(u));
  const int row = static_cast<int>(std::lround(v));
  if (col < 0 || row < 0 || col >= fragments_.width || row >= fragments_.height) return kInf;
  const std::size_t idx = fragments_.index(row, col);
  const int f = fragments_.face[idx];
  if (f < 0) return kInf;
  const double center = fragments_.depth[idx];
  const Vec3 dir((u - camera_.cx) / camera_.fx, (v - camera_.cy) / camera_.fy, 1.0);
  const double denom = plane_normals_[f].dot(dir);
  if (std::abs(denom) < 1e-9) return center;
  const double z = plane_offsets_[f] / denom;
  // Grazing planes extrapolate badly; keep the sampled depth then.
  if (!(z > 0.0) || std::abs(z - center) > 0.25 * center) return center;
  return z;
}

void SourceView::validate() const {
  if (image.channels() != 3) throw InputError("source image must have 3 channels");
  if (mask.height() != image.height() || mask.width() != image.width()) {
    throw InputError("source mask and image dimensions differ");
  }
  if (features) {
    if (features->height() != image.height() || features->width() != image.width()) {
      throw InputError("source features and image dimensions differ");
    }
    if (features->channels() != kFeatureChannels) throw InputError("source features must have 17 channels");
  }
}

FeatureMap encode_features(const SourceView& view, const TriangleMesh& mesh, const Camera& camera) {
  view.validate();
  if (view.image.height() != camera.height || view.image.width() != camera.width) {
    throw InputError("source image does not match the camera resolution");
  }
  const int h = view.image.height(), w = view.image.width();
  FeatureMap out(h, w, kFeatureChannels);
  out.valid = Mask(h, w, true);

  const FragmentBuffer fragments = rasterize(mesh, view.pose, camera);
  const std::vector<double> angles = face_view_angles(mesh, view.pose, camera);
  const Image pyramid = pyramid_features(view.image);

  for (std::size_t p = 0; p < view.image.pixel_count(); ++p) {
    auto dst = out.values.pixel(p);
    const auto color = view.image.pixel(p);
    std::copy(color.begin(), color.end(), dst.begin());
    dst[kFaceAngleChannel] = fragments.face[p] >= 0 ? angles[fragments.face[p]] : 0.0;
    const auto pyr = pyramid.pixel(p);
    std::copy(pyr.begin(), pyr.end(), dst.begin() + kPyramidFirstChannel);
  }
  return out;
}

SourceView with_features(SourceView view, const TriangleMesh& mesh, const Camera& camera) {
  if (!view.features) view.features = std::make_shared<const FeatureMap>(encode_features(view, mesh, camera));
  return view;
}

TargetGeometry prepare_target(const TriangleMesh& mesh, const RigidPose& target_pose, const Camera& camera) {
  TargetGeometry t;
  t.pose = target_pose;
  t.fragments = rasterize(mesh, target_pose, camera);
  const int h = camera.height, w = camera.width;
  t.points.assign(t.fragments.face.size(), Vec3::Zero());
  t.interior = Mask(h, w);
  for (std::size_t p = 0; p < t.fragments.face.size(); ++p) {
    if (t.fragments.face[p] >= 0) t.points[p] = fragment_point(mesh, t.fragments, p);
  }
  for (int row = 0; row < h; ++row) {
    for (int col = 0; col < w; ++col) {
      const int f = t.fragments.face[t.fragments.index(row, col)];
      if (f < 0) continue;
      bool interior = true;
      for (int dr = -1; dr <= 1 && interior; ++dr) {
        for (int dc = -1; dc <= 1 && interior; ++dc) {
          const int r = row + dr, c = col + dc;
          if (r < 0 || c < 0 || r >= h || c >= w) {
            interior = false;
            break;
          }
          const int g = t.fragments.face[t.fragments.index(r, c)];
          // Neighbors on faces that do not touch f sit across a silhouette
          // or occlusion edge.
          if (g < 0 || (g != f && !mesh.faces_share_vertex(f, g))) interior = false;
        }
      }
      t.interior.set(row, col, interior);
    }
  }
  return t;
}

void sample_bilinear(const Image& image, double u, double v, double* out) {
  const Taps t = make_taps(u, v, image.width(), image.height());
  kernels::bilerp(image.pixel(t.v0, t.u0).data(), image.pixel(t.v0, t.u1).data(), image.pixel(t.v1, t.u0).data(),
                  image.pixel(t.v1, t.u1).data(), (1 - t.a) * (1 - t.b), t.a * (1 - t.b), (1 - t.a) * t.b,
                  t.a * t.b, out, image.channels());
}

ProjectedMap project_view(const SourceView& view, const TriangleMesh& mesh, const Camera& camera,
                          const TargetGeometry& target, int source_index, double visibility_epsilon,
                          bool require_mask) {
  if (!view.features) throw InputError("project_view needs encoded source features");
  view.validate();
  const FeatureMap& features = *view.features;
  if (features.height() != camera.height || features.width() != camera.width) {
    throw InputError("source features do not match the camera resolution");
  }
  const int h = camera.height, w = camera.width;
  ProjectedMap out;
  out.source_index = source_index;
  out.features = FeatureMap(h, w, features.channels());
  out.source_uv.assign(static_cast<std::size_t>(h) * w, {0.0, 0.0});

  const DepthProbe probe(mesh, view.pose, camera);
  for (std::size_t p = 0; p < target.fragments.face.size(); ++p) {
    if (target.fragments.face[p] < 0) continue;
    const Projection proj = project_point(camera, view.pose.apply(target.points[p]));
    if (!proj.valid || !in_image(proj.u, proj.v, camera)) continue;
    const Taps t = make_taps(proj.u, proj.v, w, h);
    const double w00 = (1 - t.a) * (1 - t.b), w10 = t.a * (1 - t.b), w01 = (1 - t.a) * t.b, w11 = t.a * t.b;
    if (require_mask && ((w00 > kTapWeightFloor && !view.mask(t.v0, t.u0)) || (w10 > kTapWeightFloor && !view.mask(t.v0, t.u1)) ||
        (w01 > kTapWeightFloor && !view.mask(t.v1, t.u0)) || (w11 > kTapWeightFloor && !view.mask(t.v1, t.u1)))) {
      continue;
    }
    if (proj.depth > probe.depth_at(proj.u, proj.v) + visibility_epsilon) continue;
    kernels::bilerp(features.values.pixel(t.v0, t.u0).data(), features.values.pixel(t.v0, t.u1).data(),
                    features.values.pixel(t.v1, t.u0).data(), features.values.pixel(t.v1, t.u1).data(), w00, w10,
                    w01, w11, out.features.values.pixel(p).data(), features.channels());
    out.features.valid.set(p, true);
    out.source_uv[p] = {proj.u, proj.v};
  }
  return out;
}

ProjectedMap project_view(const SourceView& view, const TriangleMesh& mesh, const Camera& camera,
                          const RigidPose& target_pose, int source_index) {
  return project_view(view, mesh, camera, prepare_target(mesh, target_pose, camera), source_index);
}

PoseGradient pose_gradient(const SourceView& view, const TriangleMesh& /*mesh*/, const Camera& camera,
                           const TargetGeometry& target, const ProjectedMap& projected, const FeatureMap& residual) {
  if (!view.features) throw InputError("pose_gradient needs encoded source features");
  const FeatureMap& features = *view.features;
  const int channels = features.channels();
  if (residual.height() != camera.height || residual.width() != camera.width || residual.channels() != channels) {
    throw InputError("residual dimensions do not match the feature map");
  }
  const Mat3& rotation = view.pose.rotation();
  Vec3 grad_point_sum = Vec3::Zero();   // sum of dE/dXs
  Vec3 grad_euler = Vec3::Zero();
  int used = 0;

  for (std::size_t p = 0; p < residual.valid.pixel_count(); ++p) {
    if (!residual.valid[p] || !projected.valid()[p] || !target.interior[p]) continue;
    const double* r = residual.values.pixel(p).data();
    const Vec3& x_obj = target.points[p];
    const Vec3 xs = view.pose.apply(x_obj);
    const double z = xs.z();
    const double u = camera.fx * xs.x() / z + camera.cx;
    const double v = camera.fy * xs.y() / z + camera.cy;
    const Taps t = make_taps(u, v, camera.width, camera.height);
    const double d00 = kernels::dot(r, features.values.pixel(t.v0, t.u0).data(), channels);
    const double d10 = kernels::dot(r, features.values.pixel(t.v0, t.u1).data(), channels);
    const double d01 = kernels::dot(r, features.values.pixel(t.v1, t.u0).data(), channels);
    const double d11 = kernels::dot(r, features.values.pixel(t.v1, t.u1).data(), channels);
    // Cells clamped at the last row/column have zero extent.
    const double du = t.u1 > t.u0 ? (1 - t.b) * (d10 - d00) + t.b * (d11 - d01) : 0.0;
    const double dv = t.v1 > t.v0 ? (1 - t.a) * (d01 - d00) + t.a * (d11 - d10) : 0.0;
    if (du == 0.0 && dv == 0.0) {
      ++used;
      continue;
    }
    const Vec3 g(du * camera.fx / z, dv * camera.fy / z,
                 -(du * camera.fx * xs.x() + dv * camera.fy * xs.y()) / (z * z));
    grad_point_sum += g;
    // d xs / d e_i = R (axis_i x X)  =>  dE/de = X x (R^T g)
    grad_euler += x_obj.cross(rotation.transpose() * g);
    ++used;
  }
  PoseGradient out;
  out.pixels_used = used;
  out.starved = used == 0;
  out.delta.d_translation = grad_point_sum;
  out.delta.d_euler = grad_euler;
  return out;
}

PoseGradient pose_gradient(const SourceView& view, const TriangleMesh& mesh, const Camera& camera,
                           const RigidPose& target_pose, const FeatureMap& residual) {
  const TargetGeometry target = prepare_target(mesh, target_pose, camera);
  const ProjectedMap projected = project_view(view, mesh, camera, target);
  return pose_gradient(view, mesh, camera, target, projected, residual);
}

}  // namespace nol
