#include "nol/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nol/error.hpp"
#include "nol/pyramid.hpp"
#include "nol/sampling.hpp"

namespace nol {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;
// Inset of each atlas cell so bilinear lookups do not bleed across cells.
constexpr double kCellMargin = 0.02;

// Flips every face whose normal points toward the object's center.
std::vector<TriangleMesh::Face> orient_outward(const std::vector<Vec3>& vertices,
                                               std::vector<TriangleMesh::Face> faces) {
  for (auto& f : faces) {
    const Vec3 n = (vertices[f[1]] - vertices[f[0]]).cross(vertices[f[2]] - vertices[f[0]]);
    const Vec3 center = (vertices[f[0]] + vertices[f[1]] + vertices[f[2]]) / 3.0;
    if (n.dot(center) < 0.0) std::swap(f[1], f[2]);
  }
  return faces;
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

// One octave of value noise on a lattice with `cell` pixels per cell.
void add_value_noise(std::vector<double>& plane, int size, int cell, double amplitude, Rng& rng) {
  const int lattice = size / cell + 2;
  std::vector<double> values(static_cast<std::size_t>(lattice) * lattice);
  for (double& v : values) v = rng.uniform(-1.0, 1.0);
  for (int r = 0; r < size; ++r) {
    const double y = static_cast<double>(r) / cell;
    const int y0 = static_cast<int>(y);
    const double fy = smoothstep(y - y0);
    for (int c = 0; c < size; ++c) {
      const double x = static_cast<double>(c) / cell;
      const int x0 = static_cast<int>(x);
      const double fx = smoothstep(x - x0);
      const double v00 = values[static_cast<std::size_t>(y0) * lattice + x0];
      const double v10 = values[static_cast<std::size_t>(y0) * lattice + x0 + 1];
      const double v01 = values[static_cast<std::size_t>(y0 + 1) * lattice + x0];
      const double v11 = values[static_cast<std::size_t>(y0 + 1) * lattice + x0 + 1];
      const double top = v00 + (v10 - v00) * fx;
      const double bottom = v01 + (v11 - v01) * fx;
      plane[static_cast<std::size_t>(r) * size + c] += amplitude * (top + (bottom - top) * fy);
    }
  }
}

void sample_texture(const Image& texture, double s, double t, double* out) {
  const double u = std::clamp(s, 0.0, 1.0) * (texture.width() - 1);
  const double v = std::clamp(t, 0.0, 1.0) * (texture.height() - 1);
  sample_bilinear(texture, u, v, out);
}

double cell_coord(double local, int cell, int cells) {
  return (cell + kCellMargin + (1.0 - 2.0 * kCellMargin) * std::clamp(local, 0.0, 1.0)) / cells;
}

Vec3 random_unit(Rng& rng) {
  while (true) {
    const Vec3 v(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const double n = v.norm();
    if (n > 1e-3 && n <= 1.0) return v / n;
  }
}

}  // namespace

std::string to_string(PrimitiveKind kind) { return kind == PrimitiveKind::kBox ? "box" : "cylinder"; }

std::optional<PrimitiveKind> parse_primitive(std::string_view name) {
  if (name == "box") return PrimitiveKind::kBox;
  if (name == "cylinder") return PrimitiveKind::kCylinder;
  return std::nullopt;
}

PrimitiveSpec PrimitiveSpec::default_for(PrimitiveKind kind) {
  // Desk-scale stand-ins for a cereal box and a soup can.
  if (kind == PrimitiveKind::kBox) return {kind, Vec3(0.12, 0.06, 0.16), 36};
  return {kind, Vec3(0.04, 0.04, 0.14), 36};
}

TriangleMesh make_box(const Vec3& extents) {
  if (!(extents.minCoeff() > 0.0)) throw InputError("box extents must be positive");
  std::vector<Vec3> vertices;
  for (int i = 0; i < 8; ++i) {
    vertices.emplace_back((i & 1 ? 0.5 : -0.5) * extents.x(), (i & 2 ? 0.5 : -0.5) * extents.y(),
                          (i & 4 ? 0.5 : -0.5) * extents.z());
  }
  std::vector<TriangleMesh::Face> faces;
  for (int axis = 0; axis < 3; ++axis) {
    const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      auto corner = [&](int s1, int s2) { return (side << axis) | (s1 << a1) | (s2 << a2); };
      const int q0 = corner(0, 0), q1 = corner(1, 0), q2 = corner(1, 1), q3 = corner(0, 1);
      faces.push_back({q0, q1, q2});
      faces.push_back({q0, q2, q3});
    }
  }
  return TriangleMesh(vertices, orient_outward(vertices, std::move(faces)));
}

TriangleMesh make_cylinder(double radius, double height, int segments) {
  if (!(radius > 0.0) || !(height > 0.0)) throw InputError("cylinder dimensions must be positive");
  if (segments < 36) throw InputError("cylinder needs at least 36 segments");
  std::vector<Vec3> vertices;
  for (int ring = 0; ring < 2; ++ring) {
    const double z = ring == 0 ? -0.5 * height : 0.5 * height;
    for (int i = 0; i < segments; ++i) {
      const double a = 2.0 * kPi * i / segments;
      vertices.emplace_back(radius * std::cos(a), radius * std::sin(a), z);
    }
  }
  const int bottom_center = static_cast<int>(vertices.size());
  vertices.emplace_back(0.0, 0.0, -0.5 * height);
  const int top_center = static_cast<int>(vertices.size());
  vertices.emplace_back(0.0, 0.0, 0.5 * height);

  std::vector<TriangleMesh::Face> faces;
  for (int i = 0; i < segments; ++i) {
    const int j = (i + 1) % segments;
    const int b0 = i, b1 = j, t0 = segments + i, t1 = segments + j;
    faces.push_back({b0, b1, t1});
    faces.push_back({b0, t1, t0});
    faces.push_back({bottom_center, b1, b0});
    faces.push_back({top_center, t0, t1});
  }
  return TriangleMesh(vertices, orient_outward(vertices, std::move(faces)));
}

TriangleMesh make_primitive(const PrimitiveSpec& spec) {
  if (spec.kind == PrimitiveKind::kBox) return make_box(spec.dims);
  return make_cylinder(spec.dims.x(), spec.dims.z(), spec.segments);
}

std::array<double, 2> SurfaceMapping::texture_coords(const Vec3& p, const Vec3& n) const {
  const Vec3& d = primitive.dims;
  if (primitive.kind == PrimitiveKind::kBox) {
    int axis = 0;
    n.cwiseAbs().maxCoeff(&axis);
    const int cell = axis * 2 + (n[axis] > 0.0 ? 1 : 0);
    const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
    return {cell_coord(p[a1] / d[a1] + 0.5, cell % 3, 3), cell_coord(p[a2] / d[a2] + 0.5, cell / 3, 2)};
  }
  const double radius = d.x(), height = d.z();
  if (std::abs(n.z()) > 0.5) {
    const int cap = n.z() > 0.0 ? 1 : 0;
    const double local_t = p.y() / (2.0 * radius) + 0.5;
    return {cell_coord(p.x() / (2.0 * radius) + 0.5, cap, 2), (2.0 + cell_coord(local_t, 0, 1)) / 3.0};
  }
  const double s = (std::atan2(p.y(), p.x()) + kPi) / (2.0 * kPi);
  return {std::clamp(s, 0.0, 1.0), (2.0 / 3.0) * cell_coord(p.z() / height + 0.5, 0, 1)};
}

TexturedObject make_textured_primitive(const PrimitiveSpec& spec, Image texture) {
  if (texture.channels() != 3) throw InputError("texture must be RGB");
  return TexturedObject{make_primitive(spec), std::move(texture), SurfaceMapping{spec}};
}

double mean_gradient_magnitude(const Image& rgb) {
  const Image lum = luminance(rgb);
  const int h = lum.height(), w = lum.width();
  double sum = 0.0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double gx = 0.5 * (lum.at(r, std::min(c + 1, w - 1), 0) - lum.at(r, std::max(c - 1, 0), 0));
      const double gy = 0.5 * (lum.at(std::min(r + 1, h - 1), c, 0) - lum.at(std::max(r - 1, 0), c, 0));
      sum += std::hypot(gx, gy);
    }
  }
  return sum / static_cast<double>(lum.pixel_count());
}

Image procedural_texture(std::uint64_t seed, int size) {
  if (size < 64) throw InputError("texture size must be at least 64");
  Rng rng(seed);
  Image out(size, size, 3);
  for (int ch = 0; ch < 3; ++ch) {
    std::vector<double> plane(static_cast<std::size_t>(size) * size, 0.0);
    double amplitude = 1.0;
    for (int cell = size / 4; cell >= 8; cell /= 2) {
      add_value_noise(plane, size, cell, amplitude, rng);
      amplitude *= 0.65;
    }
    const auto [lo, hi] = std::minmax_element(plane.begin(), plane.end());
    const double span = std::max(*hi - *lo, 1e-9);
    for (std::size_t i = 0; i < plane.size(); ++i) out.values()[i * 3 + ch] = 0.1 + 0.8 * (plane[i] - *lo) / span;
  }
  // Glyph-like strokes: short dark or light bars in rows, like printed text.
  const int glyphs = size * size / 1500;
  for (int g = 0; g < glyphs; ++g) {
    const int gw = 3 + static_cast<int>(rng.below(10));
    const int gh = 6 + static_cast<int>(rng.below(12));
    const int r0 = static_cast<int>(rng.below(size - gh));
    const int c0 = static_cast<int>(rng.below(size - gw));
    const bool dark = rng.uniform() < 0.6;
    const double shade[3] = {dark ? rng.uniform(0.0, 0.2) : rng.uniform(0.8, 1.0),
                             dark ? rng.uniform(0.0, 0.2) : rng.uniform(0.8, 1.0),
                             dark ? rng.uniform(0.0, 0.2) : rng.uniform(0.8, 1.0)};
    for (int r = r0; r < r0 + gh; ++r) {
      for (int c = c0; c < c0 + gw; ++c) {
        for (int ch = 0; ch < 3; ++ch) out.at(r, c, ch) = shade[ch];
      }
    }
  }
  // Stretch contrast about the mean until the gradient floor holds.
  for (int attempt = 0; attempt < 8 && mean_gradient_magnitude(out) < kTextureGradientFloor; ++attempt) {
    double mean = 0.0;
    for (double v : out.values()) mean += v;
    mean /= static_cast<double>(out.values().size());
    for (double& v : out.values()) v = std::clamp(mean + 1.5 * (v - mean), 0.0, 1.0);
  }
  return out;
}

GroundTruthView render_gt_view(const TexturedObject& object, const RigidPose& pose, const Camera& camera,
                               const Vec3& light_dir, double ambient) {
  const FragmentBuffer fragments = rasterize(object.mesh, pose, camera);
  GroundTruthView out;
  out.image = Image(camera.height, camera.width, 3);
  out.mask = fragments.coverage();
  out.depth = fragments.depth;
  const Vec3 light = light_dir.norm() > 0.0 ? Vec3(light_dir.normalized()) : Vec3::UnitZ();
  double color[3];
  for (std::size_t p = 0; p < fragments.face.size(); ++p) {
    const int f = fragments.face[p];
    if (f < 0) continue;
    const Vec3 point = fragment_point(object.mesh, fragments, p);
    const Vec3& normal = object.mesh.face_normals()[f];
    const auto st = object.mapping.texture_coords(point, normal);
    sample_texture(object.texture, st[0], st[1], color);
    const double lambert = std::max(0.0, -(pose.rotation() * normal).dot(light));
    const double shade = ambient + (1.0 - ambient) * lambert;
    auto dst = out.image.pixel(p);
    for (int c = 0; c < 3; ++c) dst[c] = std::clamp(color[c] * shade, 0.0, 1.0);
  }
  return out;
}

AugmentSample sample_augment(const AugmentRanges& ranges, Rng& rng) {
  AugmentSample s;
  s.add = rng.uniform(ranges.add_min, ranges.add_max);
  s.contrast = rng.uniform(ranges.contrast_min, ranges.contrast_max);
  s.multiply = rng.uniform(ranges.multiply_min, ranges.multiply_max);
  s.blur_sigma = rng.uniform(ranges.blur_sigma_min, ranges.blur_sigma_max);
  s.noise_sigma = ranges.noise_sigma;
  return s;
}

Image color_augment(const Image& image, const AugmentSample& params, std::uint64_t noise_seed) {
  Image out = image;
  auto clamp_all = [&] {
    for (double& v : out.values()) v = std::clamp(v, 0.0, 1.0);
  };
  if (params.add != 0.0) {
    for (double& v : out.values()) v += params.add / 255.0;
    clamp_all();
  }
  if (params.contrast != 1.0) {
    constexpr double kCenter = 128.0 / 255.0;
    for (double& v : out.values()) v = kCenter + params.contrast * (v - kCenter);
    clamp_all();
  }
  if (params.multiply != 1.0) {
    for (double& v : out.values()) v *= params.multiply;
    clamp_all();
  }
  if (params.blur_sigma > 1e-3) out = gaussian_blur(out, params.blur_sigma);
  if (params.noise_sigma > 0.0) {
    Rng rng(noise_seed);
    for (double& v : out.values()) v += rng.normal(0.0, params.noise_sigma) / 255.0;
    clamp_all();
  }
  return out;
}

std::vector<SourceView> TrialSet::source_views(bool perturbed) const {
  std::vector<SourceView> views;
  for (const TrialSource& s : sources) {
    views.push_back(SourceView{s.image, s.mask, perturbed ? s.perturbed_pose : s.exact_pose, nullptr});
  }
  return views;
}

RigidPose random_target_pose(std::uint64_t seed, const TrialConfig& cfg) {
  Rng rng(seed);
  const double az = rng.uniform(0.0, 2.0 * kPi);
  const double el = rng.uniform(10.0, 80.0) * kDeg;
  const double roll = rng.uniform(-20.0, 20.0) * kDeg;
  const Vec3 eye = cfg.distance * Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
  return roll_pose(look_at(eye, Vec3::Zero()), roll);
}

TrialSet make_trial_set(PrimitiveKind kind, const RigidPose& target_pose, int n_sources, double trans_err_max,
                        double rot_err_max, std::uint64_t seed, const TrialConfig& cfg) {
  if (trans_err_max < 0.0 || rot_err_max < 0.0) throw InputError("pose error ranges must be nonnegative");
  if (n_sources < 1) throw InputError("a trial needs at least one source view");
  TrialSet set;
  set.kind = kind;
  set.seed = seed;
  set.trans_err_max = trans_err_max;
  set.rot_err_max = rot_err_max;
  set.camera = Camera::centered(cfg.resolution, cfg.focal_scale);
  set.ambient = cfg.ambient;
  set.object = make_textured_primitive(PrimitiveSpec::default_for(kind),
                                       procedural_texture(derive_seed(seed, 1), cfg.texture_size));
  set.target_pose = target_pose;

  Rng rng(derive_seed(seed, 2));
  const Vec3 target_eye = target_pose.camera_center();
  const Vec3 view_dir = target_eye.normalized();
  // Light travels roughly from the target camera toward the object.
  set.light_dir_object = (-view_dir + 0.6 * random_unit(rng)).normalized();

  const GroundTruthView gt = render_gt_view(set.object, target_pose, set.camera,
                                            target_pose.rotation() * set.light_dir_object, set.ambient);
  set.target_image = gt.image;
  set.target_mask = gt.mask;
  const std::vector<int> target_visible = visible_vertices(set.object.mesh, target_pose, set.camera);

  std::vector<Vec3> chosen_dirs;
  for (int k = 0; k < n_sources; ++k) {
    RigidPose pose;
    bool placed = false;
    for (int attempt = 0; attempt < 500 && !placed; ++attempt) {
      const Vec3 axis = view_dir.cross(random_unit(rng)).normalized();
      const double angle = rng.uniform(cfg.source_cone_min_deg, cfg.source_cone_max_deg) * kDeg;
      Vec3 dir = Eigen::AngleAxisd(angle, axis) * view_dir;
      if (dir.z() < 0.05) continue;  // stay above the support plane
      dir.normalize();
      const bool separated = std::all_of(chosen_dirs.begin(), chosen_dirs.end(), [&](const Vec3& d) {
        return std::acos(std::clamp(d.dot(dir), -1.0, 1.0)) >= cfg.min_source_separation_deg * kDeg;
      });
      if (!separated) continue;
      const double distance = target_eye.norm() * rng.uniform(0.92, 1.08);
      pose = roll_pose(look_at(distance * dir, Vec3::Zero()), rng.uniform(-30.0, 30.0) * kDeg);
      const std::vector<int> seen = visible_vertices(set.object.mesh, pose, set.camera);
      std::vector<int> overlap;
      std::set_intersection(seen.begin(), seen.end(), target_visible.begin(), target_visible.end(),
                            std::back_inserter(overlap));
      if (overlap.empty()) continue;
      chosen_dirs.push_back(dir);
      placed = true;
    }
    if (!placed) throw InvariantError("could not place a source view overlapping the target");
    const GroundTruthView src =
        render_gt_view(set.object, pose, set.camera, pose.rotation() * set.light_dir_object, set.ambient);
    TrialSource source;
    source.image = src.image;
    source.mask = src.mask;
    source.exact_pose = pose;
    source.perturbed_pose = perturb_pose(pose, trans_err_max, rot_err_max, derive_seed(seed, 100 + k));
    set.sources.push_back(std::move(source));
  }
  return set;
}

}  // namespace nol
