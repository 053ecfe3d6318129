#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nol/geometry.hpp"
#include "nol/image.hpp"
#include "nol/raster.hpp"
#include "nol/rng.hpp"

namespace nol {

enum class PrimitiveKind { kBox, kCylinder };

std::string to_string(PrimitiveKind kind);
std::optional<PrimitiveKind> parse_primitive(std::string_view name);

/// Box: dims = full extents (x, y, z). Cylinder: dims.x() = radius,
/// dims.z() = height, axis along z. Both centered at the origin.
struct PrimitiveSpec {
  PrimitiveKind kind = PrimitiveKind::kBox;
  Vec3 dims = Vec3::Ones();
  int segments = 36;

  static PrimitiveSpec default_for(PrimitiveKind kind);
};

TriangleMesh make_box(const Vec3& extents);
TriangleMesh make_cylinder(double radius, double height, int segments = 36);
TriangleMesh make_primitive(const PrimitiveSpec& spec);

/// Texture atlas lookup for a primitive's surface: box faces occupy a 3 x 2
/// grid of cells, the cylinder wall the top two thirds and the caps the
/// bottom third.
struct SurfaceMapping {
  PrimitiveSpec primitive;

  /// Texture coordinates in [0, 1]^2 for an object-frame surface point on
  /// a face with object-frame normal `normal`.
  std::array<double, 2> texture_coords(const Vec3& point, const Vec3& normal) const;
};

struct TexturedObject {
  TriangleMesh mesh;
  Image texture;
  SurfaceMapping mapping;
};

TexturedObject make_textured_primitive(const PrimitiveSpec& spec, Image texture);

/// Seeded value-noise octaves plus glyph-like rectangles, RGB in [0, 1].
/// Rescaled if needed so the mean gradient magnitude is at least
/// kTextureGradientFloor. Throws InputError if size < 64.
Image procedural_texture(std::uint64_t seed, int size = 256);
inline constexpr double kTextureGradientFloor = 0.02;

/// Mean central-difference gradient magnitude of the luminance.
double mean_gradient_magnitude(const Image& rgb);

struct GroundTruthView {
  Image image;
  Mask mask;
  std::vector<double> depth;   // +inf where uncovered
};

/// Texture-mapped Lambert render. `light_dir` is the direction light
/// travels, in the camera frame; shading = ambient + (1 - ambient) *
/// max(0, -n . light_dir). Background is black.
GroundTruthView render_gt_view(const TexturedObject& object, const RigidPose& pose, const Camera& camera,
                               const Vec3& light_dir, double ambient = 0.0);

/// Sampling ranges for photometric augmentation, 8-bit units where noted.
struct AugmentRanges {
  double add_min = -15.0, add_max = 15.0;        // 8-bit
  double contrast_min = 0.8, contrast_max = 1.3;
  double multiply_min = 0.8, multiply_max = 1.2;
  double blur_sigma_min = 0.0, blur_sigma_max = 0.5;
  double noise_sigma = 10.0;                      // 8-bit, zero mean
};

/// One drawn set of augmentation parameters.
struct AugmentSample {
  double add = 0.0;          // 8-bit units
  double contrast = 1.0;
  double multiply = 1.0;
  double blur_sigma = 0.0;
  double noise_sigma = 0.0;  // 8-bit units
};

AugmentSample sample_augment(const AugmentRanges& ranges, Rng& rng);

/// add -> contrast (about 128/255) -> multiply -> blur -> noise, clamped to
/// [0, 1] after every step.
Image color_augment(const Image& image, const AugmentSample& params, std::uint64_t noise_seed);

struct TrialConfig {
  int resolution = 128;
  double focal_scale = 1.6;       // focal length in units of image width
  double distance = 0.45;         // camera-to-object distance (m)
  int texture_size = 256;
  double ambient = 0.35;
  double source_cone_min_deg = 12.0;
  double source_cone_max_deg = 45.0;
  double min_source_separation_deg = 10.0;
};

struct TrialSource {
  Image image;
  Mask mask;
  RigidPose exact_pose;
  RigidPose perturbed_pose;
};

struct TrialSet {
  PrimitiveKind kind = PrimitiveKind::kBox;
  TexturedObject object;
  Camera camera;
  Vec3 light_dir_object = Vec3::UnitZ();
  double ambient = 0.0;
  RigidPose target_pose;
  Image target_image;
  Mask target_mask;
  std::vector<TrialSource> sources;
  double trans_err_max = 0.0;
  double rot_err_max = 0.0;
  std::uint64_t seed = 0;

  /// Views carrying the perturbed (annotated) or exact poses.
  std::vector<SourceView> source_views(bool perturbed = true) const;
};

/// Random target pose on the upper hemisphere at `cfg.distance`.
RigidPose random_target_pose(std::uint64_t seed, const TrialConfig& cfg = {});

TrialSet make_trial_set(PrimitiveKind kind, const RigidPose& target_pose, int n_sources, double trans_err_max,
                        double rot_err_max, std::uint64_t seed, const TrialConfig& cfg = {});

}  // namespace nol
