#pragma once

#include <span>
#include <string>
#include <vector>

#include "nol/fusion.hpp"
#include "nol/geometry.hpp"
#include "nol/raster.hpp"

namespace nol {

/// Minimum number of evaluation pixels for a usable projection error.
inline constexpr int kMinErrorPixels = 32;

struct RefineConfig {
  /// Multiplier on the per-block step lengths.
  double step_delta = 1.0;
  int max_iters = 50;
  /// Consecutive non-improving steps tolerated before stopping.
  int patience = 1;
  double translation_step_m = 1e-3;
  double rotation_step_rad = 0.2 * 3.14159265358979323846 / 180.0;
  double temperature = kDefaultTemperature;
  double visibility_epsilon = kVisibilityEpsilon;
  /// When false, E^k also counts samples whose bilinear taps leave the
  /// source mask, so background bleed is penalized.
  bool require_source_mask = true;

  void validate() const;
};

enum class StopReason { kConverged, kMaxIters, kStarved };
std::string to_string(StopReason reason);

struct RefineTrace {
  std::vector<double> errors;       // E^k before the first step and after each step
  std::vector<RigidPose> poses;     // pose evaluated at each entry of `errors`
  RigidPose final_pose;
  int iterations_run = 0;
  StopReason stop_reason = StopReason::kConverged;
};

struct ProjectionError {
  double value = 0.0;
  int pixels = 0;
  bool starved = false;
};

/// Region where a projected map is compared with the reference: valid in
/// the projection, inside `mask`, valid in the reference and interior.
Mask error_region(const ProjectedMap& projected, const FeatureMap& reference, const Mask& mask,
                  const TargetGeometry& target);

/// Mean over the region of (1/C) sum_c |reference - P|. Starved (value +inf
/// when empty) if fewer than kMinErrorPixels pixels remain.
ProjectionError projection_error(const ProjectedMap& projected, const FeatureMap& reference, const Mask& mask,
                                 const TargetGeometry& target);

/// dE/dP = sign(P - reference) / (N * C) over `region`, zero elsewhere.
FeatureMap projection_residual(const ProjectedMap& projected, const FeatureMap& reference, const Mask& region);

/// Analytic dE/d(pose) at the view's pose.
PoseGradient projection_error_gradient(const SourceView& view, const TriangleMesh& mesh, const Camera& camera,
                                       const TargetGeometry& target, const FeatureMap& reference, const Mask& mask);

/// Central differences of the projection error over the six pose
/// parameters. With `freeze_region` the evaluation pixels are fixed to the
/// region at the unperturbed pose and sampled regardless of source
/// validity, which is the energy the analytic gradient differentiates.
PoseDelta finite_diff_gradient(const SourceView& view, const TriangleMesh& mesh, const Camera& camera,
                               const TargetGeometry& target, const FeatureMap& reference, const Mask& mask,
                               double h_translation, double h_rotation, bool freeze_region = true);

struct RefineResult {
  RigidPose pose;
  RefineTrace trace;
};

/// Gradient descent on the view's pose against a frozen reference. The
/// translation moves by -step * g_t/|g_t|, the rotation by an Euler-angle
/// increment -step * g_r/|g_r| re-converted to a rotation matrix. Returns
/// the best pose seen.
RefineResult refine_pose(const SourceView& view, const TriangleMesh& mesh, const Camera& camera,
                         const TargetGeometry& target, const FeatureMap& reference, const Mask& mask,
                         const RefineConfig& cfg);

struct RenderOptions {
  RefineConfig refine;
  bool refine_poses = true;
  int workers = 1;
};

enum class RenderStatus { kOk, kAllStarved };

struct RenderResult {
  Image rendering;                 // final X^D
  Mask union_mask;                 // final M^D
  Image initial_rendering;         // X^D before refinement
  Mask initial_mask;
  std::vector<RigidPose> refined_poses;
  std::vector<RefineTrace> traces;
  RenderStatus status = RenderStatus::kOk;
};

/// Fuse, refine each source pose against the first fusion, fuse again.
/// Views without features are encoded at their annotated pose. Throws
/// InputError unless 1 <= views.size() <= 8.
RenderResult render_nol(std::span<const SourceView> views, const TriangleMesh& mesh, const Camera& camera,
                        const RigidPose& target_pose, const RenderOptions& options = {});

}  // namespace nol
