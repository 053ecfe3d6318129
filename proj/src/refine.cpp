#include "nol/refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nol/error.hpp"
#include "nol/kernels.hpp"
#include "nol/parallel.hpp"

namespace nol {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Projection error over a fixed pixel set, sampling the source features at
// the pose's projection whether or not the sample would pass the validity
// tests. Differentiating this energy is what pose_gradient does.
double frozen_region_energy(const SourceView& view, const Camera& camera, const TargetGeometry& target,
                            const FeatureMap& reference, const Mask& region, const RigidPose& pose) {
  const FeatureMap& features = *view.features;
  const int channels = features.channels();
  std::vector<double> sample(channels);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t p = 0; p < region.pixel_count(); ++p) {
    if (!region[p]) continue;
    const Projection proj = project_point(camera, pose.apply(target.points[p]));
    if (!proj.valid) continue;
    const double u = std::clamp(proj.u, 0.0, camera.width - 1.0);
    const double v = std::clamp(proj.v, 0.0, camera.height - 1.0);
    sample_bilinear(features.values, u, v, sample.data());
    sum += kernels::l1_distance(sample.data(), reference.values.pixel(p).data(), channels) / channels;
    ++count;
  }
  return count == 0 ? kInf : sum / static_cast<double>(count);
}

struct Evaluation {
  ProjectedMap projected;
  Mask region;
  ProjectionError error;
};

Evaluation evaluate(const SourceView& view, const TriangleMesh& mesh, const Camera& camera,
                    const TargetGeometry& target, const FeatureMap& reference, const Mask& mask,
                    const RefineConfig& cfg) {
  Evaluation e;
  e.projected = project_view(view, mesh, camera, target, 0, cfg.visibility_epsilon, cfg.require_source_mask);
  e.region = error_region(e.projected, reference, mask, target);
  e.error = projection_error(e.projected, reference, mask, target);
  return e;
}

Vec3 normalized_or_zero(const Vec3& v) {
  const double n = v.norm();
  return n > 0.0 && std::isfinite(n) ? Vec3(v / n) : Vec3::Zero();
}

}  // namespace

void RefineConfig::validate() const {
  if (!(step_delta > 0.0)) throw InputError("refinement step must be positive");
  if (max_iters < 1) throw InputError("max_iters must be at least 1");
  if (patience < 1) throw InputError("patience must be at least 1");
  if (!(translation_step_m >= 0.0) || !(rotation_step_rad >= 0.0)) throw InputError("step scales must be nonnegative");
  if (!(temperature > 0.0)) throw InputError("temperature must be positive");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kConverged:
      return "converged";
    case StopReason::kMaxIters:
      return "max_iters";
    case StopReason::kStarved:
      return "starved";
  }
  return "unknown";
}

Mask error_region(const ProjectedMap& projected, const FeatureMap& reference, const Mask& mask,
                  const TargetGeometry& target) {
  const Mask& valid = projected.valid();
  if (!valid.same_shape(reference.valid) || !valid.same_shape(mask) || !valid.same_shape(target.interior)) {
    throw InputError("projection error inputs differ in shape");
  }
  Mask region(valid.height(), valid.width());
  for (std::size_t p = 0; p < valid.pixel_count(); ++p) {
    region.set(p, valid[p] && mask[p] && reference.valid[p] && target.interior[p]);
  }
  return region;
}

ProjectionError projection_error(const ProjectedMap& projected, const FeatureMap& reference, const Mask& mask,
                                 const TargetGeometry& target) {
  if (projected.features.channels() != reference.channels()) throw InputError("channel count mismatch");
  const Mask region = error_region(projected, reference, mask, target);
  const int channels = reference.channels();
  ProjectionError out;
  double sum = 0.0;
  for (std::size_t p = 0; p < region.pixel_count(); ++p) {
    if (!region[p]) continue;
    sum += kernels::l1_distance(projected.features.values.pixel(p).data(), reference.values.pixel(p).data(),
                                channels) /
           channels;
    ++out.pixels;
  }
  out.value = out.pixels == 0 ? kInf : sum / out.pixels;
  out.starved = out.pixels < kMinErrorPixels;
  return out;
}

FeatureMap projection_residual(const ProjectedMap& projected, const FeatureMap& reference, const Mask& region) {
  const int channels = reference.channels();
  FeatureMap residual(reference.height(), reference.width(), channels);
  const std::size_t n = region.count();
  if (n == 0) return residual;
  const double scale = 1.0 / (static_cast<double>(n) * channels);
  for (std::size_t p = 0; p < region.pixel_count(); ++p) {
    if (!region[p]) continue;
    residual.valid.set(p, true);
    kernels::sign_residual(projected.features.values.pixel(p).data(), reference.values.pixel(p).data(), scale,
                           residual.values.pixel(p).data(), channels);
  }
  return residual;
}

PoseGradient projection_error_gradient(const SourceView& view, const TriangleMesh& mesh, const Camera& camera,
                                       const TargetGeometry& target, const FeatureMap& reference, const Mask& mask) {
  const ProjectedMap projected = project_view(view, mesh, camera, target);
  const Mask region = error_region(projected, reference, mask, target);
  const FeatureMap residual = projection_residual(projected, reference, region);
  return pose_gradient(view, mesh, camera, target, projected, residual);
}

PoseDelta finite_diff_gradient(const SourceView& view, const TriangleMesh& mesh, const Camera& camera,
                               const TargetGeometry& target, const FeatureMap& reference, const Mask& mask,
                               double h_translation, double h_rotation, bool freeze_region) {
  if (!(h_translation > 0.0) || !(h_rotation > 0.0)) throw InputError("finite-difference steps must be positive");
  if (!view.features) throw InputError("finite_diff_gradient needs encoded source features");
  Mask region;
  if (freeze_region) {
    const ProjectedMap base = project_view(view, mesh, camera, target);
    region = error_region(base, reference, mask, target);
  }
  SourceView moved = view;
  auto energy = [&](const RigidPose& pose) {
    if (freeze_region) return frozen_region_energy(view, camera, target, reference, region, pose);
    moved.pose = pose;
    return projection_error(project_view(moved, mesh, camera, target), reference, mask, target).value;
  };
  PoseDelta out;
  for (int i = 0; i < 3; ++i) {
    const Vec3 dt = Vec3::Unit(i) * h_translation;
    const double plus = energy(apply_local_increment(view.pose, dt, Vec3::Zero()));
    const double minus = energy(apply_local_increment(view.pose, -dt, Vec3::Zero()));
    out.d_translation[i] = (plus - minus) / (2.0 * h_translation);
  }
  for (int i = 0; i < 3; ++i) {
    const Vec3 de = Vec3::Unit(i) * h_rotation;
    const double plus = energy(apply_local_increment(view.pose, Vec3::Zero(), de));
    const double minus = energy(apply_local_increment(view.pose, Vec3::Zero(), -de));
    out.d_euler[i] = (plus - minus) / (2.0 * h_rotation);
  }
  return out;
}

RefineResult refine_pose(const SourceView& view, const TriangleMesh& mesh, const Camera& camera,
                         const TargetGeometry& target, const FeatureMap& reference, const Mask& mask,
                         const RefineConfig& cfg) {
  cfg.validate();
  if (!view.features) throw InputError("refine_pose needs encoded source features");
  SourceView current = view;
  RefineResult result;
  RefineTrace& trace = result.trace;

  Evaluation eval = evaluate(current, mesh, camera, target, reference, mask, cfg);
  trace.errors.push_back(eval.error.value);
  trace.poses.push_back(current.pose);
  result.pose = view.pose;
  if (eval.error.starved) {
    trace.stop_reason = StopReason::kStarved;
    trace.final_pose = view.pose;
    return result;
  }

  double best_error = eval.error.value;
  int non_improving = 0;
  trace.stop_reason = StopReason::kMaxIters;
  for (int it = 0; it < cfg.max_iters; ++it) {
    const FeatureMap residual = projection_residual(eval.projected, reference, eval.region);
    const PoseGradient grad = pose_gradient(current, mesh, camera, target, eval.projected, residual);
    if (grad.starved || grad.delta.is_zero()) {
      trace.stop_reason = StopReason::kConverged;
      break;
    }
    const Vec3 dt = -cfg.step_delta * cfg.translation_step_m * normalized_or_zero(grad.delta.d_translation);
    const Vec3 de = -cfg.step_delta * cfg.rotation_step_rad * normalized_or_zero(grad.delta.d_euler);
    current.pose = apply_local_increment(current.pose, dt, de);
    if (so3_error(current.pose.rotation()) > 1e-9) throw InvariantError("refined rotation left SO(3)");

    eval = evaluate(current, mesh, camera, target, reference, mask, cfg);
    ++trace.iterations_run;
    trace.errors.push_back(eval.error.value);
    trace.poses.push_back(current.pose);

    if (!eval.error.starved && eval.error.value < best_error) {
      best_error = eval.error.value;
      result.pose = current.pose;
      non_improving = 0;
      continue;
    }
    if (eval.error.starved || ++non_improving >= cfg.patience) {
      trace.stop_reason = StopReason::kConverged;
      break;
    }
  }
  trace.final_pose = result.pose;
  return result;
}

RenderResult render_nol(std::span<const SourceView> views, const TriangleMesh& mesh, const Camera& camera,
                        const RigidPose& target_pose, const RenderOptions& options) {
  if (views.empty() || views.size() > 8) throw InputError("render needs between 1 and 8 source views");
  options.refine.validate();
  const std::size_t k = views.size();

  std::vector<SourceView> encoded(views.begin(), views.end());
  parallel_for(k, options.workers, [&](std::size_t i) {
    if (!encoded[i].features) encoded[i].features = std::make_shared<const FeatureMap>(encode_features(encoded[i], mesh, camera));
  });

  const TargetGeometry target = prepare_target(mesh, target_pose, camera);
  std::vector<ProjectedMap> projected(k);
  parallel_for(k, options.workers, [&](std::size_t i) {
    projected[i] = project_view(encoded[i], mesh, camera, target, static_cast<int>(i), options.refine.visibility_epsilon);
  });
  FusionResult initial = fuse(projected, options.refine.temperature);

  RenderResult result;
  result.initial_rendering = initial.rendering;
  result.initial_mask = initial.union_mask;
  result.rendering = initial.rendering;
  result.union_mask = initial.union_mask;
  for (const SourceView& v : encoded) result.refined_poses.push_back(v.pose);
  if (!options.refine_poses) return result;

  result.traces.resize(k);
  parallel_for(k, options.workers, [&](std::size_t i) {
    RefineResult r = refine_pose(encoded[i], mesh, camera, target, initial.weighted, initial.union_mask,
                                 options.refine);
    result.refined_poses[i] = r.pose;
    result.traces[i] = std::move(r.trace);
  });

  const bool all_starved = std::all_of(result.traces.begin(), result.traces.end(),
                                       [](const RefineTrace& t) { return t.stop_reason == StopReason::kStarved; });
  if (all_starved) {
    result.status = RenderStatus::kAllStarved;
    return result;
  }
  parallel_for(k, options.workers, [&](std::size_t i) {
    if (result.refined_poses[i] == encoded[i].pose) return;
    SourceView moved = encoded[i];
    moved.pose = result.refined_poses[i];
    projected[i] = project_view(moved, mesh, camera, target, static_cast<int>(i), options.refine.visibility_epsilon);
  });
  FusionResult final_fusion = fuse(projected, options.refine.temperature);
  result.rendering = std::move(final_fusion.rendering);
  result.union_mask = std::move(final_fusion.union_mask);
  return result;
}

}  // namespace nol
