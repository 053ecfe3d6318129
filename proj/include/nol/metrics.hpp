#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nol/geometry.hpp"
#include "nol/image.hpp"
#include "nol/refine.hpp"
#include "nol/scenegen.hpp"

namespace nol {

inline constexpr double kPoseThresholdFraction = 0.1;

struct PoseEvalResult {
  double add_mm = 0.0;
  double adi_mm = 0.0;
  bool correct = false;
  double diameter_mm = 0.0;
  double threshold_fraction = kPoseThresholdFraction;
};

/// Mean vertex displacement between the two poses, millimeters.
double add_score(const TriangleMesh& mesh, const RigidPose& pose_gt, const RigidPose& pose_est);
/// Mean distance from each ground-truth vertex to the nearest estimated
/// vertex (exact all-pairs search), millimeters.
double adi_score(const TriangleMesh& mesh, const RigidPose& pose_gt, const RigidPose& pose_est);
/// score < fraction * diameter (strict). Throws InputError if diameter <= 0.
bool pose_correct(double score_mm, double diameter_mm, double fraction = kPoseThresholdFraction);

PoseEvalResult evaluate_pose(const TriangleMesh& mesh, const RigidPose& pose_gt, const RigidPose& pose_est,
                             bool symmetric = false, double fraction = kPoseThresholdFraction);

inline constexpr double kPsnrCap = 99.0;

struct ImageMetrics {
  double l1 = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
};

/// Masked mean absolute error, PSNR (peak 1, capped at kPsnrCap) and mean
/// SSIM over 8x8 windows that contain at least one mask pixel.
ImageMetrics image_metrics(const Image& pred, const Image& gt, const Mask& mask);

struct ErrorLevel {
  double trans_m = 0.0;
  double rot_rad = 0.0;
  bool operator==(const ErrorLevel&) const = default;
};

struct SweepConfig {
  std::vector<PrimitiveKind> shapes{PrimitiveKind::kBox, PrimitiveKind::kCylinder};
  std::vector<ErrorLevel> levels;
  int trials = 50;
  int n_sources = 5;
  std::uint64_t seed = 0;
  int workers = 1;
  TrialConfig trial;
  RefineConfig refine;

  /// 5 x 5 grid over translation 0..0.01 m and rotation 0..0.05 rad.
  static std::vector<ErrorLevel> default_grid();
};

struct TrialOutcome {
  PrimitiveKind shape = PrimitiveKind::kBox;
  ErrorLevel level;
  int trial = 0;
  std::uint64_t seed = 0;
  ImageMetrics refined;
  ImageMetrics unrefined;
};

struct MetricSummary {
  double refined_mean = 0.0;
  double refined_std = 0.0;
  double unrefined_mean = 0.0;
  double unrefined_std = 0.0;
};

struct SweepCell {
  PrimitiveKind shape = PrimitiveKind::kBox;
  ErrorLevel level;
  int count = 0;
  MetricSummary l1;
  MetricSummary psnr;
  MetricSummary ssim;
  std::vector<std::uint64_t> seeds;
};

struct SweepReport {
  std::vector<SweepCell> cells;
  std::vector<TrialOutcome> trials;
};

/// Seed of one trial. Independent of the error level, so every level of a
/// sweep renders the same scenes.
std::uint64_t trial_seed(std::uint64_t sweep_seed, PrimitiveKind shape, std::size_t level_index, int trial);

/// Builds one trial set and renders it with and without refinement,
/// comparing against the ground-truth target inside its silhouette.
TrialOutcome run_trial(PrimitiveKind shape, const ErrorLevel& level, int trial, std::uint64_t seed,
                       const SweepConfig& cfg);

SweepReport sensitivity_sweep(const SweepConfig& cfg);

std::string sweep_csv(const SweepReport& report);
std::string sweep_trials_csv(const SweepReport& report);

/// Spearman rank correlation (average ranks for ties).
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace nol
