#include "nol/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "nol/error.hpp"
#include "nol/kernels.hpp"
#include "nol/parallel.hpp"
#include "nol/rng.hpp"

namespace nol {
namespace {

constexpr double kSsimC1 = 0.01 * 0.01;
constexpr double kSsimC2 = 0.03 * 0.03;
constexpr int kSsimWindow = 8;

void check_image_pair(const Image& pred, const Image& gt, const Mask& mask) {
  if (!pred.same_shape(gt)) throw InputError("image shapes differ");
  if (mask.height() != pred.height() || mask.width() != pred.width()) throw InputError("mask shape mismatch");
  if (mask.count() == 0) throw InputError("empty evaluation region");
}

double masked_ssim(const Image& pred, const Image& gt, const Mask& mask) {
  const int h = pred.height(), w = pred.width(), channels = pred.channels();
  const int win_h = std::min(kSsimWindow, h), win_w = std::min(kSsimWindow, w);
  double total = 0.0;
  std::size_t windows = 0;
  for (int r0 = 0; r0 + win_h <= h; ++r0) {
    for (int c0 = 0; c0 + win_w <= w; ++c0) {
      int n = 0;
      for (int r = r0; r < r0 + win_h; ++r) {
        for (int c = c0; c < c0 + win_w; ++c) n += mask(r, c) ? 1 : 0;
      }
      if (n == 0) continue;
      for (int ch = 0; ch < channels; ++ch) {
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (int r = r0; r < r0 + win_h; ++r) {
          for (int c = c0; c < c0 + win_w; ++c) {
            if (!mask(r, c)) continue;
            const double x = pred.at(r, c, ch), y = gt.at(r, c, ch);
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
          }
        }
        const double mx = sx / n, my = sy / n;
        const double vx = std::max(0.0, sxx / n - mx * mx), vy = std::max(0.0, syy / n - my * my);
        const double cov = sxy / n - mx * my;
        total += ((2 * mx * my + kSsimC1) * (2 * cov + kSsimC2)) /
                 ((mx * mx + my * my + kSsimC1) * (vx + vy + kSsimC2));
        ++windows;
      }
    }
  }
  return total / static_cast<double>(windows);
}

MetricSummary summarize(const std::vector<double>& refined, const std::vector<double>& unrefined) {
  auto mean_std = [](const std::vector<double>& v, double& mean, double& stddev) {
    mean = v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    stddev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  };
  MetricSummary s;
  mean_std(refined, s.refined_mean, s.refined_std);
  mean_std(unrefined, s.unrefined_mean, s.unrefined_std);
  return s;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double add_score(const TriangleMesh& mesh, const RigidPose& pose_gt, const RigidPose& pose_est) {
  double sum = 0.0;
  for (const Vec3& v : mesh.vertices()) sum += (pose_gt.apply(v) - pose_est.apply(v)).norm();
  return 1000.0 * sum / static_cast<double>(mesh.vertices().size());
}

double adi_score(const TriangleMesh& mesh, const RigidPose& pose_gt, const RigidPose& pose_est) {
  std::vector<Vec3> est;
  est.reserve(mesh.vertices().size());
  for (const Vec3& v : mesh.vertices()) est.push_back(pose_est.apply(v));
  double sum = 0.0;
  for (const Vec3& v : mesh.vertices()) {
    const Vec3 g = pose_gt.apply(v);
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& e : est) best = std::min(best, (g - e).squaredNorm());
    sum += std::sqrt(best);
  }
  return 1000.0 * sum / static_cast<double>(mesh.vertices().size());
}

bool pose_correct(double score_mm, double diameter_mm, double fraction) {
  if (!(diameter_mm > 0.0)) throw InputError("diameter must be positive");
  return score_mm < fraction * diameter_mm;
}

PoseEvalResult evaluate_pose(const TriangleMesh& mesh, const RigidPose& pose_gt, const RigidPose& pose_est,
                             bool symmetric, double fraction) {
  PoseEvalResult r;
  r.add_mm = add_score(mesh, pose_gt, pose_est);
  r.adi_mm = adi_score(mesh, pose_gt, pose_est);
  r.diameter_mm = mesh.diameter() * 1000.0;
  r.threshold_fraction = fraction;
  r.correct = pose_correct(symmetric ? r.adi_mm : r.add_mm, r.diameter_mm, fraction);
  return r;
}

ImageMetrics image_metrics(const Image& pred, const Image& gt, const Mask& mask) {
  check_image_pair(pred, gt, mask);
  const int channels = pred.channels();
  double abs_sum = 0.0, sq_sum = 0.0;
  for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
    if (!mask[p]) continue;
    abs_sum += kernels::l1_distance(pred.pixel(p).data(), gt.pixel(p).data(), channels);
    for (int c = 0; c < channels; ++c) {
      const double d = pred.pixel(p)[c] - gt.pixel(p)[c];
      sq_sum += d * d;
    }
  }
  const double n = static_cast<double>(mask.count()) * channels;
  ImageMetrics m;
  m.l1 = abs_sum / n;
  const double mse = sq_sum / n;
  m.psnr = mse > 0.0 ? std::min(kPsnrCap, -10.0 * std::log10(mse)) : kPsnrCap;
  m.ssim = masked_ssim(pred, gt, mask);
  return m;
}

std::vector<ErrorLevel> SweepConfig::default_grid() {
  std::vector<ErrorLevel> levels;
  for (int t = 0; t < 5; ++t) {
    for (int r = 0; r < 5; ++r) levels.push_back({0.0025 * t, 0.0125 * r});
  }
  return levels;
}

std::uint64_t trial_seed(std::uint64_t sweep_seed, PrimitiveKind shape, std::size_t /*level_index*/, int trial) {
  // Every error level reuses the same scenes so cells differ only in the
  // injected error magnitude.
  return derive_seed(derive_seed(sweep_seed, static_cast<std::uint64_t>(shape) + 1),
                     static_cast<std::uint64_t>(trial));
}

TrialOutcome run_trial(PrimitiveKind shape, const ErrorLevel& level, int trial, std::uint64_t seed,
                       const SweepConfig& cfg) {
  const RigidPose target = random_target_pose(derive_seed(seed, 7), cfg.trial);
  const TrialSet set = make_trial_set(shape, target, cfg.n_sources, level.trans_m, level.rot_rad, seed, cfg.trial);
  const std::vector<SourceView> views = set.source_views(true);
  RenderOptions options;
  options.refine = cfg.refine;
  options.refine_poses = true;
  const RenderResult render = render_nol(views, set.object.mesh, set.camera, set.target_pose, options);
  TrialOutcome out;
  out.shape = shape;
  out.level = level;
  out.trial = trial;
  out.seed = seed;
  out.refined = image_metrics(render.rendering, set.target_image, set.target_mask);
  out.unrefined = image_metrics(render.initial_rendering, set.target_image, set.target_mask);
  return out;
}

SweepReport sensitivity_sweep(const SweepConfig& cfg) {
  if (cfg.levels.empty()) throw InputError("sweep needs at least one error level");
  if (cfg.trials < 1) throw InputError("sweep needs at least one trial per cell");
  struct Job {
    PrimitiveKind shape;
    std::size_t level;
    int trial;
  };
  std::vector<Job> jobs;
  for (PrimitiveKind shape : cfg.shapes) {
    for (std::size_t l = 0; l < cfg.levels.size(); ++l) {
      for (int t = 0; t < cfg.trials; ++t) jobs.push_back({shape, l, t});
    }
  }
  SweepReport report;
  report.trials.resize(jobs.size());
  parallel_for(jobs.size(), cfg.workers, [&](std::size_t i) {
    const Job& job = jobs[i];
    report.trials[i] = run_trial(job.shape, cfg.levels[job.level], job.trial,
                                 trial_seed(cfg.seed, job.shape, job.level, job.trial), cfg);
  });

  std::size_t offset = 0;
  for (PrimitiveKind shape : cfg.shapes) {
    for (const ErrorLevel& level : cfg.levels) {
      SweepCell cell;
      cell.shape = shape;
      cell.level = level;
      cell.count = cfg.trials;
      std::vector<double> rl1, ul1, rpsnr, upsnr, rssim, ussim;
      for (int t = 0; t < cfg.trials; ++t) {
        const TrialOutcome& o = report.trials[offset + t];
        rl1.push_back(o.refined.l1);
        ul1.push_back(o.unrefined.l1);
        rpsnr.push_back(o.refined.psnr);
        upsnr.push_back(o.unrefined.psnr);
        rssim.push_back(o.refined.ssim);
        ussim.push_back(o.unrefined.ssim);
        cell.seeds.push_back(o.seed);
      }
      cell.l1 = summarize(rl1, ul1);
      cell.psnr = summarize(rpsnr, upsnr);
      cell.ssim = summarize(rssim, ussim);
      report.cells.push_back(std::move(cell));
      offset += cfg.trials;
    }
  }
  return report;
}

std::string sweep_csv(const SweepReport& report) {
  std::ostringstream out;
  out << "shape,trans_err,rot_err,metric,refined_mean,refined_std,unrefined_mean,unrefined_std,n\n";
  for (const SweepCell& cell : report.cells) {
    const std::pair<const char*, const MetricSummary*> metrics[] = {
        {"l1", &cell.l1}, {"psnr", &cell.psnr}, {"ssim", &cell.ssim}};
    for (const auto& [name, s] : metrics) {
      out << to_string(cell.shape) << ',' << fmt(cell.level.trans_m) << ',' << fmt(cell.level.rot_rad) << ','
          << name << ',' << fmt(s->refined_mean) << ',' << fmt(s->refined_std) << ',' << fmt(s->unrefined_mean)
          << ',' << fmt(s->unrefined_std) << ',' << cell.count << '\n';
    }
  }
  return out.str();
}

std::string sweep_trials_csv(const SweepReport& report) {
  std::ostringstream out;
  out << "shape,trans_err,rot_err,trial,seed,refined_l1,unrefined_l1,refined_psnr,unrefined_psnr,refined_ssim,"
         "unrefined_ssim\n";
  for (const TrialOutcome& t : report.trials) {
    out << to_string(t.shape) << ',' << fmt(t.level.trans_m) << ',' << fmt(t.level.rot_rad) << ',' << t.trial << ','
        << t.seed << ',' << fmt(t.refined.l1) << ',' << fmt(t.unrefined.l1) << ',' << fmt(t.refined.psnr) << ','
        << fmt(t.unrefined.psnr) << ',' << fmt(t.refined.ssim) << ',' << fmt(t.unrefined.ssim) << '\n';
  }
  return out.str();
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("spearman needs two equal-length series");
  const std::vector<double> rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace nol
