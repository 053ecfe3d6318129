#include "nol/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nol/error.hpp"
#include "nol/kernels.hpp"
#include "nol/pyramid.hpp"

namespace nol {
namespace {

void check_same_shape(std::span<const ProjectedMap> projected) {
  if (projected.empty()) throw InputError("no views");
  const FeatureMap& first = projected.front().features;
  for (const ProjectedMap& p : projected) {
    if (!p.features.values.same_shape(first.values)) throw InputError("projected maps differ in shape");
  }
}

}  // namespace

void LossWeights::validate() const {
  if (lambda_i < 0.0 || lambda_f < 0.0 || lambda_s < 0.0) throw InputError("loss weights must be nonnegative");
}

FeatureMap integrate(std::span<const ProjectedMap> projected) {
  check_same_shape(projected);
  const FeatureMap& first = projected.front().features;
  const int channels = first.channels();
  FeatureMap out(first.height(), first.width(), channels);
  std::vector<double> samples;
  samples.reserve(projected.size());
  for (std::size_t p = 0; p < first.valid.pixel_count(); ++p) {
    bool any = false;
    for (const ProjectedMap& m : projected) any = any || m.valid()[p];
    if (!any) continue;
    out.valid.set(p, true);
    auto dst = out.values.pixel(p);
    for (int c = 0; c < channels; ++c) {
      samples.clear();
      for (const ProjectedMap& m : projected) {
        if (m.valid()[p]) samples.push_back(m.features.values.pixel(p)[c]);
      }
      std::sort(samples.begin(), samples.end());
      const std::size_t n = samples.size();
      dst[c] = n % 2 == 1 ? samples[n / 2] : 0.5 * (samples[n / 2 - 1] + samples[n / 2]);
    }
  }
  return out;
}

std::vector<Image> compute_weights(std::span<const ProjectedMap> projected, const FeatureMap& integrated,
                                   double temperature) {
  check_same_shape(projected);
  if (!(temperature > 0.0)) throw InputError("temperature must be positive");
  if (!integrated.values.same_shape(projected.front().features.values)) {
    throw InputError("integrated map does not match the projected maps");
  }
  const int channels = integrated.channels();
  const std::size_t k = projected.size();
  std::vector<Image> weights(k, Image(integrated.height(), integrated.width(), 1));
  std::vector<double> logits(k);
  const double scale = 1.0 / (channels * temperature);
  for (std::size_t p = 0; p < integrated.valid.pixel_count(); ++p) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) {
      if (!projected[i].valid()[p]) continue;
      logits[i] = -kernels::l1_distance(projected[i].features.values.pixel(p).data(),
                                        integrated.values.pixel(p).data(), channels) *
                  scale;
      best = std::max(best, logits[i]);
    }
    if (!std::isfinite(best)) continue;
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (!projected[i].valid()[p]) continue;
      logits[i] = std::exp(logits[i] - best);
      sum += logits[i];
    }
    for (std::size_t i = 0; i < k; ++i) {
      if (projected[i].valid()[p]) weights[i].values()[p] = logits[i] / sum;
    }
  }
  return weights;
}

BlendResult weighted_blend(std::span<const ProjectedMap> projected, std::span<const Image> weights) {
  check_same_shape(projected);
  if (weights.size() != projected.size()) throw InputError("one weight map per view is required");
  const FeatureMap& first = projected.front().features;
  const int channels = first.channels();
  BlendResult out;
  out.weighted = FeatureMap(first.height(), first.width(), channels);
  for (std::size_t p = 0; p < first.valid.pixel_count(); ++p) {
    double* dst = out.weighted.values.pixel(p).data();
    for (std::size_t i = 0; i < projected.size(); ++i) {
      if (!projected[i].valid()[p]) continue;
      out.weighted.valid.set(p, true);
      kernels::axpy(weights[i].values()[p], projected[i].features.values.pixel(p).data(), dst, channels);
    }
  }
  out.union_mask = out.weighted.valid;
  out.rendering = out.weighted.values.slice_channels(0, std::min(channels, kColorChannels));
  return out;
}

FusionResult fuse(std::span<const ProjectedMap> projected, double temperature) {
  FusionResult out;
  out.integrated = integrate(projected);
  out.weights = compute_weights(projected, out.integrated, temperature);
  BlendResult blend = weighted_blend(projected, out.weights);
  out.weighted = std::move(blend.weighted);
  out.rendering = std::move(blend.rendering);
  out.union_mask = std::move(blend.union_mask);
  return out;
}

double image_loss(const Image& pred, const Image& target, const Mask& mask, const LossWeights& w) {
  w.validate();
  if (!pred.same_shape(target) || pred.channels() != 3) throw InputError("image_loss needs matching RGB images");
  if (mask.height() != pred.height() || mask.width() != pred.width()) throw InputError("mask shape mismatch");
  const std::size_t count = mask.count();
  if (count == 0) throw InputError("empty evaluation region");
  Image pred_features, target_features;
  if (w.lambda_f != 0.0) {
    pred_features = pyramid_features(pred);
    target_features = pyramid_features(target);
  }
  double sum = 0.0;
  for (std::size_t p = 0; p < mask.pixel_count(); ++p) {
    if (!mask[p]) continue;
    sum += w.lambda_i * kernels::l1_distance(pred.pixel(p).data(), target.pixel(p).data(), 3);
    if (w.lambda_f != 0.0) {
      sum += w.lambda_f * kernels::l1_distance(pred_features.pixel(p).data(), target_features.pixel(p).data(),
                                               pred_features.channels());
    }
  }
  return sum / static_cast<double>(count);
}

double smooth_loss(const Image& weighted, const Mask& mask, double lambda_s) {
  if (lambda_s < 0.0) throw InputError("lambda_s must be nonnegative");
  if (mask.height() != weighted.height() || mask.width() != weighted.width()) {
    throw InputError("mask shape mismatch");
  }
  const std::size_t count = mask.count();
  if (count == 0) throw InputError("empty evaluation region");
  const int h = weighted.height(), w = weighted.width(), channels = weighted.channels();
  std::vector<double> lap(channels);
  double sum = 0.0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!mask(r, c)) continue;
      const auto center = weighted.pixel(r, c);
      for (int ch = 0; ch < channels; ++ch) lap[ch] = -4.0 * center[ch];
      const int nr[4] = {r - 1, r + 1, r, r};
      const int nc[4] = {c, c, c - 1, c + 1};
      for (int k = 0; k < 4; ++k) {
        const bool inside = mask.contains(nr[k], nc[k]) && mask(nr[k], nc[k]);
        const auto neighbor = inside ? weighted.pixel(nr[k], nc[k]) : center;
        for (int ch = 0; ch < channels; ++ch) lap[ch] += neighbor[ch];
      }
      sum += kernels::abs_sum(lap.data(), lap.size());
    }
  }
  return lambda_s * sum / static_cast<double>(count);
}

}  // namespace nol
