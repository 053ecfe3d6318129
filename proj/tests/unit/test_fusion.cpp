#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "nol/error.hpp"
#include "nol/fusion.hpp"
#include "nol/rng.hpp"
#include "scenes.hpp"

using namespace nol;

namespace {

std::vector<ProjectedMap> random_maps(int k, int h, int w, int channels, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ProjectedMap> maps(k);
  for (int i = 0; i < k; ++i) {
    maps[i].features = FeatureMap(h, w, channels);
    maps[i].source_index = i;
    for (std::size_t p = 0; p < maps[i].features.valid.pixel_count(); ++p) {
      if (rng.uniform() < 0.3) continue;
      maps[i].features.valid.set(p, true);
      for (double& x : maps[i].features.values.pixel(p)) x = rng.uniform();
    }
  }
  return maps;
}

ProjectedMap constant_map(double value, int channels = 1) {
  ProjectedMap m;
  m.features = FeatureMap(1, 1, channels);
  m.features.valid.set(0, true);
  for (double& x : m.features.values.pixel(0)) x = value;
  return m;
}

}  // namespace

TEST_CASE("median integration") {
  const auto maps = random_maps(5, 8, 9, 4, 1);
  const FeatureMap xi = integrate(maps);
  for (std::size_t p = 0; p < xi.valid.pixel_count(); ++p) {
    std::vector<const ProjectedMap*> valid;
    for (const auto& m : maps) {
      if (m.valid()[p]) valid.push_back(&m);
    }
    CHECK(xi.valid[p] == !valid.empty());
    for (int c = 0; c < 4; ++c) {
      if (valid.empty()) {
        CHECK(xi.values.pixel(p)[c] == 0.0);
        continue;
      }
      std::vector<double> s;
      for (const auto* m : valid) s.push_back(m->features.values.pixel(p)[c]);
      std::sort(s.begin(), s.end());
      const std::size_t n = s.size();
      const double median = n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
      CHECK(xi.values.pixel(p)[c] == median);
    }
  }
  CHECK_THROWS_AS(integrate(std::span<const ProjectedMap>{}), InputError);
  auto mismatched = random_maps(2, 4, 4, 3, 2);
  mismatched[1].features = FeatureMap(4, 5, 3);
  CHECK_THROWS_AS(integrate(mismatched), InputError);
}

TEST_CASE("weights sum to one on the union mask") {
  for (int k = 1; k <= 8; ++k) {
    const auto maps = random_maps(k, 16, 16, kFeatureChannels, 10 + k);
    const FusionResult fr = fuse(maps);
    REQUIRE(fr.weights.size() == static_cast<std::size_t>(k));
    for (std::size_t p = 0; p < fr.union_mask.pixel_count(); ++p) {
      double sum = 0.0;
      for (int i = 0; i < k; ++i) {
        const double w = fr.weights[i].pixel(p)[0];
        CHECK(w >= 0.0);
        if (!maps[i].valid()[p]) CHECK(w == 0.0);
        sum += w;
      }
      if (fr.union_mask[p]) {
        CHECK(std::abs(sum - 1.0) < 1e-6);
      } else {
        CHECK(sum == 0.0);
      }
    }
  }
}

TEST_CASE("weighted map is a convex combination") {
  const auto maps = random_maps(6, 32, 32, 5, 3);
  const FusionResult fr = fuse(maps);
  for (std::size_t p = 0; p < fr.union_mask.pixel_count(); ++p) {
    if (!fr.union_mask[p]) continue;
    for (int c = 0; c < 5; ++c) {
      double lo = 1e9, hi = -1e9;
      for (const auto& m : maps) {
        if (!m.valid()[p]) continue;
        lo = std::min(lo, m.features.values.pixel(p)[c]);
        hi = std::max(hi, m.features.values.pixel(p)[c]);
      }
      const double x = fr.weighted.values.pixel(p)[c];
      CHECK(x >= lo - 1e-12);
      CHECK(x <= hi + 1e-12);
    }
  }
  CHECK(fr.rendering.channels() == 3);
  CHECK(fr.rendering == fr.weighted.values.slice_channels(0, 3));
}

TEST_CASE("fusion is invariant to view order") {
  auto maps = random_maps(5, 12, 12, kFeatureChannels, 4);
  const FusionResult a = fuse(maps);
  std::vector<ProjectedMap> shuffled = {maps[3], maps[0], maps[4], maps[2], maps[1]};
  const FusionResult b = fuse(shuffled);
  CHECK(a.union_mask == b.union_mask);
  CHECK(a.integrated == b.integrated);
  for (std::size_t i = 0; i < a.weighted.values.values().size(); ++i) {
    CHECK(std::abs(a.weighted.values.values()[i] - b.weighted.values.values()[i]) < 1e-12);
  }
}

TEST_CASE("softmax weights closed form") {
  // One channel, three views; the median is 0.55.
  const std::vector<ProjectedMap> maps = {constant_map(0.5), constant_map(0.55), constant_map(1.0)};
  const FusionResult fr = fuse(maps, 0.05);
  const double e[3] = {std::exp(-1.0), 1.0, std::exp(-9.0)};
  const double z = e[0] + e[1] + e[2];
  for (int i = 0; i < 3; ++i) CHECK(fr.weights[i].pixel(0)[0] == doctest::Approx(e[i] / z).epsilon(1e-12));
  CHECK(fr.integrated.values.pixel(0)[0] == 0.55);

  // Two equidistant views share the weight.
  const std::vector<ProjectedMap> pair = {constant_map(0.2, 3), constant_map(0.6, 3)};
  const FusionResult fp = fuse(pair);
  CHECK(fp.weights[0].pixel(0)[0] == doctest::Approx(0.5));
  CHECK(fp.rendering.pixel(0)[0] == doctest::Approx(0.4));

  CHECK_THROWS_AS(compute_weights(maps, fr.integrated, 0.0), InputError);
}

TEST_CASE("image loss") {
  const Image a = testing::random_image(24, 24, 3, 7);
  const Mask all(24, 24, true);
  CHECK(image_loss(a, a, all, {}) == 0.0);
  Image b = a;
  for (double& x : b.values()) x += 0.1;
  LossWeights color_only;
  color_only.lambda_f = 0.0;
  CHECK(image_loss(b, a, all, color_only) == doctest::Approx(5.0 * 0.3));
  CHECK(image_loss(b, a, all, {}) > image_loss(b, a, all, color_only));
  CHECK_THROWS_AS(image_loss(a, a, Mask(24, 24), {}), InputError);
  LossWeights bad;
  bad.lambda_i = -1.0;
  CHECK_THROWS_AS(image_loss(a, a, all, bad), InputError);
}

TEST_CASE("smooth loss") {
  const int h = 20, w = 20;
  Mask mask(h, w, true);
  CHECK(smooth_loss(Image(h, w, 3, 0.7), mask, 1.0) < 1e-12);

  // Affine maps have a zero Laplacian inside; only the replicated border
  // neighbors contribute.
  const double sx = 0.01, sy = 0.02;
  Image ramp(h, w, 1);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) ramp.at(r, c, 0) = 0.1 + sx * c + sy * r;
  }
  double border = 0.0;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double dx = c == 0 ? sx : (c == w - 1 ? -sx : 0.0);
      const double dy = r == 0 ? sy : (r == h - 1 ? -sy : 0.0);
      border += std::abs(dx + dy);
    }
  }
  CHECK(std::abs(smooth_loss(ramp, mask, 1.0) * mask.count() - border) < 1e-6);

  Mask window(h, w);
  for (int r = 5; r < 15; ++r) {
    for (int c = 5; c < 15; ++c) window.set(r, c, true);
  }
  Image offset = ramp;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!window(r, c)) offset.at(r, c, 0) = 7.0;
    }
  }
  CHECK(smooth_loss(offset, window, 1.0) == doctest::Approx(smooth_loss(ramp, window, 1.0)).epsilon(1e-12));

  Image impulse(h, w, 1, 0.0);
  impulse.at(10, 10, 0) = 1.0;
  CHECK(smooth_loss(impulse, mask, 1.0) == doctest::Approx(8.0 / mask.count()).epsilon(1e-12));
  CHECK(smooth_loss(impulse, mask, 2.5) == doctest::Approx(20.0 / mask.count()).epsilon(1e-12));
  CHECK_THROWS_AS(smooth_loss(impulse, Mask(h, w), 1.0), InputError);
}
