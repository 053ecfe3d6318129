#pragma once

#include <span>
#include <vector>

#include "nol/image.hpp"
#include "nol/raster.hpp"

namespace nol {

/// Weight on the color term, the pyramid-feature term and the smoothness term.
struct LossWeights {
  double lambda_i = 5.0;
  double lambda_f = 10.0;
  double lambda_s = 1.0;

  void validate() const;
};

/// Default softmax temperature, in [0, 1] color units.
inline constexpr double kDefaultTemperature = 0.05;

struct FusionResult {
  FeatureMap integrated;              // X^I
  std::vector<Image> weights;         // W^k, 1 channel each
  FeatureMap weighted;                // X^S
  Image rendering;                    // X^D: channels 0-2 of X^S
  Mask union_mask;                    // M^D
};

/// Per pixel-channel median over the views valid at each pixel. Throws
/// InputError on an empty list or mismatched shapes.
FeatureMap integrate(std::span<const ProjectedMap> projected);

/// Softmax over valid views of -|P^k - X^I|_1 / (C * temperature).
std::vector<Image> compute_weights(std::span<const ProjectedMap> projected, const FeatureMap& integrated,
                                   double temperature = kDefaultTemperature);

struct BlendResult {
  FeatureMap weighted;
  Image rendering;
  Mask union_mask;
};

BlendResult weighted_blend(std::span<const ProjectedMap> projected, std::span<const Image> weights);

/// integrate -> compute_weights -> weighted_blend.
FusionResult fuse(std::span<const ProjectedMap> projected, double temperature = kDefaultTemperature);

/// Masked color L1 plus pyramid-feature L1, averaged over the mask.
double image_loss(const Image& pred, const Image& target, const Mask& mask, const LossWeights& weights);

/// Masked mean of |4-neighbor Laplacian| summed over channels, scaled by
/// lambda_s. Neighbors outside the mask or image take the center value.
double smooth_loss(const Image& weighted, const Mask& mask, double lambda_s);

}  // namespace nol
