#pragma once

#include "nol/image.hpp"

namespace nol {

/// Separable Gaussian blur of every channel with replicate borders.
Image gaussian_blur(const Image& image, double sigma);

/// Fixed multi-scale feature pyramid of a 3-channel image, 13 channels at
/// full resolution:
///   level 0: blurred R, G, B and luminance gradient magnitude (4)
///   levels 1-3: blurred luminance, |d/dx|, |d/dy| (3 each)
/// Coarser levels are blurred and decimated by 2 per level, then brought
/// back to full resolution by bilinear interpolation.
Image pyramid_features(const Image& rgb);

/// Bilinear resize with pixel-center alignment.
Image resize_bilinear(const Image& image, int height, int width);

}  // namespace nol
