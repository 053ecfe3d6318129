#pragma once

#include <filesystem>
#include <string>

#include "nol/image.hpp"

namespace nol {

/// 8-bit PNG to [0, 1]. Gray and gray-alpha expand to RGB; alpha is dropped.
Image read_png(const std::filesystem::path& path);
/// Nonzero luminance -> true.
Mask read_mask_png(const std::filesystem::path& path);

/// Rounds to 8 bits. Images with 1 or 3 channels only.
std::string encode_png(const Image& image);
std::string encode_mask_png(const Mask& mask);
Image decode_png(const std::string& bytes);

/// Flat little-endian dump: uint32 H, W, C, then H*W*C float32 values.
std::string encode_feature_dump(const Image& values);
Image decode_feature_dump(const std::string& bytes);

/// Quantizes to what an 8-bit PNG round trip would produce.
Image quantize_8bit(const Image& image);

}  // namespace nol
