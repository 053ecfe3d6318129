#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nol {

/// Dense H x W x C image of doubles, channels interleaved per pixel.
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels, double fill = 0.0);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(height_) * width_; }
  bool empty() const { return values_.empty(); }

  double& at(int row, int col, int ch) { return values_[index(row, col) + ch]; }
  double at(int row, int col, int ch) const { return values_[index(row, col) + ch]; }

  std::span<double> pixel(int row, int col) { return {values_.data() + index(row, col), static_cast<std::size_t>(channels_)}; }
  std::span<const double> pixel(int row, int col) const {
    return {values_.data() + index(row, col), static_cast<std::size_t>(channels_)};
  }
  std::span<double> pixel(std::size_t p) { return {values_.data() + p * channels_, static_cast<std::size_t>(channels_)}; }
  std::span<const double> pixel(std::size_t p) const {
    return {values_.data() + p * channels_, static_cast<std::size_t>(channels_)};
  }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  bool same_shape(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }

  /// Copies channels [first, first + count) into a new image.
  Image slice_channels(int first, int count) const;

  bool operator==(const Image&) const = default;

 private:
  std::size_t index(int row, int col) const {
    return (static_cast<std::size_t>(row) * width_ + col) * channels_;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<double> values_;
};

/// Per-pixel boolean mask.
class Mask {
 public:
  Mask() = default;
  Mask(int height, int width, bool fill = false)
      : height_(height), width_(width), bits_(static_cast<std::size_t>(height) * width, fill ? 1 : 0) {}

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t pixel_count() const { return bits_.size(); }

  bool operator()(int row, int col) const { return bits_[static_cast<std::size_t>(row) * width_ + col] != 0; }
  bool operator[](std::size_t p) const { return bits_[p] != 0; }
  void set(int row, int col, bool v) { bits_[static_cast<std::size_t>(row) * width_ + col] = v ? 1 : 0; }
  void set(std::size_t p, bool v) { bits_[p] = v ? 1 : 0; }

  bool contains(int row, int col) const { return row >= 0 && col >= 0 && row < height_ && col < width_; }
  std::size_t count() const;
  bool same_shape(const Mask& other) const { return height_ == other.height_ && width_ == other.width_; }

  const std::vector<std::uint8_t>& bits() const { return bits_; }

  bool operator==(const Mask&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Multi-channel map plus a validity mask; invalid pixels hold zeros.
struct FeatureMap {
  Image values;
  Mask valid;

  FeatureMap() = default;
  FeatureMap(int height, int width, int channels)
      : values(height, width, channels), valid(height, width, false) {}

  int height() const { return values.height(); }
  int width() const { return values.width(); }
  int channels() const { return values.channels(); }

  /// Zeroes every channel of invalid pixels.
  void clear_invalid();

  bool operator==(const FeatureMap&) const = default;
};

Mask mask_union(const Mask& a, const Mask& b);
Mask mask_intersection(const Mask& a, const Mask& b);

/// Luminance (Rec. 601 weights) of a 3-channel image as a 1-channel image.
Image luminance(const Image& rgb);

}  // namespace nol
