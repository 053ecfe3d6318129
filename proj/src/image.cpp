#include "nol/image.hpp"

#include <algorithm>

#include "nol/error.hpp"

namespace nol {

Image::Image(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  if (height < 0 || width < 0 || channels <= 0) throw InputError("invalid image dimensions");
  values_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

Image Image::slice_channels(int first, int count) const {
  if (first < 0 || count <= 0 || first + count > channels_) throw InputError("channel slice out of range");
  Image out(height_, width_, count);
  for (std::size_t p = 0; p < pixel_count(); ++p) {
    std::copy_n(values_.data() + p * channels_ + first, count, out.values_.data() + p * count);
  }
  return out;
}

std::size_t Mask::count() const { return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1)); }

void FeatureMap::clear_invalid() {
  const int c = channels();
  for (std::size_t p = 0; p < valid.pixel_count(); ++p) {
    if (!valid[p]) std::fill_n(values.values().data() + p * c, c, 0.0);
  }
}

Mask mask_union(const Mask& a, const Mask& b) {
  if (!a.same_shape(b)) throw InputError("mask shapes differ");
  Mask out(a.height(), a.width());
  for (std::size_t p = 0; p < a.pixel_count(); ++p) out.set(p, a[p] || b[p]);
  return out;
}

Mask mask_intersection(const Mask& a, const Mask& b) {
  if (!a.same_shape(b)) throw InputError("mask shapes differ");
  Mask out(a.height(), a.width());
  for (std::size_t p = 0; p < a.pixel_count(); ++p) out.set(p, a[p] && b[p]);
  return out;
}

Image luminance(const Image& rgb) {
  if (rgb.channels() != 3) throw InputError("luminance needs a 3-channel image");
  Image out(rgb.height(), rgb.width(), 1);
  for (std::size_t p = 0; p < rgb.pixel_count(); ++p) {
    const auto px = rgb.pixel(p);
    out.values()[p] = 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
  }
  return out;
}

}  // namespace nol
