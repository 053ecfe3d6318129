#include "nol/pyramid.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "nol/error.hpp"
#include "nol/kernels.hpp"

namespace nol {
namespace {

std::vector<double> gaussian_taps(double sigma, int& radius) {
  radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    taps[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
    sum += taps[k + radius];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

// Planar single-channel buffer used by the separable passes.
struct Plane {
  int height = 0;
  int width = 0;
  std::vector<double> data;
  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * width + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * width + c]; }
};

Plane extract(const Image& image, int channel) {
  Plane p{image.height(), image.width(), std::vector<double>(image.pixel_count())};
  for (std::size_t i = 0; i < image.pixel_count(); ++i) p.data[i] = image.values()[i * image.channels() + channel];
  return p;
}

Plane blur_plane(const Plane& in, double sigma) {
  if (sigma <= 0.0) return in;
  int radius = 0;
  const std::vector<double> taps = gaussian_taps(sigma, radius);
  Plane tmp{in.height, in.width, std::vector<double>(in.data.size())};
  for (int r = 0; r < in.height; ++r) {
    kernels::convolve_row(in.data.data() + static_cast<std::size_t>(r) * in.width,
                          tmp.data.data() + static_cast<std::size_t>(r) * in.width, in.width, taps.data(), radius);
  }
  // Vertical pass on the transpose so it reuses the row kernel.
  Plane t{in.width, in.height, std::vector<double>(in.data.size())};
  for (int r = 0; r < in.height; ++r) {
    for (int c = 0; c < in.width; ++c) t.at(c, r) = tmp.at(r, c);
  }
  Plane t2{in.width, in.height, std::vector<double>(in.data.size())};
  for (int r = 0; r < t.height; ++r) {
    kernels::convolve_row(t.data.data() + static_cast<std::size_t>(r) * t.width,
                          t2.data.data() + static_cast<std::size_t>(r) * t.width, t.width, taps.data(), radius);
  }
  Plane out{in.height, in.width, std::vector<double>(in.data.size())};
  for (int r = 0; r < in.height; ++r) {
    for (int c = 0; c < in.width; ++c) out.at(r, c) = t2.at(c, r);
  }
  return out;
}

// 2x decimation by averaging 2x2 blocks; odd trailing rows/cols are folded in
// by clamping.
Plane downsample(const Plane& in) {
  Plane out{std::max(1, (in.height + 1) / 2), std::max(1, (in.width + 1) / 2), {}};
  out.data.resize(static_cast<std::size_t>(out.height) * out.width);
  for (int r = 0; r < out.height; ++r) {
    for (int c = 0; c < out.width; ++c) {
      const int r0 = std::min(2 * r, in.height - 1), r1 = std::min(2 * r + 1, in.height - 1);
      const int c0 = std::min(2 * c, in.width - 1), c1 = std::min(2 * c + 1, in.width - 1);
      out.at(r, c) = 0.25 * (in.at(r0, c0) + in.at(r0, c1) + in.at(r1, c0) + in.at(r1, c1));
    }
  }
  return out;
}

void gradients(const Plane& in, Plane& gx, Plane& gy) {
  gx = Plane{in.height, in.width, std::vector<double>(in.data.size())};
  gy = gx;
  for (int r = 0; r < in.height; ++r) {
    for (int c = 0; c < in.width; ++c) {
      const int cl = std::max(c - 1, 0), cr = std::min(c + 1, in.width - 1);
      const int ru = std::max(r - 1, 0), rd = std::min(r + 1, in.height - 1);
      gx.at(r, c) = 0.5 * (in.at(r, cr) - in.at(r, cl));
      gy.at(r, c) = 0.5 * (in.at(rd, c) - in.at(ru, c));
    }
  }
}

// Bilinear upsampling of a level with scale factor `factor` back to full
// resolution, aligning pixel centers.
void upsample_into(const Plane& level, int factor, Image& out, int channel) {
  const int h = out.height(), w = out.width();
  for (int r = 0; r < h; ++r) {
    const double y = std::clamp((r + 0.5) / factor - 0.5, 0.0, static_cast<double>(level.height - 1));
    const int y0 = static_cast<int>(std::floor(y));
    const int y1 = std::min(y0 + 1, level.height - 1);
    const double fy = y - y0;
    for (int c = 0; c < w; ++c) {
      const double x = std::clamp((c + 0.5) / factor - 0.5, 0.0, static_cast<double>(level.width - 1));
      const int x0 = static_cast<int>(std::floor(x));
      const int x1 = std::min(x0 + 1, level.width - 1);
      const double fx = x - x0;
      const double top = (1.0 - fx) * level.at(y0, x0) + fx * level.at(y0, x1);
      const double bottom = (1.0 - fx) * level.at(y1, x0) + fx * level.at(y1, x1);
      out.at(r, c, channel) = (1.0 - fy) * top + fy * bottom;
    }
  }
}

void store(const Plane& plane, Image& out, int channel) {
  for (std::size_t i = 0; i < plane.data.size(); ++i) out.values()[i * out.channels() + channel] = plane.data[i];
}

}  // namespace

Image gaussian_blur(const Image& image, double sigma) {
  if (sigma <= 0.0) return image;
  Image out(image.height(), image.width(), image.channels());
  for (int ch = 0; ch < image.channels(); ++ch) store(blur_plane(extract(image, ch), sigma), out, ch);
  return out;
}

Image resize_bilinear(const Image& image, int height, int width) {
  if (height <= 0 || width <= 0) throw InputError("resize target must be positive");
  Image out(height, width, image.channels());
  const double sy = static_cast<double>(image.height()) / height;
  const double sx = static_cast<double>(image.width()) / width;
  for (int r = 0; r < height; ++r) {
    const double y = std::clamp((r + 0.5) * sy - 0.5, 0.0, image.height() - 1.0);
    const int y0 = static_cast<int>(std::floor(y));
    const int y1 = std::min(y0 + 1, image.height() - 1);
    const double fy = y - y0;
    for (int c = 0; c < width; ++c) {
      const double x = std::clamp((c + 0.5) * sx - 0.5, 0.0, image.width() - 1.0);
      const int x0 = static_cast<int>(std::floor(x));
      const int x1 = std::min(x0 + 1, image.width() - 1);
      const double fx = x - x0;
      kernels::bilerp(image.pixel(y0, x0).data(), image.pixel(y0, x1).data(), image.pixel(y1, x0).data(),
                      image.pixel(y1, x1).data(), (1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy,
                      out.pixel(r, c).data(), image.channels());
    }
  }
  return out;
}

Image pyramid_features(const Image& rgb) {
  if (rgb.channels() != 3) throw InputError("pyramid needs a 3-channel image");
  const int h = rgb.height(), w = rgb.width();
  Image out(h, w, 13);

  // Level 0: blurred color and luminance gradient magnitude.
  for (int ch = 0; ch < 3; ++ch) store(blur_plane(extract(rgb, ch), 1.0), out, ch);
  Plane lum = blur_plane(extract(luminance(rgb), 0), 1.0);
  Plane gx, gy;
  gradients(lum, gx, gy);
  Plane mag{h, w, std::vector<double>(lum.data.size())};
  for (std::size_t i = 0; i < mag.data.size(); ++i) mag.data[i] = std::hypot(gx.data[i], gy.data[i]);
  store(mag, out, 3);

  // Levels 1-3: blurred luminance and absolute axis gradients.
  Plane level = lum;
  int factor = 1;
  for (int l = 1; l <= 3; ++l) {
    level = downsample(blur_plane(level, 1.0));
    factor *= 2;
    gradients(level, gx, gy);
    for (double& v : gx.data) v = std::abs(v);
    for (double& v : gy.data) v = std::abs(v);
    const int base = 4 + 3 * (l - 1);
    upsample_into(level, factor, out, base);
    upsample_into(gx, factor, out, base + 1);
    upsample_into(gy, factor, out, base + 2);
  }
  return out;
}

}  // namespace nol
