#include "nol/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "nol/error.hpp"
#include "nol/serialize.hpp"

namespace nol {
namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

std::string encode_raw(const std::vector<std::uint8_t>& pixels, int width, int height, bool gray) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(width);
  img.height = static_cast<png_uint_32>(height);
  img.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
    throw InputError(std::string("png encode failed: ") + img.message);
  }
  std::string out(size, '\0');
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
    throw InputError(std::string("png encode failed: ") + img.message);
  }
  out.resize(size);
  return out;
}

std::vector<std::uint8_t> decode_rgb(const std::string& bytes, int& width, int& height) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw InputError(std::string("png decode failed: ") + img.message);
  }
  img.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> pixels(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, pixels.data(), 0, nullptr)) {
    png_image_free(&img);
    throw InputError(std::string("png decode failed: ") + img.message);
  }
  width = static_cast<int>(img.width);
  height = static_cast<int>(img.height);
  return pixels;
}

}  // namespace

Image decode_png(const std::string& bytes) {
  int w = 0, h = 0;
  const std::vector<std::uint8_t> px = decode_rgb(bytes, w, h);
  Image out(h, w, 3);
  for (std::size_t i = 0; i < px.size(); ++i) out.values()[i] = px[i] / 255.0;
  return out;
}

Image read_png(const std::filesystem::path& path) {
  try {
    return decode_png(read_file(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

Mask read_mask_png(const std::filesystem::path& path) {
  const Image img = read_png(path);
  Mask m(img.height(), img.width());
  for (std::size_t p = 0; p < m.pixel_count(); ++p) {
    const auto px = img.pixel(p);
    m.set(p, px[0] > 0.0 || px[1] > 0.0 || px[2] > 0.0);
  }
  return m;
}

std::string encode_png(const Image& image) {
  if (image.channels() != 1 && image.channels() != 3) throw InputError("png needs 1 or 3 channels");
  std::vector<std::uint8_t> px(image.values().size());
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = to_byte(image.values()[i]);
  return encode_raw(px, image.width(), image.height(), image.channels() == 1);
}

std::string encode_mask_png(const Mask& mask) {
  std::vector<std::uint8_t> px(mask.pixel_count());
  for (std::size_t p = 0; p < px.size(); ++p) px[p] = mask[p] ? 255 : 0;
  return encode_raw(px, mask.width(), mask.height(), true);
}

std::string encode_feature_dump(const Image& values) {
  std::string out;
  auto put_u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  };
  put_u32(static_cast<std::uint32_t>(values.height()));
  put_u32(static_cast<std::uint32_t>(values.width()));
  put_u32(static_cast<std::uint32_t>(values.channels()));
  for (double v : values.values()) put_u32(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

Image decode_feature_dump(const std::string& bytes) {
  auto get_u32 = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[off + i])) << (8 * i);
    return v;
  };
  if (bytes.size() < 12) throw InputError("feature dump too short");
  const std::uint32_t h = get_u32(0), w = get_u32(4), c = get_u32(8);
  const std::size_t n = static_cast<std::size_t>(h) * w * c;
  if (bytes.size() != 12 + 4 * n) throw InputError("feature dump size mismatch");
  Image out(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c));
  for (std::size_t i = 0; i < n; ++i) out.values()[i] = std::bit_cast<float>(get_u32(12 + 4 * i));
  return out;
}

Image quantize_8bit(const Image& image) {
  Image out = image;
  for (double& v : out.values()) v = to_byte(v) / 255.0;
  return out;
}

}  // namespace nol
