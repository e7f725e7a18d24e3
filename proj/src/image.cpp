#include "faithful/image.hpp"

#include "faithful/error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

namespace faithful {

namespace {

struct PngImage {
  png_image image;
  PngImage() {
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
  }
  ~PngImage() { png_image_free(&image); }
};

}  // namespace

Image read_png(const std::filesystem::path& path) {
  PngImage png;
  if (!png_image_begin_read_from_file(&png.image, path.c_str()))
    throw InputError("cannot read PNG " + path.string() + ": " + png.image.message);
  png.image.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(png.image));
  if (!png_image_finish_read(&png.image, nullptr, buffer.data(), 0, nullptr))
    throw InputError("cannot decode PNG " + path.string() + ": " + png.image.message);
  const int h = static_cast<int>(png.image.height), w = static_cast<int>(png.image.width);
  Image out(3, h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) out.at(c, y, x) = buffer[(y * w + x) * 3 + c] / 255.0;
  return out;
}

void write_png(const std::filesystem::path& path, const Image& image) {
  if (image.channels != 3) throw ShapeError("write_png expects an RGB image");
  std::vector<png_byte> buffer(static_cast<std::size_t>(3 * image.height * image.width));
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < 3; ++c)
        buffer[(y * image.width + x) * 3 + c] =
            static_cast<png_byte>(std::lround(std::clamp(image.at(c, y, x), 0.0, 1.0) * 255.0));
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  PngImage png;
  png.image.width = static_cast<png_uint_32>(image.width);
  png.image.height = static_cast<png_uint_32>(image.height);
  png.image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png.image, path.c_str(), 0, buffer.data(), 0, nullptr))
    throw PersistenceError("cannot write PNG " + path.string() + ": " + png.image.message);
}

std::pair<int, int> png_size(const std::filesystem::path& path) {
  PngImage png;
  if (!png_image_begin_read_from_file(&png.image, path.c_str()))
    throw InputError("cannot read PNG " + path.string() + ": " + png.image.message);
  return {static_cast<int>(png.image.height), static_cast<int>(png.image.width)};
}

Tensor image_to_tensor(const Image& image, DType dtype) {
  Tensor t{{image.height, image.width, image.channels},
           Eigen::ArrayXd(image.channels * image.height * image.width), dtype};
  Eigen::Index k = 0;
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x)
      for (int c = 0; c < image.channels; ++c) {
        const double v = image.at(c, y, x);
        t.data[k++] = dtype == DType::F32 ? static_cast<double>(static_cast<float>(v)) : v;
      }
  return t;
}

Image tensor_to_image(const Tensor& t) {
  if (t.shape.size() != 3 || t.shape[2] != 3) throw ShapeError("frame tensor must have shape (H, W, 3)");
  Image out(3, t.shape[0], t.shape[1]);
  Eigen::Index k = 0;
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < 3; ++c) out.at(c, y, x) = t.data[k++];
  return out;
}

Image read_frame(const std::filesystem::path& path) {
  if (path.extension() == ".png") return read_png(path);
  return tensor_to_image(load_tensor(path));
}

}  // namespace faithful
