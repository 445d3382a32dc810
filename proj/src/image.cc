#include "compass/image.h"

#include <png.h>

#include <cmath>
#include <cstring>

#include "compass/common.h"

namespace compass {
namespace {

template <typename Image>
Image read_png(const std::string& path, uint32_t format, int channels) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str())) {
    throw IoError("cannot read PNG '" + path + "': " + png.message);
  }
  if (png.width == 0 || png.height == 0) {
    png_image_free(&png);
    throw IoError("PNG '" + path + "' has zero area");
  }
  png.format = format;
  Image image;
  image.width = static_cast<int>(png.width);
  image.height = static_cast<int>(png.height);
  image.pixels.resize(static_cast<size_t>(image.width) * image.height * channels);
  // Composite any alpha onto white so transparent regions read as empty.
  png_color background{255, 255, 255};
  if (!png_image_finish_read(&png, &background, image.pixels.data(), 0, nullptr)) {
    std::string msg = png.message;
    png_image_free(&png);
    throw IoError("cannot decode PNG '" + path + "': " + msg);
  }
  return image;
}

void write(const std::string& path, const uint8_t* data, int width, int height, uint32_t format) {
  if (width <= 0 || height <= 0) throw IoError("refusing to write zero-area PNG '" + path + "'");
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(width);
  png.height = static_cast<png_uint_32>(height);
  png.format = format;
  if (!png_image_write_to_file(&png, path.c_str(), 0, data, 0, nullptr)) {
    throw IoError("cannot write PNG '" + path + "': " + png.message);
  }
}

}  // namespace

GrayImage to_gray(const RgbImage& rgb) {
  GrayImage gray(rgb.width, rgb.height);
  for (size_t i = 0; i < gray.pixels.size(); ++i) {
    const uint8_t* p = &rgb.pixels[i * 3];
    double y = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    gray.pixels[i] = static_cast<uint8_t>(std::lround(y));
  }
  return gray;
}

RgbImage read_png_rgb(const std::string& path) {
  return read_png<RgbImage>(path, PNG_FORMAT_RGB, 3);
}

GrayImage read_png_gray(const std::string& path) {
  return read_png<GrayImage>(path, PNG_FORMAT_GRAY, 1);
}

void write_png(const std::string& path, const RgbImage& image) {
  write(path, image.pixels.data(), image.width, image.height, PNG_FORMAT_RGB);
}

void write_png(const std::string& path, const GrayImage& image) {
  write(path, image.pixels.data(), image.width, image.height, PNG_FORMAT_GRAY);
}

}  // namespace compass
