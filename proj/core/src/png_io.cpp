#include "augclust/png_io.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>
#include <vector>

#include "augclust/error.hpp"

namespace augclust {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct PngErrorCapture {
  char message[256] = {0};
};

// libpng unwinds with longjmp; capture the message, then jump. All C++
// locals in the callers are constructed before setjmp so the jump skips no
// destructors.
void capture_error_fn(png_structp png, png_const_charp msg) {
  auto* cap = static_cast<PngErrorCapture*>(png_get_error_ptr(png));
  if (cap) std::snprintf(cap->message, sizeof(cap->message), "%s", msg);
  png_longjmp(png, 1);
}

void ignore_warning_fn(png_structp, png_const_charp) {}

}  // namespace

Image read_png(const std::string& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open image file: " + path);

  PngErrorCapture capture;
  std::vector<unsigned char> raster;
  std::vector<png_bytep> rows;
  int h = 0, w = 0;
  std::size_t rowbytes = 0;

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &capture, capture_error_fn, ignore_warning_fn);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed");
  }

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("failed to decode " + path + ": " + capture.message);
  }

  png_init_io(png, file.get());
  png_read_info(png, info);

  // Normalize any input variant (palette, gray, 16-bit, alpha) to RGB8.
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  png_set_gray_to_rgb(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  h = static_cast<int>(png_get_image_height(png, info));
  w = static_cast<int>(png_get_image_width(png, info));
  rowbytes = png_get_rowbytes(png, info);
  if (h <= 0 || w <= 0 || rowbytes < static_cast<std::size_t>(w) * 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("unexpected PNG geometry in " + path);
  }

  raster.resize(static_cast<std::size_t>(h) * rowbytes);
  rows.resize(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) rows[static_cast<std::size_t>(y)] = raster.data() + static_cast<std::size_t>(y) * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  Image image(h, w);
  for (int y = 0; y < h; ++y) {
    const unsigned char* row = raster.data() + static_cast<std::size_t>(y) * rowbytes;
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        image.at(c, y, x) = static_cast<float>(row[3 * x + c]) / 255.0f;
      }
    }
  }
  return image;
}

void write_png(const std::string& path, const Image& image) {
  validate_image(image);
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot create image file: " + path);

  const int h = image.height(), w = image.width();
  PngErrorCapture capture;
  std::vector<unsigned char> raster(static_cast<std::size_t>(h) * w * 3);
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        const float v = image.at(c, y, x);
        raster[(static_cast<std::size_t>(y) * w + x) * 3 + c] = static_cast<unsigned char>(std::lround(v * 255.0f));
      }
    }
    rows[static_cast<std::size_t>(y)] = raster.data() + static_cast<std::size_t>(y) * w * 3;
  }

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &capture, capture_error_fn, ignore_warning_fn);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed to encode " + path + ": " + capture.message);
  }

  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace augclust
