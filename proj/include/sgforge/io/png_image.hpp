#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <png.h>

#include "sgforge/common.hpp"

namespace sgforge::io {

struct GrayImage16 {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> pixels;

  [[nodiscard]] std::uint16_t at(int u, int v) const {
    return pixels[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(u)];
  }
};

struct GrayImage8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  [[nodiscard]] std::uint8_t at(int u, int v) const {
    return pixels[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(u)];
  }
};

namespace detail {

struct PngReader {
  FILE* fp = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;

  ~PngReader() {
    if (png != nullptr) png_destroy_read_struct(&png, info != nullptr ? &info : nullptr, nullptr);
    if (fp != nullptr) std::fclose(fp);
  }
};

struct PngWriter {
  FILE* fp = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;

  ~PngWriter() {
    if (png != nullptr) png_destroy_write_struct(&png, info != nullptr ? &info : nullptr);
    if (fp != nullptr) std::fclose(fp);
  }
};

inline void open_reader(PngReader& r, const std::string& path) {
  r.fp = std::fopen(path.c_str(), "rb");
  if (r.fp == nullptr) throw input_error("FileMissing", "cannot open image: " + path);
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (r.png != nullptr) r.info = png_create_info_struct(r.png);
  if (r.png == nullptr || r.info == nullptr) {
    throw Error("PngInit", "libpng allocation failed", ErrorCategory::internal);
  }
}

inline void open_writer(PngWriter& w, const std::string& path) {
  w.fp = std::fopen(path.c_str(), "wb");
  if (w.fp == nullptr) throw input_error("FileWrite", "cannot write image: " + path);
  w.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (w.png != nullptr) w.info = png_create_info_struct(w.png);
  if (w.png == nullptr || w.info == nullptr) {
    throw Error("PngInit", "libpng allocation failed", ErrorCategory::internal);
  }
}

}  // namespace detail

/// 16-bit grayscale read; the source image must already be gray16.
inline GrayImage16 read_png_gray16(const std::string& path) {
  detail::PngReader r;
  detail::open_reader(r, path);
  GrayImage16 image;
  std::vector<png_bytep> rows;

  if (setjmp(png_jmpbuf(r.png))) {
    throw input_error("BadImage", "failed to decode PNG: " + path);
  }
  png_init_io(r.png, r.fp);
  png_read_info(r.png, r.info);
  const png_uint_32 width = png_get_image_width(r.png, r.info);
  const png_uint_32 height = png_get_image_height(r.png, r.info);
  const int bit_depth = png_get_bit_depth(r.png, r.info);
  const int color_type = png_get_color_type(r.png, r.info);
  if (bit_depth != 16 || color_type != PNG_COLOR_TYPE_GRAY) {
    throw input_error("BadImage", path + " is not 16-bit grayscale");
  }
  png_set_swap(r.png);
  image.width = static_cast<int>(width);
  image.height = static_cast<int>(height);
  image.pixels.assign(static_cast<std::size_t>(width) * height, 0);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    rows[y] = reinterpret_cast<png_bytep>(image.pixels.data() +
                                          static_cast<std::size_t>(y) * width);
  }
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);
  return image;
}

inline void write_png_gray16(const std::string& path, const GrayImage16& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) *
                                 static_cast<std::size_t>(image.height)) {
    throw input_error("BadImage", "image buffer does not match its dimensions");
  }
  detail::PngWriter w;
  detail::open_writer(w, path);
  std::vector<png_bytep> rows;

  if (setjmp(png_jmpbuf(w.png))) {
    throw input_error("FileWrite", "failed to encode PNG: " + path);
  }
  png_init_io(w.png, w.fp);
  png_set_IHDR(w.png, w.info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  png_set_swap(w.png);
  rows.resize(static_cast<std::size_t>(image.height));
  for (int y = 0; y < image.height; ++y) {
    rows[static_cast<std::size_t>(y)] = reinterpret_cast<png_bytep>(
        const_cast<std::uint16_t*>(image.pixels.data()) +
        static_cast<std::size_t>(y) * static_cast<std::size_t>(image.width));
  }
  png_write_image(w.png, rows.data());
  png_write_end(w.png, nullptr);
}

/// 8-bit single-channel read; accepts grayscale or palette images and returns
/// the raw per-pixel indices either way.
inline GrayImage8 read_png_gray8(const std::string& path) {
  detail::PngReader r;
  detail::open_reader(r, path);
  GrayImage8 image;
  std::vector<png_bytep> rows;

  if (setjmp(png_jmpbuf(r.png))) {
    throw input_error("BadImage", "failed to decode PNG: " + path);
  }
  png_init_io(r.png, r.fp);
  png_read_info(r.png, r.info);
  const png_uint_32 width = png_get_image_width(r.png, r.info);
  const png_uint_32 height = png_get_image_height(r.png, r.info);
  const int bit_depth = png_get_bit_depth(r.png, r.info);
  const int color_type = png_get_color_type(r.png, r.info);
  if (bit_depth != 8 ||
      (color_type != PNG_COLOR_TYPE_GRAY && color_type != PNG_COLOR_TYPE_PALETTE)) {
    throw input_error("BadImage", path + " is not an 8-bit single-channel image");
  }
  image.width = static_cast<int>(width);
  image.height = static_cast<int>(height);
  image.pixels.assign(static_cast<std::size_t>(width) * height, 0);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) {
    rows[y] = image.pixels.data() + static_cast<std::size_t>(y) * width;
  }
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);
  return image;
}

inline void write_png_gray8(const std::string& path, const GrayImage8& image) {
  if (image.width <= 0 || image.height <= 0 ||
      image.pixels.size() != static_cast<std::size_t>(image.width) *
                                 static_cast<std::size_t>(image.height)) {
    throw input_error("BadImage", "image buffer does not match its dimensions");
  }
  detail::PngWriter w;
  detail::open_writer(w, path);
  std::vector<png_bytep> rows;

  if (setjmp(png_jmpbuf(w.png))) {
    throw input_error("FileWrite", "failed to encode PNG: " + path);
  }
  png_init_io(w.png, w.fp);
  png_set_IHDR(w.png, w.info, static_cast<png_uint_32>(image.width),
               static_cast<png_uint_32>(image.height), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(w.png, w.info);
  rows.resize(static_cast<std::size_t>(image.height));
  for (int y = 0; y < image.height; ++y) {
    rows[static_cast<std::size_t>(y)] =
        const_cast<std::uint8_t*>(image.pixels.data()) +
        static_cast<std::size_t>(y) * static_cast<std::size_t>(image.width);
  }
  png_write_image(w.png, rows.data());
  png_write_end(w.png, nullptr);
}

}  // namespace sgforge::io
