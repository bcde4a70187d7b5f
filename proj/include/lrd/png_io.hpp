#pragma once

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "lrd/batch.hpp"
#include "lrd/errors.hpp"
#include "lrd/image.hpp"

namespace lrd {

/// Read any PNG as grayscale in [0, 1] (color images are channel-averaged).
inline Image read_png_gray(const std::filesystem::path& path) {
  png_image pi;
  std::memset(&pi, 0, sizeof(pi));
  pi.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&pi, path.string().c_str()))
    throw IoError("read_png_gray: " + path.string() + ": " + pi.message);
  pi.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(pi));
  if (!png_image_finish_read(&pi, nullptr, buf.data(), 0, nullptr))
    throw IoError("read_png_gray: " + path.string() + ": " + pi.message);
  Image out(pi.height, pi.width);
  for (png_uint_32 y = 0; y < pi.height; ++y)
    for (png_uint_32 x = 0; x < pi.width; ++x) {
      const png_byte* px = &buf[(y * pi.width + x) * 3];
      out(y, x) = (px[0] + px[1] + px[2]) / (3.0 * 255.0);
    }
  return out;
}

/// Write a [0, 1] image as an 8-bit grayscale PNG (values are clamped).
inline void write_png_gray(const Image& img,
                           const std::filesystem::path& path) {
  const int h = static_cast<int>(img.rows());
  const int w = static_cast<int>(img.cols());
  if (h < 1 || w < 1)
    throw std::invalid_argument("write_png_gray: empty image");
  std::vector<png_byte> buf(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = std::clamp(img(y, x), 0.0, 1.0);
      buf[static_cast<std::size_t>(y) * w + x] =
          static_cast<png_byte>(std::lround(v * 255.0));
    }
  png_image pi;
  std::memset(&pi, 0, sizeof(pi));
  pi.version = PNG_IMAGE_VERSION;
  pi.width = static_cast<png_uint_32>(w);
  pi.height = static_cast<png_uint_32>(h);
  pi.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&pi, path.string().c_str(), 0, buf.data(), 0,
                               nullptr))
    throw IoError("write_png_gray: " + path.string() + ": " + pi.message);
}

/// Load every PNG in a directory (sorted by filename) and resize to a common
/// frame. Needs at least two images.
inline ImageBatch load_batch(const std::filesystem::path& dir, int height,
                             int width) {
  if (height < 8 || width < 8)
    throw std::invalid_argument("load_batch: frame must be at least 8x8");
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec))
    throw IoError("load_batch: " + dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
    return a.filename().string() < b.filename().string();
  });
  if (files.size() < 2)
    throw IoError("load_batch: " + dir.string() +
                  " holds fewer than 2 PNG images");
  ImageBatch batch;
  for (const auto& f : files) {
    batch.images.push_back(resize_bilinear(read_png_gray(f), height, width));
    batch.source_ids.push_back(f.filename().string());
  }
  validate_batch(batch);
  return batch;
}

}  // namespace lrd
