#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lrd/core_ops.hpp"

namespace lrd {

// Grayscale image: rows index y, columns index x, intensities nominally in
// [0, 1]. Stored column-major like every other Eigen matrix, so vec(image)
// stacks pixel columns.
using Image = Eigen::MatrixXd;

/// Bilinear lookup at a real-valued position; everything outside the frame
/// reads as zero.
inline double bilinear_sample(const Image& img, double x, double y) {
  const int h = static_cast<int>(img.rows());
  const int w = static_cast<int>(img.cols());
  if (!(x > -1.0) || !(y > -1.0) || !(x < w) || !(y < h)) return 0.0;
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const double fx = x - x0;
  const double fy = y - y0;
  const auto at = [&](int yy, int xx) -> double {
    if (xx < 0 || xx >= w || yy < 0 || yy >= h) return 0.0;
    return img(yy, xx);
  };
  return (1.0 - fy) * ((1.0 - fx) * at(y0, x0) + fx * at(y0, x0 + 1)) +
         fy * ((1.0 - fx) * at(y0 + 1, x0) + fx * at(y0 + 1, x0 + 1));
}

/// Central-difference gradients with replicated borders.
inline void spatial_gradients(const Image& img, Image& gx, Image& gy) {
  const int h = static_cast<int>(img.rows());
  const int w = static_cast<int>(img.cols());
  if (h < 1 || w < 1)
    throw std::invalid_argument("spatial_gradients: empty image");
  gx.resize(h, w);
  gy.resize(h, w);
  for (int x = 0; x < w; ++x) {
    const int xl = std::max(x - 1, 0);
    const int xr = std::min(x + 1, w - 1);
    for (int y = 0; y < h; ++y) {
      const int yu = std::max(y - 1, 0);
      const int yd = std::min(y + 1, h - 1);
      gx(y, x) = 0.5 * (img(y, xr) - img(y, xl));
      gy(y, x) = 0.5 * (img(yd, x) - img(yu, x));
    }
  }
}

/// Bilinear resize with corner alignment.
inline Image resize_bilinear(const Image& img, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1)
    throw std::invalid_argument("resize_bilinear: output size must be positive");
  const int h = static_cast<int>(img.rows());
  const int w = static_cast<int>(img.cols());
  if (h < 1 || w < 1)
    throw std::invalid_argument("resize_bilinear: empty image");
  Image out(out_h, out_w);
  const double sx = out_w > 1 ? double(w - 1) / double(out_w - 1) : 0.0;
  const double sy = out_h > 1 ? double(h - 1) / double(out_h - 1) : 0.0;
  for (int x = 0; x < out_w; ++x)
    for (int y = 0; y < out_h; ++y)
      out(y, x) = bilinear_sample(img, sx * x, sy * y);
  return out;
}

}  // namespace lrd
