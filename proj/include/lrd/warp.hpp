#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrd/batch.hpp"
#include "lrd/core_ops.hpp"
#include "lrd/errors.hpp"
#include "lrd/image.hpp"
#include "lrd/transform.hpp"

namespace lrd {

/// Resample an image under a transform: output pixel (x, y) reads the input
/// at the mapped position of (x, y).
inline Image warp(const Image& img, const TransformParams& t, int out_h,
                  int out_w) {
  if (out_h < 1 || out_w < 1)
    throw std::invalid_argument("warp: output size must be positive");
  const Matrix3 m = to_matrix(t);
  Image out(out_h, out_w);
  for (int x = 0; x < out_w; ++x) {
    for (int y = 0; y < out_h; ++y) {
      const double d = m(2, 0) * x + m(2, 1) * y + m(2, 2);
      if (std::abs(d) < 1e-12) {
        out(y, x) = 0.0;
        continue;
      }
      const double xs = (m(0, 0) * x + m(0, 1) * y + m(0, 2)) / d;
      const double ys = (m(1, 0) * x + m(1, 1) * y + m(1, 2)) / d;
      out(y, x) = bilinear_sample(img, xs, ys);
    }
  }
  return out;
}

inline Image warp(const Image& img, const TransformParams& t) {
  return warp(img, t, static_cast<int>(img.rows()),
              static_cast<int>(img.cols()));
}

/// Stack the warped images as unit columns: column i is
/// vec(warp(images[i], taus[i])) divided by its Euclidean norm.
inline Matrix warp_normalize_batch(const ImageBatch& batch,
                                   const TransformStack& taus) {
  validate_batch(batch);
  if (taus.count() != batch.count())
    throw std::invalid_argument(
        "warp_normalize_batch: need one transform per image");
  taus.group();  // reject mixed stacks
  const int h = batch.height(), w = batch.width();
  Matrix v(static_cast<Eigen::Index>(h) * w, batch.count());
  for (int i = 0; i < batch.count(); ++i) {
    const Image wi = warp(batch.images[static_cast<std::size_t>(i)],
                          taus.per_image[static_cast<std::size_t>(i)]);
    const double n = wi.norm();
    if (n < 1e-12)
      throw DegenerateWarpError(
          "warp_normalize_batch: image " + std::to_string(i) +
              " warps to zero (transform maps it outside the frame)",
          i);
    v.col(i) = wi.reshaped() / n;
  }
  return v;
}

namespace detail {

// Partial derivatives of the mapped position (xs, ys) at output pixel (u, v)
// with respect to each transform parameter. Rows: d(xs)/d(zeta), d(ys)/d(zeta).
inline void coord_partials(const TransformParams& t, double u, double v,
                           Eigen::Matrix<double, 2, Eigen::Dynamic>& out) {
  const Vector& z = t.zeta;
  switch (t.group) {
    case TransformGroup::Translation:
      out.setZero(2, 2);
      out(0, 0) = 1.0;
      out(1, 1) = 1.0;
      return;
    case TransformGroup::Similarity: {
      const double s = z(0), c = std::cos(z(1)), sn = std::sin(z(1));
      out.setZero(2, 4);
      out(0, 0) = c * u - sn * v;
      out(1, 0) = sn * u + c * v;
      out(0, 1) = s * (-sn * u - c * v);
      out(1, 1) = s * (c * u - sn * v);
      out(0, 2) = 1.0;
      out(1, 3) = 1.0;
      return;
    }
    case TransformGroup::Affine:
      out.setZero(2, 6);
      out(0, 0) = u;
      out(0, 1) = v;
      out(0, 2) = 1.0;
      out(1, 3) = u;
      out(1, 4) = v;
      out(1, 5) = 1.0;
      return;
    case TransformGroup::Projective: {
      const double nx = z(0) * u + z(1) * v + z(2);
      const double ny = z(3) * u + z(4) * v + z(5);
      const double d = z(6) * u + z(7) * v + 1.0;
      out.setZero(2, 8);
      if (std::abs(d) < 1e-12) return;  // sample is clipped anyway
      const double inv = 1.0 / d;
      const double inv2 = inv * inv;
      out(0, 0) = u * inv;
      out(0, 1) = v * inv;
      out(0, 2) = inv;
      out(1, 3) = u * inv;
      out(1, 4) = v * inv;
      out(1, 5) = inv;
      out(0, 6) = -nx * u * inv2;
      out(0, 7) = -nx * v * inv2;
      out(1, 6) = -ny * u * inv2;
      out(1, 7) = -ny * v * inv2;
      return;
    }
  }
  throw std::invalid_argument("coord_partials: unknown group");
}

}  // namespace detail

/// Derivative of the unit-normalized warped image with respect to the
/// transform parameters, evaluated at t. Returns (h*w) x param_count(group).
/// Throws DegenerateWarpError if the warped image is identically zero.
inline Matrix warp_jacobian(const Image& img, const TransformParams& t,
                            int image_index = 0) {
  const int h = static_cast<int>(img.rows());
  const int w = static_cast<int>(img.cols());
  const int p = param_count(t.group);
  const Matrix3 m = to_matrix(t);
  Image gx, gy;
  spatial_gradients(img, gx, gy);

  Vector q(static_cast<Eigen::Index>(h) * w);
  Matrix ju(static_cast<Eigen::Index>(h) * w, p);
  Eigen::Matrix<double, 2, Eigen::Dynamic> cp(2, p);
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) {
      const Eigen::Index px = static_cast<Eigen::Index>(x) * h + y;
      const double d = m(2, 0) * x + m(2, 1) * y + m(2, 2);
      if (std::abs(d) < 1e-12) {
        q(px) = 0.0;
        ju.row(px).setZero();
        continue;
      }
      const double xs = (m(0, 0) * x + m(0, 1) * y + m(0, 2)) / d;
      const double ys = (m(1, 0) * x + m(1, 1) * y + m(1, 2)) / d;
      q(px) = bilinear_sample(img, xs, ys);
      const double dx = bilinear_sample(gx, xs, ys);
      const double dy = bilinear_sample(gy, xs, ys);
      detail::coord_partials(t, x, y, cp);
      ju.row(px) = dx * cp.row(0) + dy * cp.row(1);
    }
  }

  const double n = q.norm();
  if (n < 1e-12)
    throw DegenerateWarpError(
        "warp_jacobian: image " + std::to_string(image_index) +
            " warps to zero (transform maps it outside the frame)",
        image_index);
  // d/dzeta (q / |q|) = (I - qh qh^T) Ju / |q|
  const Vector qh = q / n;
  return (ju - qh * (qh.transpose() * ju)) / n;
}

/// Add per-image parameter increments (one column per image) and validate the
/// result. Throws InvalidUpdateError if any updated transform degenerates.
inline TransformStack compose_update(const TransformStack& taus,
                                     const Matrix& dtau) {
  const int b = taus.count();
  if (b == 0) throw std::invalid_argument("compose_update: empty stack");
  const int p = param_count(taus.group());
  if (dtau.rows() != p || dtau.cols() != b)
    throw std::invalid_argument("compose_update: increment shape mismatch");
  if (!dtau.allFinite())
    throw InvalidUpdateError("compose_update: non-finite increment");
  TransformStack out = taus;
  for (int i = 0; i < b; ++i) {
    out.per_image[static_cast<std::size_t>(i)].zeta += dtau.col(i);
    try {
      to_matrix(out.per_image[static_cast<std::size_t>(i)]);
    } catch (const std::invalid_argument& e) {
      throw InvalidUpdateError("compose_update: image " + std::to_string(i) +
                               ": " + e.what());
    }
  }
  return out;
}

}  // namespace lrd
