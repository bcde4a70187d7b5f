#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrd/batch.hpp"
#include "lrd/errors.hpp"
#include "lrd/image.hpp"
#include "lrd/rng.hpp"
#include "lrd/transform.hpp"
#include "lrd/warp.hpp"

namespace lrd {

struct OcclusionSpec {
  int patch_count = 0;
  int patch_size = 0;
  double intensity = 1.0;
};

struct SynthSpec {
  std::string base_name = "face";  // face | blobs | checker
  std::optional<Image> base_image; // overrides base_name when set
  int height = 64;
  int width = 64;
  int count = 16;
  double rotation_range_deg = 0.0; // angle drawn from +- this range
  double shift_range_px = 0.0;     // each shift component drawn from +- this
  double gain_lo = 1.0;            // per-image multiplicative gain range
  double gain_hi = 1.0;
  OcclusionSpec occlusion;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct SynthResult {
  ImageBatch batch;                            // landmarks filled in
  TransformStack truth;                        // aligning transforms
  std::vector<Eigen::Vector2d> base_landmarks; // canonical positions
};

namespace detail {

// Blend a soft-edged ellipse into the image. The edge transition is a couple
// of pixels wide so the pattern stays smooth under bilinear resampling.
inline void paint_ellipse(Image& img, double cx, double cy, double rx,
                          double ry, double value, double edge = 1.2) {
  const int h = static_cast<int>(img.rows());
  const int w = static_cast<int>(img.cols());
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) {
      const double dx = (x - cx) / rx;
      const double dy = (y - cy) / ry;
      const double d = (1.0 - std::sqrt(dx * dx + dy * dy)) *
                       std::min(rx, ry);
      const double wgt = 1.0 / (1.0 + std::exp(-d / edge));
      img(y, x) = (1.0 - wgt) * img(y, x) + wgt * value;
    }
  }
}

// The background is exactly zero and every ellipse keeps a clear margin to
// the border, so that moderate warps never clip visible content. Out-of-frame
// samples are filled with zero by warp; a nonzero background would make that
// fill a strong artificial edge that rewards sliding the whole batch off
// frame (the joint objective has an unconstrained common-transform direction,
// and such edges give it a descent direction).
inline Image base_face(int h, int w, std::vector<Eigen::Vector2d>& landmarks) {
  Image img = Image::Zero(h, w);
  const double cx = 0.5 * (w - 1), cy = 0.5 * (h - 1);
  paint_ellipse(img, cx, cy, 0.30 * w, 0.33 * h, 0.78, 1.0);
  const double ex = 0.14 * w, ey = 0.11 * h;
  paint_ellipse(img, cx - ex, cy - ey, 0.055 * w, 0.045 * h, 0.12, 1.0);
  paint_ellipse(img, cx + ex, cy - ey, 0.055 * w, 0.045 * h, 0.12, 1.0);
  paint_ellipse(img, cx, cy + 0.02 * h, 0.030 * w, 0.070 * h, 0.55, 1.0);
  paint_ellipse(img, cx, cy + 0.19 * h, 0.12 * w, 0.040 * h, 0.30, 1.0);
  landmarks = {{cx - ex, cy - ey}, {cx + ex, cy - ey}};
  return img;
}

// Zero background for the same reason as base_face; blob centers and widths
// are kept away from the border so the visible mass stays interior.
inline Image base_blobs(int h, int w, std::vector<Eigen::Vector2d>& landmarks,
                        Rng& rng) {
  Image img = Image::Zero(h, w);
  landmarks.clear();
  for (int blob = 0; blob < 6; ++blob) {
    const double bx = rng.uniform(0.32 * w, 0.68 * w);
    const double by = rng.uniform(0.32 * h, 0.68 * h);
    const double sigma = rng.uniform(0.05, 0.10) * std::min(h, w);
    const double amp = rng.uniform(0.35, 0.80);
    for (int x = 0; x < w; ++x)
      for (int y = 0; y < h; ++y) {
        const double r2 = (x - bx) * (x - bx) + (y - by) * (y - by);
        img(y, x) += amp * std::exp(-0.5 * r2 / (sigma * sigma));
      }
    if (blob < 2) landmarks.push_back({bx, by});
  }
  const double peak = img.maxCoeff();
  if (peak > 1.0) img /= peak;
  return img;
}

inline Image base_checker(int h, int w,
                          std::vector<Eigen::Vector2d>& landmarks) {
  Image img(h, w);
  const double cx = 0.5 * (w - 1), cy = 0.5 * (h - 1);
  const double period = std::min(h, w) / 5.0;
  const double two_pi = 2.0 * 3.141592653589793238462643383279502884;
  const double win = 0.22 * std::min(h, w);
  for (int x = 0; x < w; ++x)
    for (int y = 0; y < h; ++y) {
      const double wave = 0.5 + 0.5 * std::sin(two_pi * x / period) *
                                    std::sin(two_pi * y / period);
      const double r2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
      const double env = std::exp(-0.5 * r2 / (win * win));
      img(y, x) = 0.75 * env * wave;
    }
  landmarks = {{cx - period, cy}, {cx + period, cy}};
  return img;
}

}  // namespace detail

/// One of the built-in alignment targets. Landmarks receive two canonical
/// points of the pattern. Only "blobs" consumes random numbers.
inline Image make_base_image(const std::string& name, int h, int w,
                             std::vector<Eigen::Vector2d>& landmarks,
                             Rng& rng) {
  if (h < 8 || w < 8)
    throw std::invalid_argument("make_base_image: size must be at least 8x8");
  if (name == "face") return detail::base_face(h, w, landmarks);
  if (name == "blobs") return detail::base_blobs(h, w, landmarks, rng);
  if (name == "checker") return detail::base_checker(h, w, landmarks);
  throw std::invalid_argument("make_base_image: unknown base '" + name + "'");
}

/// Generate a batch of randomly perturbed copies of a base image, together
/// with the ground-truth aligning transforms and landmark positions.
///
/// Per-image draw order (fixed; reruns with the same spec are bit-identical):
/// angle, shift x, shift y, gain, occlusion positions (x then y per patch),
/// then per-pixel noise in column-major order.
inline SynthResult synthesize(const SynthSpec& spec) {
  if (spec.count < 2)
    throw std::invalid_argument("synthesize: count must be at least 2");
  if (spec.rotation_range_deg < 0.0 || spec.shift_range_px < 0.0)
    throw std::invalid_argument("synthesize: ranges must be non-negative");
  if (spec.gain_lo <= 0.0 || spec.gain_hi < spec.gain_lo)
    throw std::invalid_argument("synthesize: need 0 < gain_lo <= gain_hi");
  if (spec.noise_sigma < 0.0)
    throw std::invalid_argument("synthesize: noise_sigma must be >= 0");

  Rng rng(spec.seed);
  SynthResult out;
  Image base;
  if (spec.base_image) {
    base = *spec.base_image;
    if (base.rows() < 8 || base.cols() < 8)
      throw std::invalid_argument("synthesize: base image must be >= 8x8");
    const double lx = 0.35 * (base.cols() - 1);
    const double ly = 0.5 * (base.rows() - 1);
    out.base_landmarks = {{lx, ly},
                          {static_cast<double>(base.cols() - 1) - lx, ly}};
  } else {
    base = make_base_image(spec.base_name, spec.height, spec.width,
                           out.base_landmarks, rng);
  }
  const int h = static_cast<int>(base.rows());
  const int w = static_cast<int>(base.cols());

  const OcclusionSpec& occ = spec.occlusion;
  if (occ.patch_count < 0 || occ.patch_size < 0)
    throw std::invalid_argument("synthesize: occlusion sizes must be >= 0");
  if (occ.patch_count > 0 &&
      (occ.patch_size < 1 || occ.patch_size > std::min(h, w)))
    throw std::invalid_argument(
        "synthesize: occlusion patches must fit inside the image");

  const double deg = 3.141592653589793238462643383279502884 / 180.0;
  out.truth.per_image.reserve(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) {
    const double angle =
        rng.uniform(-spec.rotation_range_deg, spec.rotation_range_deg) * deg;
    const double sx = rng.uniform(-spec.shift_range_px, spec.shift_range_px);
    const double sy = rng.uniform(-spec.shift_range_px, spec.shift_range_px);
    // Rotate about the frame center, then shift: the translation part folds
    // the center anchoring into the parameter vector so the shift ranges keep
    // their plain pixel meaning regardless of the rotation drawn.
    const double cx = 0.5 * (w - 1), cy = 0.5 * (h - 1);
    const double ca = std::cos(angle), sa = std::sin(angle);
    Vector z(4);
    z << 1.0, angle, cx - (ca * cx - sa * cy) + sx, cy - (sa * cx + ca * cy) + sy;
    const TransformParams g(TransformGroup::Similarity, z);

    // The observation reads the base through g; if the frame center lands
    // outside the base, most of the pattern has left the frame.
    const Eigen::Vector2d center =
        apply_transform(to_matrix(g), 0.5 * (w - 1), 0.5 * (h - 1));
    if (center.x() < 0.0 || center.x() > w - 1 || center.y() < 0.0 ||
        center.y() > h - 1)
      throw DegenerateSynthesisError(
          "synthesize: perturbation ranges push the pattern out of frame");
    Image obs = warp(base, g);
    if (obs.norm() < 1e-12)
      throw DegenerateSynthesisError(
          "synthesize: perturbed image " + std::to_string(i) + " is empty");

    obs *= rng.uniform(spec.gain_lo, spec.gain_hi);
    for (int patch = 0; patch < occ.patch_count; ++patch) {
      const int px = static_cast<int>(
          rng.uniform_int(0, static_cast<std::int64_t>(w - occ.patch_size)));
      const int py = static_cast<int>(
          rng.uniform_int(0, static_cast<std::int64_t>(h - occ.patch_size)));
      obs.block(py, px, occ.patch_size, occ.patch_size)
          .setConstant(occ.intensity);
    }
    if (spec.noise_sigma > 0.0)
      for (int x = 0; x < w; ++x)
        for (int y = 0; y < h; ++y)
          obs(y, x) += rng.normal(0.0, spec.noise_sigma);
    obs = obs.cwiseMax(0.0).cwiseMin(1.0);

    const TransformParams aligning = inverse_params(g);
    std::vector<Eigen::Vector2d> marks;
    const Matrix3 to_obs = to_matrix(aligning);
    for (const auto& lm : out.base_landmarks)
      marks.push_back(apply_transform(to_obs, lm.x(), lm.y()));

    out.batch.images.push_back(std::move(obs));
    out.batch.source_ids.push_back("synth_" + std::to_string(i));
    out.batch.landmarks.push_back(std::move(marks));
    out.truth.per_image.push_back(aligning);
  }
  validate_batch(out.batch);
  return out;
}

}  // namespace lrd
