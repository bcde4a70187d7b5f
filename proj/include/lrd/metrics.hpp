#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "lrd/transform.hpp"

namespace lrd {

struct AlignmentReport {
  double mean_error = 0.0;  // mean over every landmark of every image
  double error_std = 0.0;   // population standard deviation of the same
  double max_error = 0.0;
  std::vector<double> per_image;  // mean per image
};

/// Landmark positions measured after alignment. For image i with estimated
/// aligning transform t, the observed landmark at position q shows up in the
/// aligned image at t^{-1}(q); perfect alignment puts it on the canonical
/// base position.
inline AlignmentReport landmark_error(
    const TransformStack& estimated,
    const std::vector<std::vector<Eigen::Vector2d>>& observed_landmarks,
    const std::vector<Eigen::Vector2d>& base_landmarks) {
  const int b = estimated.count();
  if (b == 0) throw std::invalid_argument("landmark_error: empty stack");
  if (static_cast<int>(observed_landmarks.size()) != b)
    throw std::invalid_argument(
        "landmark_error: need one landmark list per image");
  if (base_landmarks.empty())
    throw std::invalid_argument("landmark_error: no base landmarks");

  AlignmentReport rep;
  double sum = 0.0, sum_sq = 0.0;
  int total = 0;
  for (int i = 0; i < b; ++i) {
    const auto& marks = observed_landmarks[static_cast<std::size_t>(i)];
    if (marks.size() != base_landmarks.size())
      throw std::invalid_argument(
          "landmark_error: landmark count mismatch on image " +
          std::to_string(i));
    const Matrix3 inv =
        to_matrix(estimated.per_image[static_cast<std::size_t>(i)]).inverse();
    double image_sum = 0.0;
    for (std::size_t j = 0; j < marks.size(); ++j) {
      const Eigen::Vector2d mapped =
          apply_transform(inv, marks[j].x(), marks[j].y());
      const double d = (mapped - base_landmarks[j]).norm();
      if (!std::isfinite(d))
        throw std::invalid_argument("landmark_error: non-finite distance");
      image_sum += d;
      sum += d;
      sum_sq += d * d;
      rep.max_error = std::max(rep.max_error, d);
      ++total;
    }
    rep.per_image.push_back(image_sum / static_cast<double>(marks.size()));
  }
  rep.mean_error = sum / total;
  const double var = sum_sq / total - rep.mean_error * rep.mean_error;
  rep.error_std = var > 0.0 ? std::sqrt(var) : 0.0;
  return rep;
}

}  // namespace lrd
