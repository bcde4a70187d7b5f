#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrd/image.hpp"

namespace lrd {

// A batch of equally sized grayscale images. Landmarks are optional; when
// present there is one point list per image (ground-truth positions used for
// evaluation only, never by the solver).
struct ImageBatch {
  std::vector<Image> images;
  std::vector<std::string> source_ids;
  std::vector<std::vector<Eigen::Vector2d>> landmarks;

  int count() const { return static_cast<int>(images.size()); }
  int height() const {
    return images.empty() ? 0 : static_cast<int>(images.front().rows());
  }
  int width() const {
    return images.empty() ? 0 : static_cast<int>(images.front().cols());
  }
  bool has_landmarks() const { return !landmarks.empty(); }
};

/// Check the structural invariants every consumer relies on.
inline void validate_batch(const ImageBatch& b) {
  if (b.count() < 2)
    throw std::invalid_argument("batch must contain at least 2 images");
  const int h = b.height(), w = b.width();
  for (const Image& img : b.images)
    if (img.rows() != h || img.cols() != w)
      throw std::invalid_argument("batch images must share dimensions");
  if (b.source_ids.size() != b.images.size())
    throw std::invalid_argument("batch needs one source id per image");
  if (b.has_landmarks() && b.landmarks.size() != b.images.size())
    throw std::invalid_argument("batch needs one landmark list per image");
}

}  // namespace lrd
