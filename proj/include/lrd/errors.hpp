#pragma once

#include <stdexcept>
#include <string>

namespace lrd {

/// A numeric kernel (SVD, norm, shrinkage) received non-finite input.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// A warp produced an identically zero image, so it cannot be normalized.
class DegenerateWarpError : public std::runtime_error {
 public:
  DegenerateWarpError(const std::string& what, int image_index)
      : std::runtime_error(what), image_index(image_index) {}
  int image_index;
};

/// A transform update left the feasible parameter set (non-invertible map).
class InvalidUpdateError : public std::runtime_error {
 public:
  explicit InvalidUpdateError(const std::string& what)
      : std::runtime_error(what) {}
};

/// The neighborhood graph does not connect enough samples to embed a point.
class DisconnectedManifoldError : public std::runtime_error {
 public:
  explicit DisconnectedManifoldError(const std::string& what)
      : std::runtime_error(what) {}
};

/// An image Jacobian is numerically rank deficient.
class IllConditionedJacobianError : public std::runtime_error {
 public:
  IllConditionedJacobianError(const std::string& what, int image_index)
      : std::runtime_error(what), image_index(image_index) {}
  int image_index;
};

/// Solver iterates stopped being finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int iteration)
      : std::runtime_error(what), iteration(iteration) {}
  int iteration;
};

/// Requested synthesis parameters cannot produce a usable batch.
class DegenerateSynthesisError : public std::runtime_error {
 public:
  explicit DegenerateSynthesisError(const std::string& what)
      : std::runtime_error(what) {}
};

/// A file exists but its contents do not match the expected layout.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// A file or directory could not be read or written.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lrd
