#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

#include "lrd/errors.hpp"

namespace lrd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline void require_finite(const Matrix& a, const char* where) {
  if (!a.allFinite())
    throw NumericError(std::string(where) + ": input contains NaN or Inf");
}

/// Scalar shrinkage sign(x) * max(|x| - alpha, 0).
inline double soft_threshold(double x, double alpha) {
  if (alpha < 0.0)
    throw std::invalid_argument("soft_threshold: alpha must be non-negative");
  const double m = std::abs(x) - alpha;
  if (m <= 0.0) return 0.0;
  return x < 0.0 ? -m : m;
}

/// Element-wise shrinkage; the proximal map of alpha * l1 norm.
inline Matrix soft_threshold(const Matrix& a, double alpha) {
  if (alpha < 0.0)
    throw std::invalid_argument("soft_threshold: alpha must be non-negative");
  require_finite(a, "soft_threshold");
  return a.unaryExpr([alpha](double x) {
    const double m = std::abs(x) - alpha;
    if (m <= 0.0) return 0.0;
    return x < 0.0 ? -m : m;
  });
}

/// Thin SVD factors A = U * diag(sigma) * V^T with sigma sorted descending.
struct SvdFactors {
  Matrix u;
  Vector sigma;
  Matrix v;
};

inline SvdFactors thin_svd(const Matrix& a) {
  require_finite(a, "thin_svd");
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return SvdFactors{svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

inline Vector singular_values(const Matrix& a) {
  require_finite(a, "singular_values");
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues();
}

/// Count of singular values above 1e-12 times the largest one.
inline int numeric_rank(const Matrix& a) {
  const Vector s = singular_values(a);
  if (s.size() == 0) return 0;
  const double cutoff = 1e-12 * s(0);
  if (!(s(0) > 0.0)) return 0;
  return static_cast<int>((s.array() > cutoff).count());
}

/// Singular value thresholding; the proximal map of alpha * nuclear norm.
/// When rank_out is given it receives the number of singular values that
/// survive the threshold.
inline Matrix svt(const Matrix& a, double alpha, int* rank_out = nullptr) {
  if (alpha < 0.0)
    throw std::invalid_argument("svt: alpha must be non-negative");
  const SvdFactors f = thin_svd(a);
  Vector s = (f.sigma.array() - alpha).max(0.0);
  if (rank_out) *rank_out = static_cast<int>((s.array() > 0.0).count());
  return f.u * s.asDiagonal() * f.v.transpose();
}

/// Sum of singular values.
inline double nuclear_norm(const Matrix& a) {
  return singular_values(a).sum();
}

/// Sum of absolute entries.
inline double l1_norm(const Matrix& a) {
  require_finite(a, "l1_norm");
  return a.cwiseAbs().sum();
}

inline double fro_norm(const Matrix& a) {
  require_finite(a, "fro_norm");
  return a.norm();
}

}  // namespace lrd
