#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "lrd/core_ops.hpp"
#include "lrd/errors.hpp"

namespace lrd {

using Matrix3 = Eigen::Matrix3d;

// Planar transform groups, each parametrized by a short vector zeta:
//   translation  (tx, ty)
//   similarity   (scale, angle, tx, ty)
//   affine       (a00, a01, tx, a10, a11, ty), row-major upper 2x3
//   projective   eight entries of the 3x3 matrix, row-major, bottom-right
//                fixed to 1
enum class TransformGroup { Translation, Similarity, Affine, Projective };

inline int param_count(TransformGroup g) {
  switch (g) {
    case TransformGroup::Translation: return 2;
    case TransformGroup::Similarity: return 4;
    case TransformGroup::Affine: return 6;
    case TransformGroup::Projective: return 8;
  }
  throw std::invalid_argument("param_count: unknown group");
}

inline const char* group_name(TransformGroup g) {
  switch (g) {
    case TransformGroup::Translation: return "translation";
    case TransformGroup::Similarity: return "similarity";
    case TransformGroup::Affine: return "affine";
    case TransformGroup::Projective: return "projective";
  }
  throw std::invalid_argument("group_name: unknown group");
}

inline TransformGroup group_from_name(const std::string& name) {
  if (name == "translation") return TransformGroup::Translation;
  if (name == "similarity") return TransformGroup::Similarity;
  if (name == "affine") return TransformGroup::Affine;
  if (name == "projective") return TransformGroup::Projective;
  throw std::invalid_argument("group_from_name: unknown group '" + name + "'");
}

struct TransformParams {
  TransformGroup group = TransformGroup::Translation;
  Vector zeta;

  TransformParams() : zeta(Vector::Zero(2)) {}
  TransformParams(TransformGroup g, Vector z) : group(g), zeta(std::move(z)) {
    if (zeta.size() != param_count(group))
      throw std::invalid_argument("TransformParams: wrong parameter count");
  }
};

inline TransformParams identity_params(TransformGroup g) {
  switch (g) {
    case TransformGroup::Translation:
      return {g, Vector::Zero(2)};
    case TransformGroup::Similarity: {
      Vector z(4);
      z << 1, 0, 0, 0;
      return {g, z};
    }
    case TransformGroup::Affine: {
      Vector z(6);
      z << 1, 0, 0, 0, 1, 0;
      return {g, z};
    }
    case TransformGroup::Projective: {
      Vector z(8);
      z << 1, 0, 0, 0, 1, 0, 0, 0;
      return {g, z};
    }
  }
  throw std::invalid_argument("identity_params: unknown group");
}

/// Homogeneous 3x3 matrix of the transform. Throws std::invalid_argument if
/// the matrix is (near) singular.
inline Matrix3 to_matrix(const TransformParams& t) {
  const Vector& z = t.zeta;
  if (z.size() != param_count(t.group))
    throw std::invalid_argument("to_matrix: wrong parameter count");
  if (!z.allFinite())
    throw std::invalid_argument("to_matrix: non-finite parameters");
  Matrix3 m = Matrix3::Identity();
  switch (t.group) {
    case TransformGroup::Translation:
      m(0, 2) = z(0);
      m(1, 2) = z(1);
      break;
    case TransformGroup::Similarity: {
      const double s = z(0), c = std::cos(z(1)), sn = std::sin(z(1));
      m(0, 0) = s * c;
      m(0, 1) = -s * sn;
      m(1, 0) = s * sn;
      m(1, 1) = s * c;
      m(0, 2) = z(2);
      m(1, 2) = z(3);
      break;
    }
    case TransformGroup::Affine:
      m(0, 0) = z(0);
      m(0, 1) = z(1);
      m(0, 2) = z(2);
      m(1, 0) = z(3);
      m(1, 1) = z(4);
      m(1, 2) = z(5);
      break;
    case TransformGroup::Projective:
      m(0, 0) = z(0);
      m(0, 1) = z(1);
      m(0, 2) = z(2);
      m(1, 0) = z(3);
      m(1, 1) = z(4);
      m(1, 2) = z(5);
      m(2, 0) = z(6);
      m(2, 1) = z(7);
      break;
  }
  if (std::abs(m.block<2, 2>(0, 0).determinant()) <= 1e-8 ||
      std::abs(m.determinant()) <= 1e-8)
    throw std::invalid_argument("to_matrix: transform is not invertible");
  return m;
}

/// Recover parameters from a homogeneous matrix. The matrix must actually lie
/// in the requested group (up to overall scale for projective).
inline TransformParams from_matrix(TransformGroup g, const Matrix3& m_in) {
  if (!m_in.allFinite())
    throw std::invalid_argument("from_matrix: non-finite matrix");
  if (std::abs(m_in(2, 2)) < 1e-12)
    throw std::invalid_argument("from_matrix: zero bottom-right entry");
  const Matrix3 m = m_in / m_in(2, 2);
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  const double tol = 1e-9 * scale;
  const bool flat = std::abs(m(2, 0)) <= tol && std::abs(m(2, 1)) <= tol;
  switch (g) {
    case TransformGroup::Translation: {
      if (!flat || std::abs(m(0, 0) - 1) > tol || std::abs(m(1, 1) - 1) > tol ||
          std::abs(m(0, 1)) > tol || std::abs(m(1, 0)) > tol)
        throw std::invalid_argument("from_matrix: matrix is not a translation");
      Vector z(2);
      z << m(0, 2), m(1, 2);
      return {g, z};
    }
    case TransformGroup::Similarity: {
      const double s = std::hypot(m(0, 0), m(1, 0));
      if (!flat || s <= 1e-12 || std::abs(m(0, 1) + m(1, 0)) > tol ||
          std::abs(m(0, 0) - m(1, 1)) > tol)
        throw std::invalid_argument("from_matrix: matrix is not a similarity");
      Vector z(4);
      z << s, std::atan2(m(1, 0), m(0, 0)), m(0, 2), m(1, 2);
      return {g, z};
    }
    case TransformGroup::Affine: {
      if (!flat)
        throw std::invalid_argument("from_matrix: matrix is not affine");
      Vector z(6);
      z << m(0, 0), m(0, 1), m(0, 2), m(1, 0), m(1, 1), m(1, 2);
      return {g, z};
    }
    case TransformGroup::Projective: {
      Vector z(8);
      z << m(0, 0), m(0, 1), m(0, 2), m(1, 0), m(1, 1), m(1, 2), m(2, 0),
          m(2, 1);
      return {g, z};
    }
  }
  throw std::invalid_argument("from_matrix: unknown group");
}

inline TransformParams inverse_params(const TransformParams& t) {
  return from_matrix(t.group, to_matrix(t).inverse());
}

/// Apply the homogeneous map to a point.
inline Eigen::Vector2d apply_transform(const Matrix3& m, double x, double y) {
  const double w = m(2, 0) * x + m(2, 1) * y + m(2, 2);
  if (std::abs(w) < 1e-12)
    throw std::invalid_argument("apply_transform: point maps to infinity");
  return {(m(0, 0) * x + m(0, 1) * y + m(0, 2)) / w,
          (m(1, 0) * x + m(1, 1) * y + m(1, 2)) / w};
}

/// One transform per image, all from the same group.
struct TransformStack {
  std::vector<TransformParams> per_image;

  int count() const { return static_cast<int>(per_image.size()); }

  TransformGroup group() const {
    if (per_image.empty())
      throw std::invalid_argument("TransformStack: empty stack has no group");
    for (const auto& t : per_image)
      if (t.group != per_image.front().group)
        throw std::invalid_argument("TransformStack: mixed groups");
    return per_image.front().group;
  }
};

inline TransformStack identity_stack(TransformGroup g, int count) {
  if (count < 1)
    throw std::invalid_argument("identity_stack: count must be positive");
  TransformStack s;
  s.per_image.assign(static_cast<std::size_t>(count), identity_params(g));
  return s;
}

}  // namespace lrd
