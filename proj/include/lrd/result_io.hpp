#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lrd/batch.hpp"
#include "lrd/errors.hpp"
#include "lrd/matrix_io.hpp"
#include "lrd/png_io.hpp"
#include "lrd/solver.hpp"
#include "lrd/transform.hpp"

namespace lrd {

namespace detail {

// Shortest decimal form that parses back to the identical double.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline double parse_double(const std::string& tok, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw FormatError(where + ": bad number '" + tok + "'");
  }
}

}  // namespace detail

enum class MontageScale {
  Clamp,      // values are already intensities
  MinMax,     // map the global value range onto [0, 1]
  Symmetric,  // map 0 to mid-gray, extremes by the largest magnitude
};

/// Lay out a list of equally sized images on a near-square grid.
inline Image tile_images(const std::vector<Image>& images) {
  if (images.empty())
    throw std::invalid_argument("tile_images: no images");
  const int h = static_cast<int>(images.front().rows());
  const int w = static_cast<int>(images.front().cols());
  for (const Image& img : images)
    if (img.rows() != h || img.cols() != w)
      throw std::invalid_argument("tile_images: sizes differ");
  const int n = static_cast<int>(images.size());
  const int grid_w = static_cast<int>(std::ceil(std::sqrt(double(n))));
  const int grid_h = (n + grid_w - 1) / grid_w;
  const int gap = 2;
  Image out = Image::Constant(grid_h * h + (grid_h - 1) * gap,
                              grid_w * w + (grid_w - 1) * gap, 0.25);
  for (int i = 0; i < n; ++i) {
    const int r = i / grid_w, c = i % grid_w;
    out.block(r * (h + gap), c * (w + gap), h, w) =
        images[static_cast<std::size_t>(i)];
  }
  return out;
}

/// Write matrix columns as a tiled grayscale overview image.
inline void write_montage(const Matrix& columns, int h, int w,
                          const std::filesystem::path& path,
                          MontageScale scale = MontageScale::Clamp) {
  if (columns.rows() != static_cast<Eigen::Index>(h) * w)
    throw std::invalid_argument("write_montage: column size mismatch");
  Matrix scaled = columns;
  if (scale == MontageScale::MinMax) {
    const double lo = columns.minCoeff(), hi = columns.maxCoeff();
    if (hi > lo) scaled = (columns.array() - lo) / (hi - lo);
  } else if (scale == MontageScale::Symmetric) {
    const double m = columns.cwiseAbs().maxCoeff();
    if (m > 0.0)
      scaled = 0.5 + 0.5 * columns.array() / m;
    else
      scaled.setConstant(0.5);
  }
  std::vector<Image> tiles;
  for (Eigen::Index i = 0; i < scaled.cols(); ++i)
    tiles.push_back(Eigen::Map<const Image>(scaled.col(i).data(), h, w));
  write_png_gray(tile_images(tiles), path);
}

/// Write the decomposition to a directory: the factors as binary matrices,
/// the transforms and traces as text, and four montage previews.
inline void save_result(const DecompositionResult& result,
                        const ImageBatch& batch,
                        const std::filesystem::path& dir) {
  validate_batch(batch);
  if (result.taus.count() != batch.count())
    throw std::invalid_argument("save_result: transform count mismatch");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (!std::filesystem::is_directory(dir))
    throw IoError("save_result: cannot create " + dir.string());

  save_matrix(result.vr, dir / "lowrank.lrdm");
  save_matrix(result.e, dir / "sparse.lrdm");

  std::ofstream out(dir / "result.txt");
  if (!out) throw IoError("save_result: cannot write result.txt");
  out << "lrd-result 1\n";
  out << "group " << group_name(result.taus.group()) << "\n";
  out << "count " << result.taus.count() << "\n";
  out << "converged " << (result.converged ? 1 : 0) << "\n";
  out << "inner_iters";
  for (int n : result.inner_iters) out << ' ' << n;
  out << "\n";
  out << "objective";
  for (double v : result.objective_trace)
    out << ' ' << detail::format_double(v);
  out << "\n";
  for (int i = 0; i < result.taus.count(); ++i) {
    out << "tau " << i;
    const Vector& z = result.taus.per_image[static_cast<std::size_t>(i)].zeta;
    for (Eigen::Index j = 0; j < z.size(); ++j)
      out << ' ' << detail::format_double(z(j));
    out << "\n";
  }
  if (!out) throw IoError("save_result: write failed");
  out.close();

  const int h = batch.height(), w = batch.width();
  std::vector<Image> input = batch.images;
  std::vector<Image> aligned;
  for (int i = 0; i < batch.count(); ++i)
    aligned.push_back(warp(batch.images[static_cast<std::size_t>(i)],
                           result.taus.per_image[static_cast<std::size_t>(i)]));
  write_png_gray(tile_images(input), dir / "montage_input.png");
  write_png_gray(tile_images(aligned), dir / "montage_aligned.png");
  write_montage(result.vr, h, w, dir / "montage_lowrank.png",
                MontageScale::MinMax);
  write_montage(result.e, h, w, dir / "montage_sparse.png",
                MontageScale::Symmetric);
}

/// Read back what save_result wrote (matrices and text; montages are
/// derived data and stay on disk).
inline DecompositionResult load_result(const std::filesystem::path& dir) {
  DecompositionResult res;
  res.vr = load_matrix(dir / "lowrank.lrdm");
  res.e = load_matrix(dir / "sparse.lrdm");

  const std::filesystem::path txt = dir / "result.txt";
  std::ifstream in(txt);
  if (!in) throw IoError("load_result: cannot open " + txt.string());
  const std::string where = txt.string();
  std::string line;
  if (!std::getline(in, line) || line != "lrd-result 1")
    throw FormatError(where + ": bad header");
  TransformGroup group = TransformGroup::Translation;
  int count = -1;
  std::vector<TransformParams> taus;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "group") {
      std::string name;
      ls >> name;
      group = group_from_name(name);
    } else if (key == "count") {
      ls >> count;
      if (!ls || count < 1) throw FormatError(where + ": bad count");
    } else if (key == "converged") {
      int flag = 0;
      ls >> flag;
      if (!ls) throw FormatError(where + ": bad converged flag");
      res.converged = flag != 0;
    } else if (key == "inner_iters") {
      int n;
      while (ls >> n) res.inner_iters.push_back(n);
    } else if (key == "objective") {
      std::string tok;
      while (ls >> tok)
        res.objective_trace.push_back(detail::parse_double(tok, where));
    } else if (key == "tau") {
      int idx = -1;
      ls >> idx;
      if (!ls || idx != static_cast<int>(taus.size()))
        throw FormatError(where + ": transform lines out of order");
      Vector z(param_count(group));
      std::string tok;
      for (Eigen::Index j = 0; j < z.size(); ++j) {
        if (!(ls >> tok)) throw FormatError(where + ": short transform line");
        z(j) = detail::parse_double(tok, where);
      }
      taus.emplace_back(group, z);
    } else {
      throw FormatError(where + ": unknown key '" + key + "'");
    }
  }
  if (count != static_cast<int>(taus.size()))
    throw FormatError(where + ": transform count mismatch");
  res.taus.per_image = std::move(taus);
  return res;
}

/// Write a bare transform stack (used for ground-truth files).
inline void save_transforms(const TransformStack& taus,
                            const std::filesystem::path& path) {
  if (taus.count() == 0)
    throw std::invalid_argument("save_transforms: empty stack");
  std::ofstream out(path);
  if (!out) throw IoError("save_transforms: cannot write " + path.string());
  out << "lrd-transforms 1\n";
  out << "group " << group_name(taus.group()) << "\n";
  out << "count " << taus.count() << "\n";
  for (int i = 0; i < taus.count(); ++i) {
    out << "tau " << i;
    const Vector& z = taus.per_image[static_cast<std::size_t>(i)].zeta;
    for (Eigen::Index j = 0; j < z.size(); ++j)
      out << ' ' << detail::format_double(z(j));
    out << "\n";
  }
  if (!out) throw IoError("save_transforms: write failed");
}

inline TransformStack load_transforms(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_transforms: cannot open " + path.string());
  const std::string where = path.string();
  std::string line;
  if (!std::getline(in, line) || line != "lrd-transforms 1")
    throw FormatError(where + ": bad header");
  TransformGroup group = TransformGroup::Translation;
  int count = -1;
  TransformStack st;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "group") {
      std::string name;
      ls >> name;
      group = group_from_name(name);
    } else if (key == "count") {
      ls >> count;
      if (!ls || count < 1) throw FormatError(where + ": bad count");
    } else if (key == "tau") {
      int idx = -1;
      ls >> idx;
      if (!ls || idx != static_cast<int>(st.per_image.size()))
        throw FormatError(where + ": transform lines out of order");
      Vector z(param_count(group));
      std::string tok;
      for (Eigen::Index j = 0; j < z.size(); ++j) {
        if (!(ls >> tok)) throw FormatError(where + ": short transform line");
        z(j) = detail::parse_double(tok, where);
      }
      st.per_image.emplace_back(group, z);
    } else {
      throw FormatError(where + ": unknown key '" + key + "'");
    }
  }
  if (count != st.count())
    throw FormatError(where + ": transform count mismatch");
  return st;
}

/// Ground-truth landmark sidecar for synthesized batches.
inline void save_landmarks(const std::vector<Eigen::Vector2d>& base,
                           const std::vector<std::vector<Eigen::Vector2d>>& per_image,
                           const std::filesystem::path& path) {
  if (base.empty())
    throw std::invalid_argument("save_landmarks: no base landmarks");
  std::ofstream out(path);
  if (!out) throw IoError("save_landmarks: cannot write " + path.string());
  out << "lrd-landmarks 1\n";
  out << "points " << base.size() << "\n";
  out << "base";
  for (const auto& p : base)
    out << ' ' << detail::format_double(p.x()) << ' '
        << detail::format_double(p.y());
  out << "\n";
  for (std::size_t i = 0; i < per_image.size(); ++i) {
    if (per_image[i].size() != base.size())
      throw std::invalid_argument("save_landmarks: landmark count mismatch");
    out << i;
    for (const auto& p : per_image[i])
      out << ' ' << detail::format_double(p.x()) << ' '
          << detail::format_double(p.y());
    out << "\n";
  }
  if (!out) throw IoError("save_landmarks: write failed");
}

struct LandmarkFile {
  std::vector<Eigen::Vector2d> base;
  std::vector<std::vector<Eigen::Vector2d>> per_image;
};

inline LandmarkFile load_landmarks(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_landmarks: cannot open " + path.string());
  const std::string where = path.string();
  std::string line;
  if (!std::getline(in, line) || line != "lrd-landmarks 1")
    throw FormatError(where + ": bad header");
  std::size_t points = 0;
  {
    if (!std::getline(in, line)) throw FormatError(where + ": missing points");
    std::istringstream ls(line);
    std::string key;
    ls >> key >> points;
    if (key != "points" || !ls || points == 0)
      throw FormatError(where + ": bad points line");
  }
  LandmarkFile f;
  const auto read_points = [&](std::istringstream& ls) {
    std::vector<Eigen::Vector2d> pts;
    std::string tx, ty;
    for (std::size_t j = 0; j < points; ++j) {
      if (!(ls >> tx >> ty)) throw FormatError(where + ": short point line");
      pts.emplace_back(detail::parse_double(tx, where),
                       detail::parse_double(ty, where));
    }
    return pts;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    if (line.rfind("base", 0) == 0) {
      std::string key;
      ls >> key;
      f.base = read_points(ls);
    } else {
      std::size_t idx = 0;
      ls >> idx;
      if (!ls || idx != f.per_image.size())
        throw FormatError(where + ": image lines out of order");
      f.per_image.push_back(read_points(ls));
    }
  }
  if (f.base.empty()) throw FormatError(where + ": missing base line");
  return f;
}

}  // namespace lrd
