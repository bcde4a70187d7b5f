#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include "lrd/core_ops.hpp"
#include "lrd/errors.hpp"

namespace lrd {

// Binary matrix container: magic "LRDM", then version, rows and cols as
// little-endian uint32, then rows*cols float64 values in column-major order,
// little-endian. Version is currently 1.
namespace detail {

constexpr char kMatrixMagic[4] = {'L', 'R', 'D', 'M'};
constexpr std::uint32_t kMatrixVersion = 1;

inline void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
               static_cast<char>((v >> 16) & 0xff),
               static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

inline std::uint32_t get_u32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw FormatError(path + ": truncated header");
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
         (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

inline void put_f64(std::ostream& out, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  char b[8];
  for (int i = 0; i < 8; ++i)
    b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(b, 8);
}

inline double get_f64(std::istream& in, const std::string& path) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8))
    throw FormatError(path + ": truncated data");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= std::uint64_t(b[i]) << (8 * i);
  double x;
  std::memcpy(&x, &bits, 8);
  return x;
}

}  // namespace detail

inline void save_matrix(const Matrix& a, const std::filesystem::path& path) {
  if (a.size() == 0)
    throw std::invalid_argument("save_matrix: matrix must be non-empty");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_matrix: cannot open " + path.string());
  out.write(detail::kMatrixMagic, 4);
  detail::put_u32(out, detail::kMatrixVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(a.rows()));
  detail::put_u32(out, static_cast<std::uint32_t>(a.cols()));
  for (Eigen::Index c = 0; c < a.cols(); ++c)
    for (Eigen::Index r = 0; r < a.rows(); ++r)
      detail::put_f64(out, a(r, c));
  if (!out) throw IoError("save_matrix: write failed for " + path.string());
}

inline Matrix load_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_matrix: cannot open " + path.string());
  const std::string name = path.string();
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, detail::kMatrixMagic, 4) != 0)
    throw FormatError(name + ": bad magic");
  const std::uint32_t version = detail::get_u32(in, name);
  if (version != detail::kMatrixVersion)
    throw FormatError(name + ": unsupported version " +
                      std::to_string(version));
  const std::uint32_t rows = detail::get_u32(in, name);
  const std::uint32_t cols = detail::get_u32(in, name);
  if (rows == 0 || cols == 0)
    throw FormatError(name + ": empty matrix");
  Matrix a(rows, cols);
  for (std::uint32_t c = 0; c < cols; ++c)
    for (std::uint32_t r = 0; r < rows; ++r) a(r, c) = detail::get_f64(in, name);
  // Anything left over means the header lied about the size.
  char extra;
  if (in.read(&extra, 1))
    throw FormatError(name + ": trailing bytes after matrix data");
  return a;
}

}  // namespace lrd
