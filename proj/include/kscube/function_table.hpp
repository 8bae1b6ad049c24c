#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "kscube/config.hpp"
#include "kscube/errors.hpp"
#include "kscube/matrix_point.hpp"

namespace kscube {

/// Dense table of f: M_n(F_2) -> R^d. values[x * d + c] is coordinate c of
/// f at the point with index x.
class FunctionTable {
 public:
  FunctionTable() = default;

  FunctionTable(int n, int d, const Caps& caps = Caps::global()) : n_(n), d_(d) {
    check_side(n);
    if (n > caps.max_table_n) {
      throw SizeLimitError("dense tables over M_" + std::to_string(n) +
                           "(F_2) exceed the cap n <= " + std::to_string(caps.max_table_n));
    }
    if (d < 1) throw DomainError("value dimension must be positive");
    values_.assign(static_cast<std::size_t>(point_count(n)) * d, 0.0);
  }

  FunctionTable(int n, int d, std::vector<double> values, const Caps& caps = Caps::global())
      : FunctionTable(n, d, caps) {
    if (values.size() != values_.size()) {
      throw DimensionMismatch("table needs exactly 2^{n^2} * d values");
    }
    values_ = std::move(values);
  }

  int n() const { return n_; }
  int d() const { return d_; }
  std::size_t points() const { return values_.size() / d_; }

  std::span<double> at(std::uint64_t x) { return {values_.data() + x * d_, static_cast<std::size_t>(d_)}; }
  std::span<const double> at(std::uint64_t x) const {
    return {values_.data() + x * d_, static_cast<std::size_t>(d_)};
  }
  double& scalar(std::uint64_t x) { return values_[x * d_]; }
  double scalar(std::uint64_t x) const { return values_[x * d_]; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  /// Two distinct values (scalar tables only); used by exact counting paths.
  bool two_valued(double& a, double& b) const {
    if (d_ != 1) return false;
    a = values_.front();
    bool have_b = false;
    for (double v : values_) {
      if (v == a) continue;
      if (!have_b) {
        b = v;
        have_b = true;
      } else if (v != b) {
        return false;
      }
    }
    if (!have_b) b = a;
    return true;
  }

 private:
  int n_ = 0;
  int d_ = 1;
  std::vector<double> values_;
};

/// Entries i.i.d. uniform on [-1, 1] from a seeded mt19937_64.
inline FunctionTable random_table(int n, int d, std::uint64_t seed,
                                  const Caps& caps = Caps::global()) {
  FunctionTable f(n, d, caps);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (double& v : f.values()) v = unif(rng);
  return f;
}

/// Table of a callable point -> scalar.
template <class Fn>
FunctionTable tabulate(int n, Fn&& fn, const Caps& caps = Caps::global()) {
  FunctionTable f(n, 1, caps);
  for (std::uint64_t x = 0; x < f.points(); ++x) f.scalar(x) = fn(MatrixPoint{n, x});
  return f;
}

// Binary layout (little-endian): "KSFT" magic, u32 version (1), u32 n,
// u32 d, u32 dtype (0 = float64), then 2^{n^2} * d float64 values,
// point-major with the coordinate index varying fastest.
namespace table_io {

inline constexpr char kMagic[4] = {'K', 'S', 'F', 'T'};
inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::uint32_t kDtypeF64 = 0;

inline void write_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw FormatError("truncated table header");
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

inline void write_binary(std::ostream& os, const FunctionTable& f) {
  os.write(kMagic, 4);
  write_u32(os, kVersion);
  write_u32(os, static_cast<std::uint32_t>(f.n()));
  write_u32(os, static_cast<std::uint32_t>(f.d()));
  write_u32(os, kDtypeF64);
  for (double v : f.values()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    write_u32(os, static_cast<std::uint32_t>(bits));
    write_u32(os, static_cast<std::uint32_t>(bits >> 32));
  }
}

inline FunctionTable read_binary(std::istream& is, const Caps& caps = Caps::global()) {
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("not a function table (bad magic)");
  }
  if (read_u32(is) != kVersion) throw FormatError("unsupported table version");
  const auto n = static_cast<int>(read_u32(is));
  const auto d = static_cast<int>(read_u32(is));
  if (read_u32(is) != kDtypeF64) throw FormatError("unsupported table dtype");
  FunctionTable f(n, d, caps);
  for (double& v : f.values()) {
    std::uint64_t lo = read_u32(is);
    std::uint64_t hi = read_u32(is);
    std::uint64_t bits = lo | (hi << 32);
    std::memcpy(&v, &bits, sizeof v);
  }
  return f;
}

}  // namespace table_io

}  // namespace kscube
