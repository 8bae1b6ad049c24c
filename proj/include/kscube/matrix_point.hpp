#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ranges>
#include <span>
#include <string>
#include <vector>

#include "kscube/config.hpp"
#include "kscube/errors.hpp"

namespace kscube {

/// A point of M_n(F_2), bit-packed row-major: bit j*n + k holds x_{jk}
/// (zero-based). Addition in the group is bitwise XOR.
struct MatrixPoint {
  int n = 1;
  std::uint64_t index = 0;

  friend bool operator==(const MatrixPoint&, const MatrixPoint&) = default;

  bool entry(int j, int k) const { return (index >> (j * n + k)) & 1U; }

  MatrixPoint operator+(const MatrixPoint& other) const {
    if (other.n != n) throw DimensionMismatch("matrix points of different sizes");
    return {n, index ^ other.index};
  }
};

inline void check_side(int n) {
  if (n < 1 || n > Caps::kHardMaxN) {
    throw DomainError("side length must be in [1, " +
                      std::to_string(Caps::kHardMaxN) + "], got " +
                      std::to_string(n));
  }
}

/// 2^{n^2}; callers must have checked the side against a cap (n <= 7 here).
inline std::uint64_t point_count(int n) {
  check_side(n);
  if (n * n >= 64) throw SizeLimitError("2^{n^2} does not fit in 64 bits");
  return std::uint64_t{1} << (n * n);
}

inline std::uint64_t row_mask(int n, int j) {
  std::uint64_t ones = (n >= 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
  return ones << (j * n);
}

/// Bit mask of the selector sum e_{0,k_0} + ... + e_{n-1,k_{n-1}}.
inline std::uint64_t selector_mask(int n, std::span<const int> k) {
  if (static_cast<int>(k.size()) != n) {
    throw DimensionMismatch("selector must have one column index per row");
  }
  std::uint64_t mask = 0;
  for (int j = 0; j < n; ++j) {
    if (k[j] < 0 || k[j] >= n) {
      throw DomainError("selector column index " + std::to_string(k[j]) +
                        " out of range for n = " + std::to_string(n));
    }
    mask |= std::uint64_t{1} << (j * n + k[j]);
  }
  return mask;
}

/// Lazily yields every point of M_n(F_2) in increasing index order.
inline auto enumerate_points(int n, const Caps& caps = Caps::global()) {
  check_side(n);
  if (n > caps.max_stream_n) {
    throw SizeLimitError("enumeration of M_" + std::to_string(n) +
                         "(F_2) exceeds the cap n <= " +
                         std::to_string(caps.max_stream_n));
  }
  const std::uint64_t count = point_count(n);
  return std::views::iota(std::uint64_t{0}, count) |
         std::views::transform([n](std::uint64_t i) { return MatrixPoint{n, i}; });
}

/// x + sum_k e_{jk}: toggles every entry of row j.
inline MatrixPoint row_flip(const MatrixPoint& x, int j) {
  if (j < 0 || j >= x.n) {
    throw DomainError("row index " + std::to_string(j) + " out of range");
  }
  return {x.n, x.index ^ row_mask(x.n, j)};
}

/// x + sum_j e_{j,k_j}: toggles exactly one entry in each row.
inline MatrixPoint selector_flip(const MatrixPoint& x, std::span<const int> k) {
  return {x.n, x.index ^ selector_mask(x.n, k)};
}

/// Exponents of l_q^n(F_2^n, ||.||_p). Either may be +infinity (max norm).
struct PqParams {
  double p = 1.0;
  double q = 2.0;

  static constexpr double kInf = std::numeric_limits<double>::infinity();

  bool p_inf() const { return std::isinf(p); }
  bool q_inf() const { return std::isinf(q); }

  void validate() const {
    if (!(p > 0.0) || !(q > 0.0) || std::isnan(p) || std::isnan(q)) {
      throw DomainError("p and q must lie in (0, inf]");
    }
  }

  /// 1/p - 1/q.
  double gap() const { return (p_inf() ? 0.0 : 1.0 / p) - (q_inf() ? 0.0 : 1.0 / q); }
};

/// Per-row Hamming counts of a difference pattern on a rows x cols grid.
inline std::vector<int> row_profile(int rows, int cols, std::uint64_t diff) {
  std::vector<int> h(static_cast<std::size_t>(rows));
  for (int j = 0; j < rows; ++j) {
    h[j] = std::popcount((diff >> (j * cols)) & row_mask(cols, 0));
  }
  return h;
}

/// Mixed norm of a 0/1 difference given its row Hamming profile:
/// ( sum_j h_j^{q/p} )^{1/q}, with the max-norm conventions for infinities.
inline double pq_norm_of_profile(std::span<const int> profile, const PqParams& params) {
  params.validate();
  auto row_norm = [&](int h) {
    if (h == 0) return 0.0;
    return params.p_inf() ? 1.0 : std::pow(static_cast<double>(h), 1.0 / params.p);
  };
  if (params.q_inf()) {
    double m = 0.0;
    for (int h : profile) m = std::max(m, row_norm(h));
    return m;
  }
  double s = 0.0;
  for (int h : profile) {
    if (h == 0) continue;
    s += params.p_inf() ? 1.0 : std::pow(static_cast<double>(h), params.q / params.p);
  }
  return std::pow(s, 1.0 / params.q);
}

/// Distance in l_q^n(F_2^n, ||.||_p). Depends only on the row profile of x+y.
inline double pq_distance(const MatrixPoint& x, const MatrixPoint& y,
                          const PqParams& params) {
  if (x.n != y.n) throw DimensionMismatch("pq_distance: points of different sizes");
  auto profile = row_profile(x.n, x.n, x.index ^ y.index);
  return pq_norm_of_profile(profile, params);
}

inline int hamming(std::uint64_t a, std::uint64_t b) { return std::popcount(a ^ b); }

}  // namespace kscube
