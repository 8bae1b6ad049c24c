#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kscube/config.hpp"
#include "kscube/errors.hpp"
#include "kscube/matrix_point.hpp"
#include "kscube/rational.hpp"

namespace kscube {

/// A labeled finite point set with a symmetric distance matrix. Distances are
/// always available as doubles; exact spaces additionally carry the rational
/// matrix the doubles were rounded from. Metric axioms are validated on
/// construction (exactly for rationals, 1e-12 relative for floats).
class FiniteMetricSpace {
 public:
  FiniteMetricSpace() = default;

  static FiniteMetricSpace from_floats(std::vector<std::string> labels,
                                       std::vector<double> dist,
                                       std::string provenance = {}) {
    FiniteMetricSpace s;
    s.labels_ = std::move(labels);
    s.dist_ = std::move(dist);
    s.provenance_ = std::move(provenance);
    s.validate_floats();
    return s;
  }

  static FiniteMetricSpace from_rationals(std::vector<std::string> labels,
                                          std::vector<Rational> dist,
                                          std::string provenance = {}) {
    FiniteMetricSpace s;
    s.labels_ = std::move(labels);
    s.provenance_ = std::move(provenance);
    s.exact_ = std::move(dist);
    s.validate_exact();
    s.dist_.reserve(s.exact_->size());
    for (const auto& r : *s.exact_) s.dist_.push_back(to_double(r));
    return s;
  }

  std::size_t size() const { return labels_.size(); }
  bool exact() const { return exact_.has_value(); }
  double dist(std::size_t i, std::size_t j) const { return dist_[i * size() + j]; }
  const Rational& exact_dist(std::size_t i, std::size_t j) const {
    if (!exact_) throw DomainError("space carries no exact distances");
    return (*exact_)[i * size() + j];
  }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::string& provenance() const { return provenance_; }
  void set_provenance(std::string p) { provenance_ = std::move(p); }
  const std::vector<double>& matrix() const { return dist_; }

  /// Subspace on the given point indices (in the given order).
  FiniteMetricSpace subspace(const std::vector<std::size_t>& idx) const {
    std::vector<std::string> labels;
    for (auto i : idx) labels.push_back(labels_.at(i));
    const std::size_t m = idx.size();
    if (exact_) {
      std::vector<Rational> d(m * m);
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) d[a * m + b] = exact_dist(idx[a], idx[b]);
      return from_rationals(std::move(labels), std::move(d), provenance_ + "/subspace");
    }
    std::vector<double> d(m * m);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) d[a * m + b] = dist(idx[a], idx[b]);
    return from_floats(std::move(labels), std::move(d), provenance_ + "/subspace");
  }

 private:
  void check_shape(std::size_t entries) const {
    if (entries != size() * size()) {
      throw DimensionMismatch("distance matrix must be N x N with N = number of labels");
    }
  }

  void validate_floats() const {
    check_shape(dist_.size());
    const std::size_t n = size();
    double scale = 0.0;
    for (double v : dist_) {
      if (!std::isfinite(v) || v < 0.0) throw DomainError("distances must be finite and nonnegative");
      scale = std::max(scale, v);
    }
    const double tol = 1e-12 * scale;
    for (std::size_t i = 0; i < n; ++i) {
      if (dist(i, i) != 0.0) throw DomainError("nonzero diagonal entry");
      for (std::size_t j = 0; j < n; ++j) {
        if (std::abs(dist(i, j) - dist(j, i)) > tol) throw DomainError("distance matrix is not symmetric");
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          if (dist(i, k) > dist(i, j) + dist(j, k) + tol) {
            throw DomainError("triangle inequality violated at (" + labels_[i] + ", " +
                              labels_[j] + ", " + labels_[k] + ")");
          }
  }

  void validate_exact() const {
    check_shape(exact_->size());
    const std::size_t n = size();
    for (const auto& v : *exact_)
      if (v < 0) throw DomainError("distances must be nonnegative");
    for (std::size_t i = 0; i < n; ++i) {
      if (exact_dist(i, i) != 0) throw DomainError("nonzero diagonal entry");
      for (std::size_t j = 0; j < n; ++j)
        if (exact_dist(i, j) != exact_dist(j, i)) throw DomainError("distance matrix is not symmetric");
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          if (exact_dist(i, k) > exact_dist(i, j) + exact_dist(j, k)) {
            throw DomainError("triangle inequality violated at (" + labels_[i] + ", " +
                              labels_[j] + ", " + labels_[k] + ")");
          }
  }

  std::vector<std::string> labels_;
  std::vector<double> dist_;
  std::optional<std::vector<Rational>> exact_;
  std::string provenance_;
};

namespace detail {

inline bool integral(double v) { return std::isfinite(v) && v == std::floor(v) && v > 0 && v <= 64; }

/// Exact pq distance of a row profile, when it is rational.
inline std::optional<Rational> exact_pq_norm(std::span<const int> profile, const PqParams& params) {
  if (params.p_inf() || params.q_inf()) {
    // Row norms are h^{1/p} (or 0/1 for p = inf); the max is exact when the
    // largest row norm is.
    int hmax = 0;
    int nonzero = 0;
    for (int h : profile) {
      hmax = std::max(hmax, h);
      nonzero += (h > 0);
    }
    if (params.q_inf()) {
      if (params.p_inf()) return Rational(hmax > 0 ? 1 : 0);
      if (!integral(params.p)) return std::nullopt;
      Rational out;
      if (exact_root(Rational(hmax), static_cast<unsigned>(params.p), out)) return out;
      return std::nullopt;
    }
    if (!integral(params.q)) return std::nullopt;
    Rational out;
    if (exact_root(Rational(nonzero), static_cast<unsigned>(params.q), out)) return out;
    return std::nullopt;
  }
  const double ratio = params.q / params.p;
  if (!integral(ratio) || !integral(params.q)) return std::nullopt;
  BigInt s = 0;
  for (int h : profile) s += ipow(BigInt(h), static_cast<unsigned>(ratio));
  Rational out;
  if (exact_root(Rational(s), static_cast<unsigned>(params.q), out)) return out;
  return std::nullopt;
}

}  // namespace detail

/// Full distance matrix of l_q^n(F_2^n, ||.||_p) over all 2^{n^2} points.
/// The result is exact when every distance is rational.
inline FiniteMetricSpace materialize_space(int n, const PqParams& params,
                                           const Caps& caps = Caps::global()) {
  params.validate();
  check_side(n);
  if (n * n >= 31 || (std::uint64_t{1} << (n * n)) > static_cast<std::uint64_t>(caps.max_lp_points)) {
    throw SizeLimitError("materialize_space: 2^{n^2} exceeds the LP point cap " +
                         std::to_string(caps.max_lp_points));
  }
  const std::size_t count = std::size_t{1} << (n * n);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < count; ++i) labels.push_back(std::to_string(i));

  std::vector<Rational> exact(count * count);
  std::vector<double> approx(count * count);
  bool all_exact = true;
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < count; ++j) {
      auto prof = row_profile(n, n, i ^ j);
      approx[i * count + j] = pq_norm_of_profile(prof, params);
      if (all_exact) {
        if (auto r = detail::exact_pq_norm(prof, params)) {
          exact[i * count + j] = *r;
        } else {
          all_exact = false;
        }
      }
    }
  }
  std::string prov = "materialize_space(n=" + std::to_string(n) + ", p=" +
                     std::to_string(params.p) + ", q=" + std::to_string(params.q) + ")";
  if (all_exact) return FiniteMetricSpace::from_rationals(std::move(labels), std::move(exact), prov);
  return FiniteMetricSpace::from_floats(std::move(labels), std::move(approx), prov);
}

/// F_2^k with the Hamming metric (exact).
inline FiniteMetricSpace hamming_cube_space(int k) {
  if (k < 0 || k > 10) throw DomainError("hamming_cube_space: k must be in [0, 10]");
  const std::size_t count = std::size_t{1} << k;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < count; ++i) labels.push_back(std::to_string(i));
  std::vector<Rational> d(count * count);
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j < count; ++j) d[i * count + j] = Rational(hamming(i, j));
  return FiniteMetricSpace::from_rationals(std::move(labels), std::move(d),
                                           "hamming_cube(k=" + std::to_string(k) + ")");
}

}  // namespace kscube
