#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kscube/errors.hpp"
#include "kscube/matrix_point.hpp"
#include "kscube/parallel.hpp"

namespace kscube {

/// Coordinates of an explicit embedding together with the distances it was
/// meant to realize. max_rel_error is always reported.
struct EmbeddingResult {
  std::vector<std::vector<double>> coordinates;
  std::string target_norm;  // "l2" or "lp"
  double target_p = 2.0;
  std::size_t points = 0;
  std::vector<double> achieved;  // points x points
  std::vector<double> intended;  // points x points
  double max_rel_error = 0.0;
  // Spectrum of the double-centered Gram matrix (Schoenberg step).
  double min_eigenvalue = 0.0;
  double gram_trace = 0.0;
  std::size_t rank = 0;
  // Monte-Carlo leg (fp_embed only).
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline double max_relative_error(const std::vector<double>& achieved, const std::vector<double>& intended) {
  double worst = 0.0;
  for (std::size_t i = 0; i < achieved.size(); ++i) {
    if (intended[i] > 0.0) {
      worst = std::max(worst, std::abs(achieved[i] - intended[i]) / intended[i]);
    } else {
      worst = std::max(worst, std::abs(achieved[i]));
    }
  }
  return worst;
}

}  // namespace detail

/// Classical scaling of d^beta: G = -1/2 J (d^{2 beta}) J, coordinates from
/// the nonnegative spectrum. A spectrum below -1e-9 * trace is a hard error:
/// it means d^beta is not Euclidean.
inline EmbeddingResult schoenberg_embed_distances(const std::vector<double>& dist, std::size_t n, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("snowflake exponent must lie in (0, 1]");
  if (dist.size() != n * n) throw DimensionMismatch("distance matrix must be n x n");
  EmbeddingResult out;
  out.target_norm = "l2";
  out.points = n;
  out.intended.assign(n * n, 0.0);
  out.achieved.assign(n * n, 0.0);
  if (n == 0) return out;
  Eigen::MatrixXd sq(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double d = dist[i * n + j];
      if (d < 0.0 || !std::isfinite(d)) throw DomainError("distances must be finite and nonnegative");
      out.intended[i * n + j] = std::pow(d, beta);
      sq(i, j) = std::pow(d, 2.0 * beta);
    }
  const Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  const Eigen::MatrixXd G = -0.5 * J * sq * J;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
  if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
  const Eigen::VectorXd lambda = eig.eigenvalues();
  out.gram_trace = G.trace();
  out.min_eigenvalue = lambda.minCoeff();
  const double scale = std::max(out.gram_trace, std::numeric_limits<double>::min());
  if (out.min_eigenvalue < -1e-9 * scale) {
    throw NumericalError("centered Gram matrix has eigenvalue " + std::to_string(out.min_eigenvalue) +
                         " below -1e-9 * trace: the snowflaked input is not Euclidean");
  }
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < lambda.size(); ++k)
    if (lambda(k) > 1e-12 * scale) keep.push_back(k);
  out.rank = keep.size();
  out.coordinates.assign(n, std::vector<double>(keep.size(), 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < keep.size(); ++c)
      out.coordinates[i][c] = eig.eigenvectors()(static_cast<Eigen::Index>(i), keep[c]) * std::sqrt(lambda(keep[c]));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < keep.size(); ++c) {
        const double t = out.coordinates[i][c] - out.coordinates[j][c];
        s += t * t;
      }
      out.achieved[i * n + j] = out.achieved[j * n + i] = std::sqrt(s);
    }
  out.max_rel_error = detail::max_relative_error(out.achieved, out.intended);
  return out;
}

/// Points of R^k with the Euclidean metric, snowflaked by beta.
inline EmbeddingResult schoenberg_embed(const std::vector<std::vector<double>>& points, double beta) {
  const std::size_t n = points.size();
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (points[i].size() != points[j].size()) throw DimensionMismatch("points of different dimensions");
      double s = 0.0;
      for (std::size_t c = 0; c < points[i].size(); ++c) {
        const double t = points[i][c] - points[j][c];
        s += t * t;
      }
      dist[i * n + j] = std::sqrt(s);
    }
  return schoenberg_embed_distances(dist, n, beta);
}

/// A 0/1 matrix with rows of `cols` bits, one word per row.
struct BitRows {
  int cols = 0;
  std::vector<std::uint64_t> rows;

  static BitRows from_point(const MatrixPoint& x) {
    BitRows b;
    b.cols = x.n;
    for (int j = 0; j < x.n; ++j) b.rows.push_back((x.index >> (j * x.n)) & row_mask(x.n, 0));
    return b;
  }
};

/// (sum_j ||x_j - y_j||_1^2)^{1/2}.
inline double l2_of_l1(const BitRows& x, const BitRows& y) {
  if (x.rows.size() != y.rows.size() || x.cols != y.cols) throw DimensionMismatch("points of different shapes");
  double s = 0.0;
  for (std::size_t j = 0; j < x.rows.size(); ++j) {
    const double h = std::popcount(x.rows[j] ^ y.rows[j]);
    s += h * h;
  }
  return std::sqrt(s);
}

/// E|g|^p for a standard Gaussian g: 2^{p/2} Gamma((p+1)/2) / sqrt(pi).
inline double gaussian_abs_moment(double p) {
  return std::pow(2.0, p / 2.0) * std::tgamma((p + 1.0) / 2.0) / std::sqrt(M_PI);
}

/// Finite-scale rendering of x -> (S sigma T(x_j))_j from l_2(l_1) into
/// l_p(l_p^m): T is the identity on 0/1 rows (||Tx-Ty||_2 = ||x-y||_1^{1/2}),
/// sigma is the Schoenberg snowflake with exponent 4/p, and S maps l_2 into
/// l_p^m with m scaled Gaussian functionals. The same sigma and S act on
/// every row. Only S is approximate; its error is what max_rel_error shows.
/// Gaussians are drawn in chunks of 4096 rows, chunk c seeded by (seed, c),
/// so the result does not depend on the thread count.
inline EmbeddingResult fp_embed(const std::vector<BitRows>& points, double p, std::size_t m, std::uint64_t seed,
                                int threads = 1, bool keep_coordinates = false) {
  if (!(p >= 4.0) || !std::isfinite(p)) throw DomainError("fp_embed needs finite p >= 4 (so that 4/p <= 1)");
  if (m == 0) throw DomainError("target dimension must be positive");
  const std::size_t n = points.size();
  EmbeddingResult out;
  out.target_norm = "lp";
  out.target_p = p;
  out.points = n;
  out.samples = m;
  out.seed = seed;
  if (n == 0) return out;
  const int cols = points[0].cols;
  const std::size_t nrows = points[0].rows.size();
  for (const auto& x : points)
    if (x.cols != cols || x.rows.size() != nrows) throw DimensionMismatch("points of different shapes");

  // Row universe and its Schoenberg image (T then sigma).
  std::map<std::uint64_t, std::size_t> slot;
  std::vector<std::uint64_t> words;
  for (const auto& x : points)
    for (auto w : x.rows)
      if (slot.emplace(w, words.size()).second) words.push_back(w);
  std::vector<std::vector<double>> tvecs;
  for (auto w : words) {
    std::vector<double> v(static_cast<std::size_t>(cols));
    for (int c = 0; c < cols; ++c) v[c] = static_cast<double>((w >> c) & 1U);
    tvecs.push_back(std::move(v));
  }
  const EmbeddingResult sigma = schoenberg_embed(tvecs, 4.0 / p);
  out.min_eigenvalue = sigma.min_eigenvalue;
  out.gram_trace = sigma.gram_trace;
  out.rank = sigma.rank;
  const std::size_t r = sigma.rank;
  const std::size_t u = words.size();

  // S on the sigma images: rows of the Gaussian matrix in seeded chunks.
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (m + kChunk - 1) / kChunk;
  const double scale = std::pow(gaussian_abs_moment(p) * static_cast<double>(m), -1.0 / p);
  std::vector<double> images(u * m, 0.0);  // images[w * m + i]
  parallel_chunks(chunks, threads, [&](std::size_t c) {
    std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
    std::mt19937_64 rng(sq);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t lo = c * kChunk, hi = std::min(m, lo + kChunk);
    std::vector<double> g(r);
    for (std::size_t i = lo; i < hi; ++i) {
      for (auto& v : g) v = gauss(rng);
      for (std::size_t w = 0; w < u; ++w) {
        double s = 0.0;
        for (std::size_t k = 0; k < r; ++k) s += g[k] * sigma.coordinates[w][k];
        images[w * m + i] = scale * s;
      }
    }
  });

  // ||S sigma(a) - S sigma(b)||_p^p for every pair of row words.
  std::vector<double> row_pow(u * u, 0.0);
  for (std::size_t a = 0; a < u; ++a)
    for (std::size_t b = a + 1; b < u; ++b) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += std::pow(std::abs(images[a * m + i] - images[b * m + i]), p);
      row_pow[a * u + b] = row_pow[b * u + a] = s;
    }

  out.achieved.assign(n * n, 0.0);
  out.intended.assign(n * n, 0.0);
  for (std::size_t x = 0; x < n; ++x)
    for (std::size_t y = x + 1; y < n; ++y) {
      double s = 0.0;
      for (std::size_t j = 0; j < nrows; ++j) s += row_pow[slot[points[x].rows[j]] * u + slot[points[y].rows[j]]];
      out.achieved[x * n + y] = out.achieved[y * n + x] = std::pow(s, 1.0 / p);
      out.intended[x * n + y] = out.intended[y * n + x] = std::pow(l2_of_l1(points[x], points[y]), 2.0 / p);
    }
  out.max_rel_error = detail::max_relative_error(out.achieved, out.intended);
  if (keep_coordinates) {
    out.coordinates.assign(n, {});
    for (std::size_t x = 0; x < n; ++x) {
      auto& c = out.coordinates[x];
      c.reserve(nrows * m);
      for (auto w : points[x].rows) {
        const std::size_t s = slot[w];
        c.insert(c.end(), images.begin() + static_cast<std::ptrdiff_t>(s * m),
                 images.begin() + static_cast<std::ptrdiff_t>((s + 1) * m));
      }
    }
  }
  return out;
}

inline EmbeddingResult fp_embed(const std::vector<MatrixPoint>& points, double p, std::size_t m,
                                std::uint64_t seed, int threads = 1, bool keep_coordinates = false) {
  std::vector<BitRows> rows;
  rows.reserve(points.size());
  for (const auto& x : points) rows.push_back(BitRows::from_point(x));
  return fp_embed(rows, p, m, seed, threads, keep_coordinates);
}

}  // namespace kscube
