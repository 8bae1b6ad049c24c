#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kscube/bounds.hpp"
#include "kscube/embeddings.hpp"

using namespace kscube;

namespace {

double explicit_constant(int n) { return (1.0 - std::pow(1.0 - 2.0 / n, n)) / 2.0; }

std::vector<std::vector<double>> cube_points(int k) {
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < (1 << k); ++i) {
    std::vector<double> x;
    for (int b = 0; b < k; ++b) x.push_back((i >> b) & 1);
    pts.push_back(std::move(x));
  }
  return pts;
}

double fp_error(std::size_t m, std::uint64_t seed) {
  std::vector<MatrixPoint> pts;
  for (auto x : enumerate_points(2)) pts.push_back(x);
  return fp_embed(pts, 4.0, m, seed).max_rel_error;
}

}  // namespace

TEST(KsPair, SmallestCase) {
  const auto pair = ks_pair(2, {1, 2});
  ASSERT_EQ(pair.expand.size(), 1u);
  EXPECT_DOUBLE_EQ(pair.expand[0].distance, 2.0);
  EXPECT_DOUBLE_EQ(pair.contract[0].distance, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(pair.constant, 2.0);
  EXPECT_NEAR(poincare_lower_bound(pair), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(poincare_lower_bound(ks_pair_enumerated(2, {1, 2})), 1.0 / std::sqrt(2.0), 1e-14);
}

TEST(KsPair, SideFourAndSixteen) {
  const auto p4 = ks_pair(4, {1, 2});
  EXPECT_DOUBLE_EQ(p4.expand[0].distance, 4.0);
  EXPECT_DOUBLE_EQ(p4.contract[0].distance, 2.0);
  EXPECT_DOUBLE_EQ(p4.constant, 32.0 / 15.0);
  EXPECT_NEAR(poincare_lower_bound(p4), 15.0 / 16.0, 1e-15);
  EXPECT_NEAR(poincare_lower_bound(ks_pair(16, {1, 2})), explicit_constant(16) * 4.0, 1e-13);
  EXPECT_NEAR(poincare_lower_bound(ks_pair(16, {1, 2})), 1.764, 5e-4);
}

TEST(KsPair, EqualExponentsAreVacuous) {
  for (int n : {2, 4, 8}) {
    const auto pair = ks_pair(n, {2, 2});
    EXPECT_NEAR(poincare_lower_bound(pair), 1.0 / pair.constant, 1e-15);
    EXPECT_LT(poincare_lower_bound(pair), 1.0);
  }
}

TEST(KsPair, SquaredExponent) {
  // D^2 >= (E_mu d^2 / E_nu d^2) / C: at n = 4, (16 / 4) / (32/15) = 15/8.
  EXPECT_NEAR(poincare_lower_bound(ks_pair(4, {1, 2}, 2.0)), std::sqrt(15.0 / 8.0), 1e-15);
}

TEST(KsPair, Errors) {
  EXPECT_THROW(ks_pair(3, {1, 2}), DomainError);
  EXPECT_THROW(ks_pair(4, {1, 2}, 2.5), DomainError);
  PoincarePair bad;
  bad.expand.push_back({1.0, 1.0, std::nullopt});
  bad.contract.push_back({0.0, 1.0, std::nullopt});
  EXPECT_THROW(poincare_lower_bound(bad), DomainError);
  bad.contract[0] = {1.0, -1.0, std::nullopt};
  EXPECT_THROW(poincare_lower_bound(bad), DomainError);
}

TEST(KsPair, DegenerateEqualMeasures) {
  PoincarePair pair;
  pair.expand = {{3.0, 0.5, std::nullopt}, {1.0, 0.5, std::nullopt}};
  pair.contract = pair.expand;
  pair.constant = 2.5;
  EXPECT_DOUBLE_EQ(poincare_lower_bound(pair), 1.0 / 2.5);
}

TEST(Asymptotic, ExamplesAndFallbacks) {
  EXPECT_DOUBLE_EQ(asymptotic_lower_bound(4, {1, 2}), 15.0 / 16.0);
  EXPECT_NEAR(asymptotic_lower_bound(2, {1, 2}), std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_NEAR(asymptotic_lower_bound(16, {1, 2}), 1.764, 5e-4);
  EXPECT_EQ(asymptotic_lower_bound(5, {1, 2}), asymptotic_lower_bound(4, {1, 2}));
  EXPECT_EQ(asymptotic_lower_bound(1, {1, 2}), 1.0);
  EXPECT_THROW(asymptotic_lower_bound(4, {2, 2}), DomainError);
  EXPECT_THROW(asymptotic_lower_bound(4, {2, 1}), DomainError);
  for (int n = 2; n <= 64; n += 2)
    for (auto pq : {PqParams{1, 2}, PqParams{1, 4}, PqParams{2, 4}})
      EXPECT_NEAR(asymptotic_lower_bound(n, pq), poincare_lower_bound(ks_pair(n, pq)), 1e-12 * n);
}

TEST(Asymptotic, RatioToSqrtNConvergesFromAbove) {
  // lower / sqrt(n) = (1 - (1-2/n)^n) / 2 decreases to (1 - e^{-2}) / 2.
  const double limit = (1.0 - std::exp(-2.0)) / 2.0;
  double prev = std::numeric_limits<double>::infinity();
  double prev_bound = 0.0;
  for (int n = 2; n <= 64; n += 2) {
    const double bound = asymptotic_lower_bound(n, {1, 2});
    const double ratio = bound / std::sqrt(static_cast<double>(n));
    EXPECT_LT(ratio, prev) << n;
    EXPECT_GT(ratio, limit) << n;
    EXPECT_LE(ratio, 0.5) << n;
    EXPECT_GT(bound, prev_bound) << n;
    prev = ratio;
    prev_bound = bound;
  }
  EXPECT_NEAR(prev, limit, 0.01);
}

TEST(Holder, Examples) {
  EXPECT_DOUBLE_EQ(holder_sandwich(4, 4, {1, 2}).c1_upper_bound, 2.0);
  EXPECT_NEAR(holder_sandwich(2, 2, {1, 2}).c1_upper_bound, std::sqrt(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(holder_sandwich(5, 1, {1, 2}).c1_upper_bound, 1.0);
  EXPECT_DOUBLE_EQ(holder_sandwich(4, 4, {1, 2}).lower_factor, 0.5);
  EXPECT_THROW(holder_sandwich(4, 4, {2, 2}), DomainError);
}

TEST(Holder, PointwiseValidation) {
  for (int n : {2, 3})
    for (auto pq : {PqParams{1, 2}, PqParams{1, 4}, PqParams{2, 4}}) {
      const auto h = holder_sandwich(n, n, pq);
      ASSERT_TRUE(h.validation.checked);
      EXPECT_TRUE(h.validation.holds);
      EXPECT_EQ(h.validation.differences, (std::uint64_t{1} << (n * n)) - 1);
    }
}

TEST(Holder, LowerNeverExceedsUpper) {
  for (int n = 2; n <= 64; ++n)
    for (auto pq : {PqParams{1, 2}, PqParams{1, 4}, PqParams{2, 4}, PqParams{1.5, 3}})
      EXPECT_LE(asymptotic_lower_bound(n, pq), holder_sandwich(n, n, pq, 0).c1_upper_bound);
}

TEST(Obstruction, Examples) {
  const auto o = coarse_obstruction(4, 1.0);
  EXPECT_DOUBLE_EQ(o.lower_arg, 4.0);
  EXPECT_DOUBLE_EQ(o.upper_arg, 2.0);
  EXPECT_EQ(o.constant_exact, Rational(32, 15));
  const auto h = coarse_obstruction(4, 0.5);
  EXPECT_DOUBLE_EQ(h.lower_arg, 2.0);
  EXPECT_DOUBLE_EQ(h.upper_arg, 1.0);

  const auto c = coarse_preset(16);
  EXPECT_NEAR(c.lower_arg, 4.0, 1e-15);
  EXPECT_NEAR(c.upper_arg, 1.0, 1e-15);
  const auto u = uniform_preset(16);
  EXPECT_NEAR(u.lower_arg, 1.0, 1e-15);
  EXPECT_NEAR(u.upper_arg, 0.25, 1e-15);

  auto id = [](double t) { return t; };
  auto sq = [](double t) { return t * t; };
  EXPECT_TRUE(o.admits(id, id));
  EXPECT_FALSE(o.admits(sq, id));

  const double e2 = std::exp(2.0);
  EXPECT_NEAR(coarse_preset(4096).constant, 2 * e2 / (e2 - 1), 1e-3);
  EXPECT_THROW(coarse_obstruction(5, 1.0), DomainError);
  EXPECT_THROW(coarse_obstruction(4, 0.0), DomainError);
}

TEST(PAboveTwo, Examples) {
  const auto r = p_gt_2_counterexample(4, 4.0);
  EXPECT_NEAR(r.ratio, std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(r.predicted_ratio, std::sqrt(2.0), 1e-15);
  // ||row difference||^4 = (sqrt 4)^4 = 16 and ||selector difference||^4 = 4.
  ASSERT_TRUE(r.row_norm_pow && r.selector_norm_pow && r.ratio_pow);
  EXPECT_EQ(*r.row_norm_pow, Rational(16));
  EXPECT_EQ(*r.selector_norm_pow, Rational(4));
  EXPECT_EQ(*r.ratio_pow, Rational(4));

  EXPECT_NEAR(p_gt_2_counterexample(16, 4.0, 1.0, 3, 8, 512).ratio, 2.0, 1e-12);
  EXPECT_NEAR(p_gt_2_counterexample(4, 4.0, 2.0).ratio, 2.0, 1e-12);
  EXPECT_NEAR(p_gt_2_counterexample(8, 2.0001).ratio, 1.0, 1e-4);
  EXPECT_FALSE(p_gt_2_counterexample(4, 3.0).ratio_pow.has_value());
  EXPECT_THROW(p_gt_2_counterexample(4, 2.0), DomainError);
  EXPECT_THROW(p_gt_2_counterexample(3, 4.0), DomainError);
}

TEST(Schoenberg, CubeExamples) {
  const auto pts = cube_points(3);
  const auto one = schoenberg_embed(pts, 1.0);
  const auto half = schoenberg_embed(pts, 0.5);
  for (std::size_t a = 0; a < 8; ++a)
    for (std::size_t b = 0; b < 8; ++b) {
      const double h = std::popcount(a ^ b);
      EXPECT_NEAR(one.achieved[a * 8 + b], std::sqrt(h), 1e-8 * std::max(1.0, h));
      EXPECT_NEAR(half.achieved[a * 8 + b], std::pow(h, 0.25), 1e-8 * std::max(1.0, h));
    }
  EXPECT_LE(one.max_rel_error, 1e-8);
  EXPECT_LE(half.max_rel_error, 1e-8);
  EXPECT_EQ(one.rank, 3u);
  EXPECT_GE(half.min_eigenvalue, -1e-10 * half.gram_trace);
}

TEST(Schoenberg, RandomRoundTrips) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (int t = 0; t < 10; ++t) {
    std::vector<std::vector<double>> pts(20, std::vector<double>(5));
    for (auto& x : pts)
      for (auto& v : x) v = g(rng);
    for (double beta : {1.0, 0.7, 0.3}) {
      const auto e = schoenberg_embed(pts, beta);
      EXPECT_LE(e.max_rel_error, 1e-8);
      EXPECT_GE(e.min_eigenvalue, -1e-9 * e.gram_trace);
      for (const auto& c : e.coordinates)
        for (double v : c) EXPECT_TRUE(std::isfinite(v));
    }
  }
}

TEST(Schoenberg, RejectsNonEuclideanAndBadExponent) {
  // Star with three leaves at mutual distance 2 and hub distance 1: a tree
  // metric, so its square root is Euclidean but the metric itself is not.
  const std::vector<double> star{0, 1, 1, 1, 1, 0, 2, 2, 1, 2, 0, 2, 1, 2, 2, 0};
  EXPECT_THROW(schoenberg_embed_distances(star, 4, 1.0), NumericalError);
  EXPECT_LE(schoenberg_embed_distances(star, 4, 0.5).max_rel_error, 1e-8);
  EXPECT_THROW(schoenberg_embed(cube_points(2), 0.0), DomainError);
  EXPECT_THROW(schoenberg_embed(cube_points(2), 1.5), DomainError);
}

TEST(Fp, MatrixCubeAtFiftyThousand) {
  EXPECT_LE(fp_error(50000, 20240611), 0.02);
}

TEST(Fp, ErrorShrinksWithSamples) {
  for (std::uint64_t seed : {1, 2, 3}) EXPECT_LT(fp_error(50000, seed), fp_error(500, seed)) << seed;
  // Mean error over seeds at three dyadic sizes a factor 4 apart should fall
  // by about 2 per step.
  std::vector<double> mean;
  for (std::size_t m : {2000, 8000, 32000}) {
    double s = 0;
    for (std::uint64_t seed = 10; seed < 22; ++seed) s += fp_error(m, seed);
    mean.push_back(s / 12);
  }
  EXPECT_GT(mean[0], mean[1]);
  EXPECT_GT(mean[1], mean[2]);
  const double decay = mean[0] / mean[2];
  EXPECT_GT(decay, 2.0);
  EXPECT_LT(decay, 8.0);
}

TEST(Fp, TwoPointsAndHomogeneity) {
  BitRows x{1, {0}}, y{1, {1}};
  const auto e = fp_embed(std::vector<BitRows>{x, y}, 4.0, 50000, 5);
  EXPECT_DOUBLE_EQ(e.intended[1], 1.0);
  EXPECT_NEAR(e.achieved[1], 1.0, 0.02);

  // Doubling every l1 distance scales targets by 2^{2/p}.
  BitRows x2{2, {0}}, y2{2, {3}};
  for (double p : {4.0, 6.0}) {
    const auto a = fp_embed(std::vector<BitRows>{x, y}, p, 50000, 5);
    const auto b = fp_embed(std::vector<BitRows>{x2, y2}, p, 50000, 5);
    EXPECT_NEAR(b.intended[1] / a.intended[1], std::pow(2.0, 2.0 / p), 1e-15);
    EXPECT_NEAR(b.achieved[1] / a.achieved[1], std::pow(2.0, 2.0 / p), 0.03);
  }
}

TEST(Fp, ThreadCountDoesNotChangeResult) {
  std::vector<MatrixPoint> pts;
  for (auto x : enumerate_points(2)) pts.push_back(x);
  const auto a = fp_embed(pts, 4.0, 20000, 9, 1);
  const auto b = fp_embed(pts, 4.0, 20000, 9, 4);
  EXPECT_EQ(a.achieved, b.achieved);
}

TEST(Fp, Errors) {
  std::vector<MatrixPoint> pts{MatrixPoint{2, 0}, MatrixPoint{2, 1}};
  EXPECT_THROW(fp_embed(pts, 3.0, 100, 1), DomainError);
  EXPECT_THROW(fp_embed(pts, 4.0, 0, 1), DomainError);
}
