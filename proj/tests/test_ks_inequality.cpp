#include <gtest/gtest.h>

#include <cmath>

#include "kscube/ks_inequality.hpp"

using namespace kscube;

namespace {

// Literal evaluation of the y-averaged sides: loops over j, k, y and x with
// no shift deduplication.
std::pair<double, double> y_sides_brute(const FunctionTable& f, double theta) {
  const int n = f.n();
  auto d = [&](std::uint64_t x, std::uint64_t t) {
    double s = 0;
    for (int c = 0; c < f.d(); ++c) {
      const double v = f.at(x ^ t)[c] - f.at(x)[c];
      s += v * v;
    }
    return s == 0 ? 0.0 : std::pow(s, theta / 2);
  };
  const double N = static_cast<double>(f.points());
  const double Y = std::ldexp(1.0, n);
  double lhs = 0;
  for (int j = 0; j < n; ++j)
    for (std::uint32_t y = 0; y < (1u << n); ++y)
      for (std::uint64_t x = 0; x < f.points(); ++x) lhs += d(x, ((y >> j) & 1u) ? row_mask(n, j) : 0);
  lhs /= n * N * Y;
  double rhs = 0;
  const auto sels = selector_masks(n);
  for (auto k : sels)
    for (std::uint32_t y = 0; y < (1u << n); ++y) {
      std::uint64_t t = 0;
      for (int j = 0; j < n; ++j)
        if ((y >> j) & 1u) t |= k & row_mask(n, j);
      for (std::uint64_t x = 0; x < f.points(); ++x) rhs += d(x, t);
    }
  rhs /= static_cast<double>(sels.size()) * N * Y;
  return {lhs, rhs};
}

FunctionTable indicator(std::uint16_t s) {
  return tabulate(2, [s](const MatrixPoint& x) { return ((s >> x.index) & 1u) ? 1.0 : 0.0; });
}

}  // namespace

TEST(Constant, Examples) {
  EXPECT_EQ(ks_constant(2).unnormalized, Rational(1));
  EXPECT_EQ(ks_constant(2).normalized, Rational(2));
  EXPECT_EQ(ks_constant(4).unnormalized, Rational(1, 30));
  EXPECT_EQ(ks_constant(4).normalized, Rational(32, 15));
  EXPECT_THROW(ks_constant(3), DomainError);
  EXPECT_NEAR(kKsSupremum, 2.3130352854993315, 1e-15);
  double prev = 0;
  for (int n = 2; n <= 40; n += 2) {
    const double c = to_double(ks_constant(n).normalized);
    EXPECT_GT(c, prev);
    EXPECT_LT(c, kKsSupremum);
    prev = c;
  }
  EXPECT_NEAR(to_double(ks_constant(400).normalized), kKsSupremum, 2e-3);
}

TEST(Constant, YVariantAgainstStandard) {
  EXPECT_EQ(y_variant_constant(2), Rational(8, 3));
  EXPECT_EQ(y_variant_constant(3), Rational(54, 19));
  for (int n = 1; n <= 30; ++n) EXPECT_LT(to_double(y_variant_constant(n)), kKsYSupremum);
  for (int n = 2; n <= 30; n += 2) EXPECT_GE(y_variant_constant(n), ks_constant(n).normalized / 2);
}

TEST(Standard, PhiEqualityExact) {
  const auto r2 = ks_sides(witness_phi(2), 2.0);
  ASSERT_TRUE(r2.exact);
  EXPECT_EQ(*r2.lhs_exact, Rational(128));  // 32 crossings, |2|^2 each
  EXPECT_EQ(*r2.rhs_exact, Rational(128));
  EXPECT_EQ(r2.slack, 0.0);
  const auto r1 = ks_sides(witness_phi(2), 1.0);
  EXPECT_EQ(*r1.lhs_exact, Rational(64));
  EXPECT_EQ(*r1.rhs_exact, Rational(64));

  const auto r4 = ks_sides(witness_phi(4), 1.0);
  const BigInt p16 = ipow(BigInt(2), 16);
  EXPECT_EQ(*r4.lhs_exact, Rational(4 * p16 * 2));
  EXPECT_EQ(*r4.rhs_exact, Rational(p16 * 240));
  EXPECT_EQ(*r4.lhs_exact / *r4.rhs_exact, Rational(1, 30));
  EXPECT_TRUE(r4.holds);
}

TEST(Standard, PhiFlipsUnderEveryRow) {
  const auto phi = phi_character(2);
  for (auto x : enumerate_points(2))
    for (int j = 0; j < 2; ++j) EXPECT_EQ(phi(row_flip(x, j)), -phi(x));
}

TEST(Standard, ConstantTable) {
  const auto c = tabulate(2, [](const MatrixPoint&) { return 3.0; });
  const auto r = ks_sides(c, 1.0);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_EQ(r.rhs, 0.0);
  EXPECT_TRUE(r.holds);
}

TEST(Standard, OddSideRejected) { EXPECT_THROW(ks_sides(witness_odd(3), 1.0), DomainError); }

TEST(Standard, RandomTablesN2) {
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto f = random_table(2, 1 + static_cast<int>(s % 3), s);
    for (double theta : {0.5, 1.0, 2.0}) EXPECT_TRUE(ks_sides(f, theta).holds) << s << " " << theta;
  }
}

TEST(Standard, RandomTablesN4) {
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto f = random_table(4, 1, 5000 + s);
    for (double theta : {1.0, 2.0}) EXPECT_TRUE(ks_sides(f, theta).holds) << s << " " << theta;
  }
}

TEST(YVariant, MatchesLiteralEnumeration) {
  for (int n : {2, 3}) {
    for (std::uint64_t s = 0; s < 4; ++s) {
      const auto f = random_table(n, 1 + static_cast<int>(s % 2), 300 + s);
      for (double theta : {1.0, 2.0}) {
        const auto r = ks_y_variant_sides(f, theta);
        const auto [lhs, rhs] = y_sides_brute(f, theta);
        EXPECT_NEAR(r.lhs, lhs, 1e-12 * lhs);
        EXPECT_NEAR(r.rhs, rhs, 1e-12 * rhs);
      }
    }
    const auto w = n == 2 ? witness_phi(2) : witness_odd(3);
    const auto r = ks_y_variant_sides(w, 1.0);
    ASSERT_TRUE(r.exact);
    const auto [lhs, rhs] = y_sides_brute(w, 1.0);
    EXPECT_EQ(to_double(*r.lhs_exact), lhs);
    EXPECT_EQ(to_double(*r.rhs_exact), rhs);
  }
}

TEST(YVariant, ParityAtThree) {
  const auto parity = tabulate(3, [](const MatrixPoint& x) { return (std::popcount(x.index) & 1) ? 1.0 : -1.0; });
  // Selectors toggle three entries, so full parity flips under every one of them.
  const auto standard = standard_sums(parity, 1.0);
  ASSERT_TRUE(standard.rhs_crossings.has_value());
  EXPECT_EQ(*standard.rhs_crossings, 27u * 512u);
  const auto r = ks_y_variant_sides(parity, 1.0);
  EXPECT_TRUE(r.holds);
  EXPECT_GT(r.rhs, 0.0);
}

TEST(YVariant, RandomTables) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto r = ks_y_variant_sides(random_table(2, 1, 900 + s), 2.0);
    EXPECT_EQ(r.constant, Rational(8, 3));
    EXPECT_TRUE(r.holds);
  }
  for (std::uint64_t s = 0; s < 20; ++s)
    for (double theta : {1.0, 2.0}) EXPECT_TRUE(ks_y_variant_sides(random_table(3, 2, 1900 + s), theta).holds);
  const auto c = ks_y_variant_sides(tabulate(3, [](const MatrixPoint&) { return 1.0; }), 1.0);
  EXPECT_EQ(c.lhs, 0.0);
  EXPECT_EQ(c.rhs, 0.0);
}

TEST(OddWitness, StandardRhsVanishes) {
  const auto s = standard_sums(witness_odd(3), 1.0);
  EXPECT_EQ(*s.rhs_crossings, 0u);
  EXPECT_EQ(s.lhs, 2.0 * 1024.0);
  // n = 5 by the closed form over all 3125 selectors, plus sampled spot checks.
  const auto w5 = odd_character(5);
  EXPECT_EQ(w5.crossings(selector_masks(5)), 0);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 1000; ++i) {
    std::vector<int> k(5);
    for (auto& v : k) v = static_cast<int>(rng() % 5);
    const MatrixPoint x{5, rng() & ((std::uint64_t{1} << 25) - 1)};
    EXPECT_EQ(w5(selector_flip(x, k)), w5(x));
  }
  EXPECT_EQ(w5.flipping_rows(), 4);
  EXPECT_THROW(odd_character(4), DomainError);
}

TEST(Permutation, PsiAtFour) {
  const auto r = permutation_variant_sides(witness_psi(4), 1.0);
  ASSERT_TRUE(r.exact);
  EXPECT_EQ(*r.lhs_exact, Rational(ipow(BigInt(2), 17)));
  EXPECT_EQ(*r.rhs_exact, Rational(ipow(BigInt(2), 18), 4));
  EXPECT_EQ(r.constant, Rational(2));
  const auto tot = character_totals(psi_character(4), true);
  EXPECT_EQ(tot.permutation_total, ipow(BigInt(2), 18) * 6);
  EXPECT_EQ(psi_character(4).flipping_rows(), 4);
  EXPECT_THROW(psi_character(2), DomainError);
  EXPECT_THROW(psi_character(5), DomainError);
}

TEST(Permutation, ClosedFormAgreesWithEnumeration) {
  for (int n : {4, 6}) {
    EXPECT_EQ(psi_flipping_permutations_by_first_image(n), psi_character(n).flipping_permutations()) << n;
  }
  // K = n/2 exactly for n = 4, 6, 8 from the closed form.
  for (int n : {4, 6, 8}) {
    const auto w = psi_character(n);
    BigInt fact = 1;
    for (int i = 2; i <= n; ++i) fact *= i;
    const Rational lhs(character_totals(w, false).row_total, n);
    const Rational rhs(2 * ipow(BigInt(2), n * n) * psi_flipping_permutations_by_first_image(n), fact);
    EXPECT_EQ(lhs / rhs, Rational(n, 2)) << n;
  }
}

TEST(Permutation, ConstantAndPhi) {
  const auto c = permutation_variant_sides(tabulate(2, [](const MatrixPoint&) { return 0.0; }));
  EXPECT_EQ(c.lhs, 0.0);
  EXPECT_EQ(c.rhs, 0.0);
  // phi at n = 2 flips under a permutation iff it has an odd number of fixed
  // points; neither permutation of two elements does, so no finite K exists.
  const auto r = permutation_variant_sides(witness_phi(2), 1.0);
  ASSERT_TRUE(r.exact);
  EXPECT_EQ(*r.lhs_exact, Rational(32));
  EXPECT_EQ(*r.rhs_exact, Rational(0));
  EXPECT_FALSE(r.holds);
  EXPECT_EQ(character_totals(phi_character(2), true).permutation_total, 0);
  // At n = 4 the ratio is finite; count permutations with an odd number of fixed points.
  const auto r4 = permutation_variant_sides(witness_phi(4), 1.0);
  BigInt odd_fixed = 0;
  std::vector<int> pi{0, 1, 2, 3};
  do {
    int fixed = 0;
    for (int i = 0; i < 4; ++i) fixed += pi[i] == i;
    odd_fixed += fixed % 2;
  } while (std::next_permutation(pi.begin(), pi.end()));
  EXPECT_EQ(*r4.rhs_exact, Rational(2 * ipow(BigInt(2), 16) * odd_fixed, 24));
  EXPECT_GT(r4.constant, Rational(0));
}

TEST(Isoperimetric, TrivialSets) {
  SubsetWitness empty(2);
  const auto r = isoperimetric_check(empty);
  EXPECT_EQ(*r.lhs_exact, 0);
  EXPECT_EQ(*r.rhs_exact, 0);
  const auto all = isoperimetric_check(SubsetWitness::from_mask16(0xFFFF));
  EXPECT_EQ(*all.lhs_exact, 0);
  EXPECT_TRUE(all.holds);
}

TEST(Isoperimetric, PhiLevelSetIsEquality) {
  const auto s = SubsetWitness::where(2, [](const MatrixPoint& x) { return x.entry(0, 0) == x.entry(1, 1); });
  const auto r = isoperimetric_check(s);
  // Each x in the 8-point level set leaves it under both row flips and under
  // the two selectors that hit exactly one diagonal entry.
  EXPECT_EQ(*r.lhs_exact, 16);
  EXPECT_EQ(*r.rhs_exact, 16);
  EXPECT_EQ(r.slack, 0.0);
}

TEST(Isoperimetric, ExhaustiveN2) {
  const auto sweep = isoperimetric_exhaustive_n2();
  EXPECT_EQ(sweep.subsets, 65536u);
  EXPECT_EQ(sweep.violations, 0u);
  EXPECT_TRUE(sweep.phi_level_set_is_equality);
  EXPECT_NE(std::find(sweep.equality_cases.begin(), sweep.equality_cases.end(), sweep.phi_level_set),
            sweep.equality_cases.end());
}

TEST(Isoperimetric, IndicatorCountsEachCrossingTwice) {
  for (std::uint32_t s = 0; s < (1u << 16); s += 1) {
    const auto r = ks_sides(indicator(static_cast<std::uint16_t>(s)), 1.0);
    const auto iso = isoperimetric_check(SubsetWitness::from_mask16(static_cast<std::uint16_t>(s)));
    ASSERT_EQ(r.lhs, 2 * iso.lhs) << s;
    ASSERT_EQ(r.rhs, 2 * iso.rhs) << s;
  }
}

TEST(Sampled, PhiAtSix) {
  const auto phi = phi_character(6);
  auto oracle = [&](const MatrixPoint& x) { return phi(x); };
  const auto r = ks_sides_sampled(oracle, 6, 1.0, 200000, 42);
  EXPECT_NEAR(r.lhs, 2.0, 1e-12);  // every row flips phi
  const double want_rhs = 1.0 - std::pow(2.0 / 3.0, 6);
  EXPECT_NEAR(r.rhs, want_rhs, 4 * r.rhs_se);
  EXPECT_NEAR(r.constant * r.rhs, 2.0, 4 * r.constant * r.rhs_se);
  EXPECT_NE(r.verdict, SampledVerdict::violated);
}

TEST(Sampled, DeterministicAcrossThreads) {
  auto oracle = [](const MatrixPoint& x) { return std::vector<double>{std::sin(double(x.index)), std::cos(double(x.index % 977))}; };
  const auto a = ks_sides_sampled(oracle, 6, 2.0, 20000, 9, 1);
  const auto b = ks_sides_sampled(oracle, 6, 2.0, 20000, 9, 1);
  const auto c = ks_sides_sampled(oracle, 6, 2.0, 20000, 9, 4);
  EXPECT_EQ(a.lhs, b.lhs);
  EXPECT_EQ(a.rhs, b.rhs);
  EXPECT_EQ(a.lhs, c.lhs);
  EXPECT_EQ(a.rhs, c.rhs);
  auto zero = [](const MatrixPoint&) { return 1.0; };
  const auto z = ks_sides_sampled(zero, 4, 1.0, 1000, 1);
  EXPECT_EQ(z.lhs, 0.0);
  EXPECT_EQ(z.rhs, 0.0);
}
