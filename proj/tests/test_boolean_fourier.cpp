#include <gtest/gtest.h>

#include <cmath>

#include "kscube/ks_inequality.hpp"
#include "kscube/walsh.hpp"

using namespace kscube;

namespace {

double rel(double a, double b) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

// O(4^{n^2}) transform straight from the definition.
std::vector<double> naive_wht(const FunctionTable& f) {
  const std::uint64_t N = f.points();
  std::vector<double> out(N * f.d(), 0.0);
  for (std::uint64_t m = 0; m < N; ++m)
    for (std::uint64_t x = 0; x < N; ++x) {
      const double sign = (std::popcount(m & x) & 1) ? -1.0 : 1.0;
      for (int c = 0; c < f.d(); ++c) out[m * f.d() + c] += sign * f.at(x)[c] / static_cast<double>(N);
    }
  return out;
}

// sum_k sum_{y in F_2^n} sum_x ||f(x + sum_j y_j e_{j,k_j}) - f(x)||^2, enumerated literally.
double y_selector_energy_brute(const FunctionTable& f) {
  const int n = f.n();
  double total = 0.0;
  for (auto sel : selector_masks(n)) {
    for (std::uint32_t y = 0; y < (1u << n); ++y) {
      std::uint64_t t = 0;
      for (int j = 0; j < n; ++j)
        if ((y >> j) & 1u) t |= sel & row_mask(n, j);
      for (std::uint64_t x = 0; x < f.points(); ++x)
        for (int c = 0; c < f.d(); ++c) {
          const double diff = f.at(x ^ t)[c] - f.at(x)[c];
          total += diff * diff;
        }
    }
  }
  return total;
}

}  // namespace

TEST(Wht, ConstantAndSingleCharacter) {
  const auto c = tabulate(2, [](const MatrixPoint&) { return 2.5; });
  const auto s = wht_forward(c);
  EXPECT_DOUBLE_EQ(s.at(0)[0], 2.5);
  for (std::uint64_t m = 1; m < 16; ++m) EXPECT_EQ(s.at(m)[0], 0.0);

  const auto chi = tabulate(2, [](const MatrixPoint& x) { return x.entry(0, 0) ? -1.0 : 1.0; });
  const auto t = wht_forward(chi);
  for (std::uint64_t m = 0; m < 16; ++m) EXPECT_EQ(t.at(m)[0], m == 1 ? 1.0 : 0.0);
}

TEST(Wht, InverseOfTrivialSpectra) {
  WalshSpectrum zero{2, 1, std::vector<double>(16, 0.0)};
  const auto z = wht_inverse(zero);
  for (double v : z.values()) EXPECT_EQ(v, 0.0);
  WalshSpectrum one = zero;
  one.coeffs[0] = 1.0;
  const auto o = wht_inverse(one);
  for (double v : o.values()) EXPECT_EQ(v, 1.0);
}

TEST(Wht, MatchesDefinitionAndRoundTrips) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto f = random_table(2, 1 + static_cast<int>(seed % 3), seed);
    const auto s = wht_forward(f);
    const auto naive = naive_wht(f);
    for (std::size_t i = 0; i < naive.size(); ++i) EXPECT_NEAR(s.coeffs[i], naive[i], 1e-14);
    const auto g = wht_inverse(s);
    for (std::size_t i = 0; i < f.values().size(); ++i) EXPECT_NEAR(g.values()[i], f.values()[i], 1e-12);
  }
}

TEST(Energy, PhiValuesAtBothExponents) {
  // Every crossing of a +-1 function costs |2|^theta: the theta = 1 sums are
  // n 2^{n^2+1} and 2^{n^2}(n^n-(n-2)^n), i.e. 64 and 64 at n = 2; the squared
  // energies are twice that.
  const auto phi = witness_phi(2);
  const auto sums = standard_sums(phi, 1.0);
  EXPECT_EQ(sums.lhs, 64.0);
  EXPECT_EQ(sums.rhs, 64.0);
  EXPECT_EQ(row_flip_energy(phi), 128.0);
  EXPECT_EQ(selector_energy(phi), 128.0);
  const auto s = wht_forward(phi);
  EXPECT_EQ(row_flip_energy_spectral(s), 128.0);
  EXPECT_EQ(selector_energy_spectral(s), 128.0);
}

TEST(Energy, ConstantIsZero) {
  const auto c = tabulate(3, [](const MatrixPoint&) { return -4.0; });
  EXPECT_EQ(row_flip_energy(c), 0.0);
  EXPECT_EQ(selector_energy(c), 0.0);
}

TEST(Energy, SpectralIdentities) {
  for (int n : {2, 3}) {
    const int count = n == 2 ? 100 : 20;
    for (int i = 0; i < count; ++i) {
      const auto f = random_table(n, 1 + i % 2, 1000 + 17 * i + n);
      const auto s = wht_forward(f);
      EXPECT_LE(rel(row_flip_energy(f), row_flip_energy_spectral(s)), 1e-9);
      EXPECT_LE(rel(selector_energy(f), selector_energy_spectral(s)), 1e-9);
      EXPECT_LE(parseval_relative_error(f, s), 1e-10);
    }
  }
}

TEST(Energy, YSelectorMultiplierIsPlainProduct) {
  // Brute force settles the form of the y-averaged multiplier:
  // 2^n (n^n - prod_j (n - |A_j|)), not prod_j (n - |A_j|)^n.
  for (int n : {2, 3}) {
    for (int i = 0; i < 5; ++i) {
      const auto f = random_table(n, 1, 77 + i);
      const double brute = y_selector_energy_brute(f);
      EXPECT_LE(rel(brute, y_selector_energy_spectral(wht_forward(f))), 1e-9) << "n=" << n;
    }
  }
  // The alternative reading disagrees on the single character x_00 at n = 3.
  const int n = 3;
  const auto chi = tabulate(n, [](const MatrixPoint& x) { return x.entry(0, 0) ? -1.0 : 1.0; });
  const double brute = y_selector_energy_brute(chi);
  const double nn = 27.0;
  const double alt = std::ldexp(8.0 * (nn - std::pow(2.0, n) * std::pow(3.0, n) * std::pow(3.0, n)), n * n + 1);
  EXPECT_NE(brute, alt);
  EXPECT_EQ(brute, std::ldexp(8.0 * (nn - 2.0 * 3.0 * 3.0), n * n + 1));
}

TEST(Energy, BilinearityParallelogram) {
  const auto f = random_table(2, 2, 5), g = random_table(2, 2, 6);
  FunctionTable sum(2, 2), diff(2, 2);
  for (std::size_t i = 0; i < f.values().size(); ++i) {
    sum.values()[i] = f.values()[i] + g.values()[i];
    diff.values()[i] = f.values()[i] - g.values()[i];
  }
  for (auto energy : {&row_flip_energy, &selector_energy}) {
    const double lhs = energy(sum, 1) + energy(diff, 1);
    const double rhs = 2 * energy(f, 1) + 2 * energy(g, 1);
    EXPECT_LE(rel(lhs, rhs), 1e-12);
  }
}

TEST(Counting, Examples) {
  const auto a = SpectralProfile::of(2, 0b0001);  // A_1 = {1}, A_2 empty
  EXPECT_EQ(a.selector_multiplier, 4);
  EXPECT_EQ(counting_slack(a), Rational(2));
  EXPECT_EQ(counting_slack(SpectralProfile::of(2, 0)), Rational(0));
  const auto diag = SpectralProfile::of(2, 0b1001);
  EXPECT_EQ(diag.selector_multiplier, 4);
  EXPECT_EQ(diag.odd_count, 2);
  EXPECT_EQ(counting_slack(diag), Rational(0));
}

TEST(Counting, AllMasksAtTwoAndFour) {
  for (int n : {2, 4}) {
    const auto r = even_n_counting_bound(n);
    EXPECT_TRUE(r.holds);
    EXPECT_EQ(r.checked, std::uint64_t{1} << (n * n));
    EXPECT_EQ(r.min_slack, Rational(0));
  }
  EXPECT_THROW(even_n_counting_bound(3), DomainError);
}

TEST(Counting, ProfileModeAgreesAndReachesEight) {
  for (int n : {2, 4}) {
    const auto masks = even_n_counting_bound(n);
    const auto prof = even_n_counting_bound_profiles(n);
    EXPECT_EQ(prof.holds, masks.holds);
    EXPECT_EQ(prof.min_slack, masks.min_slack);
  }
  for (int n : {6, 8}) {
    const auto r = even_n_counting_bound_profiles(n);
    EXPECT_TRUE(r.holds) << n;
    EXPECT_EQ(r.min_slack, Rational(0)) << n;
  }
}
