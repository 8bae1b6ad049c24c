#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "kscube/function_table.hpp"
#include "kscube/matrix_point.hpp"
#include "kscube/parallel.hpp"
#include "kscube/rational.hpp"
#include "kscube/summation.hpp"
#include "kscube/walsh.hpp"

namespace kscube {

// ---------------------------------------------------------------------------
// Constants

struct KsConstant {
  Rational unnormalized;  // 2n / (n^n - (n-2)^n)
  Rational normalized;    // 2 / (1 - (1 - 2/n)^n)
};

/// sup over even n of the normalized constant: 2e^2 / (e^2 - 1).
inline const double kKsSupremum = 2.0 * std::exp(2.0) / (std::exp(2.0) - 1.0);
/// Upper bound for the y-averaged constant: 2e / (e - 1).
inline const double kKsYSupremum = 2.0 * std::exp(1.0) / (std::exp(1.0) - 1.0);

inline KsConstant ks_constant(int n) {
  if (n < 2 || n % 2 != 0) {
    throw DomainError("the KS constant is defined for even n >= 2 (odd n: use the y-averaged variant)");
  }
  const BigInt nb(n);
  const BigInt nn = ipow(nb, n);
  const BigInt denom = nn - ipow(nb - 2, n);
  return {Rational(2 * nb, denom), Rational(2 * nn, denom)};
}

/// 2 / (1 - (1 - 1/n)^n), valid for every n >= 1.
inline Rational y_variant_constant(int n) {
  if (n < 1) throw DomainError("n must be positive");
  const BigInt nb(n);
  const BigInt nn = ipow(nb, n);
  return Rational(2 * nn, nn - ipow(nb - 1, n));
}

// ---------------------------------------------------------------------------
// Reports

enum class KsVariant { standard, y_averaged, permutation, isoperimetric };

inline const char* to_string(KsVariant v) {
  switch (v) {
    case KsVariant::standard: return "standard";
    case KsVariant::y_averaged: return "y-averaged";
    case KsVariant::permutation: return "permutation";
    case KsVariant::isoperimetric: return "isoperimetric";
  }
  return "?";
}

/// Both sides of one inequality instance. For the standard and isoperimetric
/// variants lhs/rhs are raw sums; for the y-averaged variant they are the
/// normalized expectations; for the permutation variant they are the averaged
/// sums (1/n) sum_j sum_x and (1/n!) sum_pi sum_x. `holds` compares
/// lhs <= constant * rhs (exactly when `exact`, else with 1e-9 relative slack).
struct KsReport {
  int n = 0;
  double theta = 1.0;
  double lhs = 0.0;
  double rhs = 0.0;
  Rational constant;
  bool holds = true;
  double slack = 0.0;  // constant * rhs - lhs
  KsVariant variant = KsVariant::standard;
  bool exact = false;
  std::optional<Rational> lhs_exact;
  std::optional<Rational> rhs_exact;
  std::string constant_source;
};

inline constexpr double kKsRelTol = 1e-9;

namespace detail {

inline void finish_float(KsReport& r) {
  const double bound = to_double(r.constant) * r.rhs;
  r.slack = bound - r.lhs;
  r.holds = r.lhs <= bound + kKsRelTol * std::max(std::abs(r.lhs), std::abs(bound));
}

inline void finish_exact(KsReport& r, const Rational& lhs, const Rational& rhs) {
  r.exact = true;
  r.lhs_exact = lhs;
  r.rhs_exact = rhs;
  r.lhs = to_double(lhs);
  r.rhs = to_double(rhs);
  const Rational bound = r.constant * rhs;
  r.slack = to_double(bound - lhs);
  r.holds = lhs <= bound;
}

/// |a - b|^theta as an exact rational when theta is a small natural number.
inline std::optional<Rational> exact_jump(double a, double b, double theta) {
  if (theta != std::floor(theta) || theta < 1 || theta > 8) return std::nullopt;
  Rational diff = rational_from_double(a) - rational_from_double(b);
  if (diff < 0) diff = -diff;
  Rational out = 1;
  for (int i = 0; i < static_cast<int>(theta); ++i) out *= diff;
  return out;
}

}  // namespace detail

/// Raw sums of the standard inequality at any parity:
/// lhs = sum_j sum_x ||f(x+row_j) - f(x)||^theta,
/// rhs = sum_k sum_x ||f(x+selector_k) - f(x)||^theta.
struct StandardSums {
  double lhs = 0.0;
  double rhs = 0.0;
  /// Populated for two-valued scalar tables: counts of differing pairs.
  std::optional<std::uint64_t> lhs_crossings;
  std::optional<std::uint64_t> rhs_crossings;
  double jump = 0.0;  // |a - b| for two-valued tables
};

inline StandardSums standard_sums(const FunctionTable& f, double theta, int threads = 1) {
  if (!(theta > 0.0)) throw DomainError("theta must be positive");
  const auto rows = row_flip_masks(f.n());
  const auto sels = selector_masks(f.n());
  StandardSums s;
  double a = 0, b = 0;
  if (f.two_valued(a, b)) {
    s.lhs_crossings = translation_crossings(f, rows, threads);
    s.rhs_crossings = translation_crossings(f, sels, threads);
    s.jump = std::abs(a - b);
    const double w = s.jump == 0.0 ? 0.0 : std::pow(s.jump, theta);
    s.lhs = static_cast<double>(*s.lhs_crossings) * w;
    s.rhs = static_cast<double>(*s.rhs_crossings) * w;
    return s;
  }
  s.lhs = translation_energy(f, rows, theta, threads);
  s.rhs = translation_energy(f, sels, theta, threads);
  return s;
}

/// Standard variant at even n against the sharp constant 2n/(n^n-(n-2)^n).
inline KsReport ks_sides(const FunctionTable& f, double theta, int threads = 1) {
  if (f.n() % 2 != 0) {
    throw DomainError("ks_sides requires even n: at odd n no non-singleton space satisfies the "
                      "standard inequality; use ks_y_variant_sides");
  }
  KsReport r;
  r.n = f.n();
  r.theta = theta;
  r.variant = KsVariant::standard;
  r.constant = ks_constant(f.n()).unnormalized;
  r.constant_source = "2n/(n^n-(n-2)^n), sharp for every even n";
  const auto s = standard_sums(f, theta, threads);
  if (s.lhs_crossings) {
    // Both sides share the factor |a-b|^theta; the verdict is decided on the
    // integer counts. Exact values are reported when the factor is rational.
    const Rational lc(*s.lhs_crossings), rc(*s.rhs_crossings);
    auto jump = detail::exact_jump(s.jump, 0.0, theta);
    if (jump) {
      detail::finish_exact(r, lc * *jump, rc * *jump);
    } else {
      detail::finish_exact(r, lc, rc);
      r.lhs = s.lhs;
      r.rhs = s.rhs;
      r.slack = to_double(r.constant) * s.rhs - s.lhs;
      r.lhs_exact.reset();
      r.rhs_exact.reset();
    }
    return r;
  }
  r.lhs = s.lhs;
  r.rhs = s.rhs;
  detail::finish_float(r);
  return r;
}

// ---------------------------------------------------------------------------
// y-averaged variant (valid at every n)

/// Distinct translations sum_j y_j e_{j k_j} over (k, y) in [n]^n x F_2^n,
/// with multiplicities: a row with y_j = 0 contributes nothing and absorbs n
/// choices of k_j.
struct WeightedShift {
  std::uint64_t mask;
  std::uint64_t multiplicity;
};

inline std::vector<WeightedShift> y_selector_shifts(int n) {
  std::vector<int> choice(static_cast<std::size_t>(n), 0);  // 0 = row untouched, c = column c-1
  std::vector<WeightedShift> out;
  while (true) {
    std::uint64_t mask = 0, mult = 1;
    for (int j = 0; j < n; ++j) {
      if (choice[j] == 0) {
        mult *= static_cast<std::uint64_t>(n);
      } else {
        mask |= std::uint64_t{1} << (j * n + choice[j] - 1);
      }
    }
    out.push_back({mask, mult});
    int j = 0;
    while (j < n && ++choice[j] == n + 1) choice[j++] = 0;
    if (j == n) break;
  }
  return out;
}

/// lhs = (1/n) sum_j E_x E_y ||f(x + y_j row_j) - f(x)||^theta,
/// rhs = E_k E_x E_y ||f(x + sum_j y_j e_{j k_j}) - f(x)||^theta,
/// constant = 2/(1-(1-1/n)^n).
inline KsReport ks_y_variant_sides(const FunctionTable& f, double theta, int threads = 1) {
  if (!(theta > 0.0)) throw DomainError("theta must be positive");
  const int n = f.n();
  KsReport r;
  r.n = n;
  r.theta = theta;
  r.variant = KsVariant::y_averaged;
  r.constant = y_variant_constant(n);
  r.constant_source = "2/(1-(1-1/n)^n), bounded by 2e/(e-1)";

  const auto rows = row_flip_masks(n);
  const auto shifts = y_selector_shifts(n);
  std::vector<std::uint64_t> masks;
  for (const auto& s : shifts) masks.push_back(s.mask);

  // E_y over y in F_2^n: y_j = 1 for half of the y's (row flip), else identity.
  const BigInt half_y = ipow(BigInt(2), n - 1);
  const BigInt all_y = ipow(BigInt(2), n);
  const BigInt points = ipow(BigInt(2), n * n);
  const BigInt nn = ipow(BigInt(n), n);
  const Rational lhs_norm(1, BigInt(n) * points * all_y);
  const Rational rhs_norm(1, nn * points * all_y);

  double a = 0, b = 0;
  if (f.two_valued(a, b)) {
    BigInt lhs_count = 0, rhs_count = 0;
    for (auto t : rows) lhs_count += half_y * translation_crossings(f, std::span(&t, 1), threads);
    std::vector<std::uint64_t> per(shifts.size());
    parallel_chunks(shifts.size(), threads, [&](std::size_t i) {
      per[i] = translation_crossings(f, std::span(&shifts[i].mask, 1));
    });
    for (std::size_t i = 0; i < shifts.size(); ++i) rhs_count += BigInt(per[i]) * shifts[i].multiplicity;
    auto jump = detail::exact_jump(std::abs(a - b), 0.0, theta);
    const Rational w = jump ? *jump : Rational(1);
    detail::finish_exact(r, Rational(lhs_count) * lhs_norm * w, Rational(rhs_count) * rhs_norm * w);
    if (!jump) {
      const double wf = std::pow(std::abs(a - b), theta);
      r.lhs *= wf;
      r.rhs *= wf;
      r.slack = to_double(r.constant) * r.rhs - r.lhs;
      r.lhs_exact.reset();
      r.rhs_exact.reset();
    }
    return r;
  }

  std::vector<double> lhs_terms;
  for (auto t : rows) {
    lhs_terms.push_back(to_double(half_y) * translation_energy(f, std::span(&t, 1), theta, 1));
  }
  std::vector<double> rhs_terms(shifts.size());
  parallel_chunks(shifts.size(), threads, [&](std::size_t i) {
    rhs_terms[i] = static_cast<double>(shifts[i].multiplicity) *
                   translation_energy(f, std::span(&shifts[i].mask, 1), theta, 1);
  });
  r.lhs = pairwise_sum(lhs_terms) * to_double(lhs_norm);
  r.rhs = pairwise_sum(rhs_terms) * to_double(rhs_norm);
  detail::finish_float(r);
  return r;
}

// ---------------------------------------------------------------------------
// Permutation variant

inline std::uint64_t permutation_mask(int n, std::span<const int> pi) { return selector_mask(n, pi); }

/// lhs = (1/n) sum_j sum_x d, rhs = (1/n!) sum_pi sum_x d with
/// d = ||f(x+t) - f(x)||^theta; the constant reported is the minimal K =
/// lhs/rhs for which the instance holds (zero when lhs = 0).
inline KsReport permutation_variant_sides(const FunctionTable& f, double theta = 1.0,
                                          int threads = 1) {
  const int n = f.n();
  if (n > 8) throw SizeLimitError("exact permutation averaging limited to n <= 8");
  std::vector<int> pi(static_cast<std::size_t>(n));
  std::iota(pi.begin(), pi.end(), 0);
  std::vector<std::uint64_t> perms;
  do {
    perms.push_back(permutation_mask(n, pi));
  } while (std::next_permutation(pi.begin(), pi.end()));
  const auto rows = row_flip_masks(n);
  const BigInt nfact(perms.size());

  KsReport r;
  r.n = n;
  r.theta = theta;
  r.variant = KsVariant::permutation;
  r.constant_source = "minimal K = lhs/rhs for this table";

  double a = 0, b = 0;
  if (f.two_valued(a, b)) {
    const Rational lc(translation_crossings(f, rows, threads));
    const Rational rc(translation_crossings(f, perms, threads));
    auto jump = detail::exact_jump(std::abs(a - b), 0.0, theta);
    const Rational w = jump ? *jump : Rational(1);
    const Rational lhs = lc / n * w;
    const Rational rhs = rc / Rational(nfact) * w;
    r.constant = rhs == 0 ? Rational(0) : lhs / rhs;
    detail::finish_exact(r, lhs, rhs);
    if (!jump) {
      const double wf = std::pow(std::abs(a - b), theta);
      r.lhs *= wf;
      r.rhs *= wf;
      r.slack = 0.0;
      r.lhs_exact.reset();
      r.rhs_exact.reset();
    }
    r.holds = rhs != 0 || lhs == 0;
    return r;
  }
  r.lhs = translation_energy(f, rows, theta, threads) / n;
  r.rhs = translation_energy(f, perms, theta, threads) / to_double(nfact);
  r.constant = r.rhs == 0.0 ? Rational(0) : rational_from_double(r.lhs / r.rhs);
  r.slack = 0.0;
  r.holds = r.rhs != 0.0 || r.lhs == 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Character witnesses x -> (-1)^{<mask, x>}. Their sums reduce to parity
// counts over translations, so they are evaluated in closed form for every
// n <= 8 without tabulating 2^{n^2} points.

struct CharacterWitness {
  int n = 0;
  std::uint64_t mask = 0;

  double operator()(const MatrixPoint& x) const {
    return (std::popcount(mask & x.index) & 1) ? -1.0 : 1.0;
  }
  bool flips_under(std::uint64_t shift) const { return std::popcount(mask & shift) & 1; }

  FunctionTable table(const Caps& caps = Caps::global()) const {
    return tabulate(n, *this, caps);
  }

  /// Number of x with f(x+t) != f(x), summed over the shifts: 2^{n^2} per
  /// flipping shift.
  BigInt crossings(std::span<const std::uint64_t> shifts) const {
    BigInt flips = 0;
    for (auto t : shifts) flips += flips_under(t) ? 1 : 0;
    return flips * ipow(BigInt(2), n * n);
  }

  /// Number of selectors k in [n]^n under which the character flips,
  /// enumerated directly.
  BigInt flipping_selectors_enumerated() const {
    std::vector<int> k(static_cast<std::size_t>(n), 0);
    BigInt count = 0;
    while (true) {
      if (flips_under(selector_mask(n, k))) ++count;
      int j = 0;
      while (j < n && ++k[j] == n) k[j++] = 0;
      if (j == n) break;
    }
    return count;
  }

  /// Same count from the product formula (n^n - prod_j (n - 2|A_j|)) / 2.
  BigInt flipping_selectors_closed_form() const {
    return BigInt(SpectralProfile::of(n, mask).selector_multiplier) / 2;
  }

  BigInt flipping_permutations() const {
    std::vector<int> pi(static_cast<std::size_t>(n));
    std::iota(pi.begin(), pi.end(), 0);
    BigInt count = 0;
    do {
      if (flips_under(permutation_mask(n, pi))) ++count;
    } while (std::next_permutation(pi.begin(), pi.end()));
    return count;
  }

  BigInt flipping_rows() const {
    BigInt c = 0;
    for (int j = 0; j < n; ++j) c += flips_under(row_mask(n, j)) ? 1 : 0;
    return c;
  }
};

/// Totals sum_t sum_x |f(x+t) - f(x)| for a character (each crossing costs 2).
struct CharacterTotals {
  BigInt row_total;          // sum_j sum_x
  BigInt selector_total;     // sum_k sum_x
  BigInt permutation_total;  // sum_pi sum_x (only when requested)
};

inline CharacterTotals character_totals(const CharacterWitness& w, bool with_permutations) {
  const BigInt points = ipow(BigInt(2), w.n * w.n);
  CharacterTotals t;
  t.row_total = 2 * points * w.flipping_rows();
  t.selector_total = 2 * points * w.flipping_selectors_closed_form();
  if (with_permutations) t.permutation_total = 2 * points * w.flipping_permutations();
  return t;
}

/// phi(x) = (-1)^{x_00 + x_11 + ... + x_{n-1,n-1}}.
inline CharacterWitness phi_character(int n) {
  check_side(n);
  std::uint64_t mask = 0;
  for (int j = 0; j < n; ++j) mask |= std::uint64_t{1} << (j * n + j);
  return {n, mask};
}

/// psi(x) = (-1)^{x_00 + sum_{j>=1} sum_{k>=3} x_{jk}} (zero-based indices).
inline CharacterWitness psi_character(int n) {
  check_side(n);
  if (n < 4 || n % 2 != 0) throw DomainError("witness_psi requires even n >= 4");
  std::uint64_t mask = 1;
  for (int j = 1; j < n; ++j)
    for (int k = 3; k < n; ++k) mask |= std::uint64_t{1} << (j * n + k);
  return {n, mask};
}

/// Permutations under which psi flips, classified by v = pi(0). The parity is
/// [v = 0] + #{j >= 1 : pi(j) >= 3}, and the second count is (n - 3) - [v >= 3]
/// whatever pi does on the other rows, so each v contributes (n-1)! or 0.
inline BigInt psi_flipping_permutations_by_first_image(int n) {
  if (n < 4 || n % 2 != 0) throw DomainError("witness_psi requires even n >= 4");
  BigInt fact = 1;
  for (int i = 2; i < n; ++i) fact *= i;
  BigInt count = 0;
  for (int v = 0; v < n; ++v) {
    const int parity = (v == 0 ? 1 : 0) + (n - 3) - (v >= 3 ? 1 : 0);
    if (parity % 2 != 0) count += fact;
  }
  return count;
}

/// sigma(x) = sum over the first n-1 rows of all entries, as a +-1 character.
inline CharacterWitness odd_character(int n) {
  check_side(n);
  if (n < 3 || n % 2 == 0) throw DomainError("witness_odd requires odd n >= 3");
  std::uint64_t mask = 0;
  for (int j = 0; j + 1 < n; ++j) mask |= row_mask(n, j);
  return {n, mask};
}

inline FunctionTable witness_phi(int n, const Caps& caps = Caps::global()) {
  return phi_character(n).table(caps);
}
inline FunctionTable witness_psi(int n, const Caps& caps = Caps::global()) {
  return psi_character(n).table(caps);
}
inline FunctionTable witness_odd(int n, const Caps& caps = Caps::global()) {
  return odd_character(n).table(caps);
}

// ---------------------------------------------------------------------------
// Isoperimetric form

/// A subset S of M_n(F_2) as a membership bitmask over all 2^{n^2} points.
class SubsetWitness {
 public:
  SubsetWitness(int n, const Caps& caps = Caps::global()) : n_(n) {
    check_side(n);
    if (n > caps.max_table_n) throw SizeLimitError("subset witness exceeds the table cap");
    words_.assign((point_count(n) + 63) / 64, 0);
  }

  /// n = 2 subsets packed in a 16-bit mask.
  static SubsetWitness from_mask16(std::uint16_t mask) {
    SubsetWitness s(2);
    s.words_[0] = mask;
    return s;
  }

  template <class Pred>
  static SubsetWitness where(int n, Pred&& pred, const Caps& caps = Caps::global()) {
    SubsetWitness s(n, caps);
    for (std::uint64_t x = 0; x < point_count(n); ++x) {
      if (pred(MatrixPoint{n, x})) s.insert(x);
    }
    return s;
  }

  int n() const { return n_; }
  std::uint64_t size() const { return point_count(n_); }
  bool contains(std::uint64_t x) const { return (words_[x >> 6] >> (x & 63)) & 1U; }
  void insert(std::uint64_t x) { words_[x >> 6] |= std::uint64_t{1} << (x & 63); }

  /// |{x in S : x + t not in S}|
  std::uint64_t boundary(std::uint64_t t) const {
    std::uint64_t c = 0;
    for (std::uint64_t x = 0; x < size(); ++x) c += contains(x) && !contains(x ^ t);
    return c;
  }

 private:
  int n_;
  std::vector<std::uint64_t> words_;
};

inline KsReport isoperimetric_check(const SubsetWitness& s) {
  if (s.n() % 2 != 0) throw DomainError("the isoperimetric form requires even n");
  KsReport r;
  r.n = s.n();
  r.theta = 1.0;
  r.variant = KsVariant::isoperimetric;
  r.constant = ks_constant(s.n()).unnormalized;
  r.constant_source = "2n/(n^n-(n-2)^n)";
  BigInt lhs = 0, rhs = 0;
  for (auto t : row_flip_masks(s.n())) lhs += s.boundary(t);
  for (auto t : selector_masks(s.n())) rhs += s.boundary(t);
  detail::finish_exact(r, Rational(lhs), Rational(rhs));
  return r;
}

/// Exhaustive check over all 2^16 subsets of M_2(F_2).
struct IsoperimetricSweep {
  std::uint64_t subsets = 0;
  std::uint64_t violations = 0;
  std::vector<std::uint16_t> equality_cases;  // lhs == constant * rhs
  std::uint16_t phi_level_set = 0;            // {x : x_00 + x_11 = 0}
  bool phi_level_set_is_equality = false;
};

inline IsoperimetricSweep isoperimetric_exhaustive_n2() {
  constexpr int n = 2;
  const auto rows = row_flip_masks(n);
  const auto sels = selector_masks(n);
  // For each shift t, perm[t][x] = x ^ t; boundary = popcount(S & ~shift(S)).
  auto shifted = [](std::uint32_t s, std::uint64_t t) {
    std::uint32_t out = 0;
    for (std::uint32_t x = 0; x < 16; ++x) {
      if ((s >> (x ^ t)) & 1U) out |= 1U << x;
    }
    return out;
  };
  IsoperimetricSweep sweep;
  const auto phi = phi_character(n);
  for (std::uint32_t x = 0; x < 16; ++x) {
    if (phi(MatrixPoint{n, x}) > 0) sweep.phi_level_set |= static_cast<std::uint16_t>(1U << x);
  }
  // The constant at n = 2 is 1, so equality is lhs == rhs.
  if (ks_constant(n).unnormalized != 1) throw NumericalError("unexpected KS constant at n = 2");
  for (std::uint32_t s = 0; s < (1U << 16); ++s) {
    int lhs = 0, rhs = 0;
    for (auto t : rows) lhs += std::popcount(s & ~shifted(s, t) & 0xFFFFU);
    for (auto t : sels) rhs += std::popcount(s & ~shifted(s, t) & 0xFFFFU);
    ++sweep.subsets;
    if (lhs > rhs) ++sweep.violations;
    if (lhs == rhs) {
      sweep.equality_cases.push_back(static_cast<std::uint16_t>(s));
      if (s == sweep.phi_level_set) sweep.phi_level_set_is_equality = true;
    }
  }
  return sweep;
}

// ---------------------------------------------------------------------------
// Monte-Carlo estimator for sizes beyond enumeration

enum class SampledVerdict { holds, inconclusive, violated };

inline const char* to_string(SampledVerdict v) {
  switch (v) {
    case SampledVerdict::holds: return "holds";
    case SampledVerdict::inconclusive: return "inconclusive";
    case SampledVerdict::violated: return "violated";
  }
  return "?";
}

struct SampledKsReport {
  int n = 0;
  double theta = 1.0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  double lhs = 0.0;     // estimate of (1/n) sum_j E_x d^theta
  double lhs_se = 0.0;
  double rhs = 0.0;     // estimate of E_k E_x d^theta
  double rhs_se = 0.0;
  double constant = 0.0;  // normalized 2/(1-(1-2/n)^n)
  SampledVerdict verdict = SampledVerdict::holds;
};

namespace detail {
template <class V>
double oracle_distance_pow(const V& a, const V& b, double theta) {
  if constexpr (std::is_arithmetic_v<V>) {
    const double d = std::abs(static_cast<double>(a) - static_cast<double>(b));
    return d == 0.0 ? 0.0 : std::pow(d, theta);
  } else {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      s += d * d;
    }
    return s == 0.0 ? 0.0 : std::pow(s, theta / 2.0);
  }
}

struct Moments {
  double sum = 0.0, sum_sq = 0.0;
};
}  // namespace detail

/// Unbiased estimates of both normalized expectations with standard errors.
/// Samples are drawn in fixed chunks of 4096 from per-chunk substreams
/// seeded by (seed, chunk), so results do not depend on the thread count.
/// A verdict of `holds` is only given when no violation is observed; an
/// observed violation smaller than 3 standard errors is `inconclusive`.
template <class Oracle>
SampledKsReport ks_sides_sampled(Oracle&& f, int n, double theta, std::uint64_t samples,
                                 std::uint64_t seed, int threads = 1) {
  check_side(n);
  if (samples < 1) throw DomainError("samples must be >= 1");
  if (n % 2 != 0) throw DomainError("the standard variant requires even n");
  if (!(theta > 0.0)) throw DomainError("theta must be positive");
  constexpr std::uint64_t kChunk = 4096;
  const std::uint64_t chunks = (samples + kChunk - 1) / kChunk;
  std::vector<detail::Moments> lhs_m(chunks), rhs_m(chunks);
  const std::uint64_t bits_mask =
      (n * n == 64) ? ~std::uint64_t{0} : ((std::uint64_t{1} << (n * n)) - 1);

  parallel_chunks(chunks, threads, [&](std::size_t c) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<int> col(0, n - 1);
    const std::uint64_t begin = c * kChunk;
    const std::uint64_t end = std::min(samples, begin + kChunk);
    for (std::uint64_t i = begin; i < end; ++i) {
      const MatrixPoint x{n, rng() & bits_mask};
      const auto fx = f(x);
      const int j = col(rng);
      const double dl = detail::oracle_distance_pow(f(row_flip(x, j)), fx, theta);
      std::uint64_t sel = 0;
      for (int r = 0; r < n; ++r) sel |= std::uint64_t{1} << (r * n + col(rng));
      const double dr = detail::oracle_distance_pow(f(MatrixPoint{n, x.index ^ sel}), fx, theta);
      lhs_m[c].sum += dl;
      lhs_m[c].sum_sq += dl * dl;
      rhs_m[c].sum += dr;
      rhs_m[c].sum_sq += dr * dr;
    }
  });

  auto summarize = [&](const std::vector<detail::Moments>& m, double& mean, double& se) {
    std::vector<double> s, s2;
    for (const auto& v : m) {
      s.push_back(v.sum);
      s2.push_back(v.sum_sq);
    }
    const double count = static_cast<double>(samples);
    mean = pairwise_sum(s) / count;
    const double var = count > 1 ? std::max(0.0, (pairwise_sum(s2) - count * mean * mean) / (count - 1)) : 0.0;
    se = std::sqrt(var / count);
  };

  SampledKsReport r;
  r.n = n;
  r.theta = theta;
  r.samples = samples;
  r.seed = seed;
  summarize(lhs_m, r.lhs, r.lhs_se);
  summarize(rhs_m, r.rhs, r.rhs_se);
  r.constant = to_double(ks_constant(n).normalized);
  const double violation = r.lhs - r.constant * r.rhs;
  const double se = std::hypot(r.lhs_se, r.constant * r.rhs_se);
  if (violation <= 0.0) {
    r.verdict = SampledVerdict::holds;
  } else if (violation < 3.0 * se) {
    r.verdict = SampledVerdict::inconclusive;
  } else {
    r.verdict = SampledVerdict::violated;
  }
  return r;
}

}  // namespace kscube
