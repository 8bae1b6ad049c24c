#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kscube/cut_cone.hpp"
#include "kscube/errors.hpp"
#include "kscube/ks_inequality.hpp"
#include "kscube/matrix_point.hpp"
#include "kscube/metric_space.hpp"
#include "kscube/rational.hpp"

namespace kscube {

// ---------------------------------------------------------------------------
// Poincare-type pairs

/// Mass at a distance. Pairs built from a concrete space record the point
/// indices; translation-invariant pairs only need the distance.
struct PairMass {
  double distance = 0.0;
  double weight = 0.0;
  std::optional<std::pair<std::size_t, std::size_t>> points;
};

/// An inequality sum_mu w |f(a)-f(b)|^theta <= C sum_nu w |f(a)-f(b)|^theta
/// assumed for every map f into the target. Any embedding with distortion D
/// then has D^theta >= sum_mu w d^theta / (C sum_nu w d^theta).
struct PoincarePair {
  std::string space_id;
  std::vector<PairMass> expand;    // mu
  std::vector<PairMass> contract;  // nu
  double constant = 1.0;           // C
  double theta = 1.0;
  std::string constant_source;

  void validate() const {
    if (!(theta > 0.0)) throw DomainError("pair exponent must be positive");
    if (!(constant > 0.0) || !std::isfinite(constant)) throw DomainError("pair constant must be positive and finite");
    double wm = 0.0, wn = 0.0;
    for (const auto& m : expand) {
      if (m.weight < 0.0 || m.distance < 0.0) throw DomainError("negative weight or distance in mu");
      wm += m.weight;
    }
    for (const auto& m : contract) {
      if (m.weight < 0.0 || m.distance < 0.0) throw DomainError("negative weight or distance in nu");
      wn += m.weight;
    }
    if (!(wm > 0.0) || !(wn > 0.0)) throw DomainError("both pair measures need positive total mass");
  }

  double expand_moment() const {
    double s = 0.0;
    for (const auto& m : expand) s += m.weight * std::pow(m.distance, theta);
    return s;
  }
  double contract_moment() const {
    double s = 0.0;
    for (const auto& m : contract) s += m.weight * std::pow(m.distance, theta);
    return s;
  }
};

/// (sum_mu w d^theta / (C sum_nu w d^theta))^{1/theta}.
inline double poincare_lower_bound(const PoincarePair& pair) {
  pair.validate();
  const double num = pair.expand_moment();
  const double den = pair.contract_moment();
  if (!(den > 0.0)) throw DomainError("contracting pairs have zero moment");
  return std::pow(num / (pair.constant * den), 1.0 / pair.theta);
}

/// KS pair on l_q^n(F_2^n, ||.||_p): mu uniform over (x, x + row_j), nu uniform
/// over (x, x + selector_k). By translation invariance every mu-distance is
/// n^{1/p} and every nu-distance is n^{1/q}, so each measure is one mass.
inline PoincarePair ks_pair(int n, const PqParams& params, double theta = 1.0) {
  params.validate();
  if (n < 2 || n % 2 != 0) throw DomainError("ks_pair needs even n >= 2");
  if (!(theta > 0.0 && theta <= 2.0)) throw DomainError("ks_pair exponent must lie in (0, 2]");
  std::vector<int> row(static_cast<std::size_t>(n), 0), sel(static_cast<std::size_t>(n), 1);
  row[0] = n;
  PoincarePair pair;
  pair.space_id = "l_" + std::to_string(params.q) + "^" + std::to_string(n) + "(F_2^" + std::to_string(n) + ", p=" +
                  std::to_string(params.p) + ")";
  pair.expand.push_back({pq_norm_of_profile(row, params), 1.0, std::nullopt});
  pair.contract.push_back({pq_norm_of_profile(sel, params), 1.0, std::nullopt});
  pair.constant = to_double(ks_constant(n).normalized);
  pair.theta = theta;
  pair.constant_source = "normalized KS constant 2/(1-(1-2/n)^n)";
  return pair;
}

/// Same pair spelled out over every point of a materialized space (n <= 2 at
/// default caps). Used to cross-check the translation-invariant form.
inline PoincarePair ks_pair_enumerated(int n, const PqParams& params, double theta = 1.0,
                                       const Caps& caps = Caps::global()) {
  PoincarePair compact = ks_pair(n, params, theta);
  if (n > caps.max_table_n) throw SizeLimitError("enumerated KS pair exceeds the table cap");
  const std::uint64_t count = point_count(n);
  const auto rows = row_flip_masks(n);
  const auto sels = selector_masks(n);
  PoincarePair pair;
  pair.space_id = compact.space_id;
  pair.constant = compact.constant;
  pair.theta = theta;
  pair.constant_source = compact.constant_source;
  const double wm = 1.0 / (static_cast<double>(count) * static_cast<double>(rows.size()));
  const double wn = 1.0 / (static_cast<double>(count) * static_cast<double>(sels.size()));
  for (std::uint64_t x = 0; x < count; ++x) {
    const MatrixPoint px{n, x};
    for (auto s : rows) pair.expand.push_back({pq_distance(px, {n, x ^ s}, params), wm, std::make_pair(x, x ^ s)});
    for (auto s : sels) pair.contract.push_back({pq_distance(px, {n, x ^ s}, params), wn, std::make_pair(x, x ^ s)});
  }
  return pair;
}

/// Re-imports the dual solution of the distortion LP as a pair with theta = 1
/// and C = the re-checked cut constant. The bound it yields is the
/// certificate's lower value.
inline PoincarePair pair_from_certificate(const FiniteMetricSpace& space, const DistortionCertificate& cert) {
  if (cert.points != space.size()) throw DimensionMismatch("certificate belongs to a different space");
  PairIndex pairs(space.size());
  PoincarePair pair;
  pair.space_id = cert.space_id;
  pair.theta = 1.0;
  for (std::size_t e = 0; e < pairs.size() && e < cert.dual_expand.size(); ++e) {
    const auto [a, b] = pairs.pairs[e];
    if (cert.dual_expand[e] > 0.0) pair.expand.push_back({space.dist(a, b), cert.dual_expand[e], std::make_pair(a, b)});
    if (cert.dual_contract[e] > 0.0)
      pair.contract.push_back({space.dist(a, b), cert.dual_contract[e], std::make_pair(a, b)});
  }
  pair.constant = cut_cone_constant(space.size(), cert.dual_expand, cert.dual_contract);
  pair.constant_source = "max over cuts of the dual weight ratio";
  return pair;
}

/// Smallest constant for which a pair on a finite space holds for every
/// L1-valued map with theta = 1 (cut-cone decomposition: checking cuts suffices).
inline double l1_pair_constant(const PoincarePair& pair, std::size_t points) {
  if (pair.theta != 1.0) throw DomainError("cut-cone re-check applies to theta = 1");
  PairIndex pairs(points);
  std::vector<double> alpha(pairs.size(), 0.0), beta(pairs.size(), 0.0);
  for (const auto& m : pair.expand) {
    if (!m.points) throw DomainError("pair mass carries no point indices");
    alpha[pairs(m.points->first, m.points->second)] += m.weight;
  }
  for (const auto& m : pair.contract) {
    if (!m.points) throw DomainError("pair mass carries no point indices");
    beta[pairs(m.points->first, m.points->second)] += m.weight;
  }
  return cut_cone_constant(points, alpha, beta);
}

// ---------------------------------------------------------------------------
// Explicit lower and upper bounds on l_q^n(F_2^n, ||.||_p)

/// (1 - (1-2/n)^n)/2 * n^{1/p - 1/q} for even n; odd n >= 3 uses the even
/// subspace of side n - 1; n = 1 gives the trivial 1.
inline double asymptotic_lower_bound(int n, const PqParams& params) {
  params.validate();
  if (!(params.p >= 1.0) || !(params.p < params.q)) throw DomainError("requires 1 <= p < q");
  if (n < 1) throw DomainError("n must be positive");
  if (n == 1) return 1.0;
  const int m = n % 2 == 0 ? n : n - 1;
  const double md = m;
  return (1.0 - std::pow(1.0 - 2.0 / md, md)) / 2.0 * std::pow(md, params.gap());
}

struct SandwichValidation {
  bool checked = false;
  bool holds = true;
  std::uint64_t differences = 0;
  double min_lower_ratio = 0.0;  // min d / (factor * ||x-y||_1^{1/p}); must be >= 1
  double max_upper_ratio = 0.0;  // max d / ||x-y||_1^{1/p}; must be <= 1
};

struct HolderSandwich {
  int rows = 0;  // m
  int cols = 0;  // n
  double lower_factor = 1.0;  // m^{-(1/p-1/q)}
  double upper_factor = 1.0;
  double c1_upper_bound = 1.0;  // min{m,n}^{1/p-1/q}
  SandwichValidation validation;
};

/// m x n matrices, rows in l_p, combined in l_q. Pointwise
/// m^{-(1/p-1/q)} ||z||_1^{1/p} <= ||z|| <= ||z||_1^{1/p}; validated over every
/// difference pattern when m*n <= validate_bits.
inline HolderSandwich holder_sandwich(int n, int m, const PqParams& params, int validate_bits = 16) {
  params.validate();
  if (!(params.p >= 1.0) || !(params.p < params.q)) throw DomainError("requires 1 <= p < q");
  if (n < 1 || m < 1) throw DomainError("rectangle sides must be positive");
  HolderSandwich out;
  out.rows = m;
  out.cols = n;
  out.lower_factor = std::pow(static_cast<double>(m), -params.gap());
  out.upper_factor = 1.0;
  out.c1_upper_bound = std::pow(static_cast<double>(std::min(m, n)), params.gap());
  if (m * n <= validate_bits && m * n <= 24) {
    auto& v = out.validation;
    v.checked = true;
    v.min_lower_ratio = std::numeric_limits<double>::infinity();
    const std::uint64_t count = std::uint64_t{1} << (m * n);
    for (std::uint64_t z = 1; z < count; ++z) {
      const auto prof = row_profile(m, n, z);
      const double d = pq_norm_of_profile(prof, params);
      const double l1 = std::pow(static_cast<double>(std::popcount(z)), 1.0 / params.p);
      v.min_lower_ratio = std::min(v.min_lower_ratio, d / (out.lower_factor * l1));
      v.max_upper_ratio = std::max(v.max_upper_ratio, d / l1);
      ++v.differences;
    }
    v.holds = v.min_lower_ratio >= 1.0 - 1e-12 && v.max_upper_ratio <= 1.0 + 1e-12;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Uniform and coarse obstructions

/// Certified implication alpha(lower_arg) <= C beta(upper_arg) for the moduli
/// of any map from l_q^n(F_2^n, ||.||_p) into L1 with
/// alpha(d(x,y)) <= |f(x)-f(y)| <= beta(d(x,y)), obtained by applying the KS
/// inequality to f at scale s.
struct ModulusObstruction {
  int n = 0;
  double scale = 1.0;
  double lower_arg = 0.0;  // s n^{1/p}
  double upper_arg = 0.0;  // s n^{1/q}
  Rational constant_exact;
  double constant = 0.0;
  std::string preset;

  /// Whether a pair of candidate moduli is consistent with the implication.
  bool admits(const std::function<double(double)>& alpha, const std::function<double(double)>& beta) const {
    return alpha(lower_arg) <= constant * beta(upper_arg) * (1.0 + 1e-12);
  }
};

inline ModulusObstruction coarse_obstruction(int n, double scale, const PqParams& params = {1.0, 2.0}) {
  params.validate();
  if (n < 2 || n % 2 != 0) throw DomainError("obstruction needs even n >= 2");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw DomainError("scale must be positive");
  ModulusObstruction o;
  o.n = n;
  o.scale = scale;
  const double nd = n;
  o.lower_arg = scale * (params.p_inf() ? 1.0 : std::pow(nd, 1.0 / params.p));
  o.upper_arg = scale * (params.q_inf() ? 1.0 : std::pow(nd, 1.0 / params.q));
  o.constant_exact = ks_constant(n).normalized;
  o.constant = to_double(o.constant_exact);
  o.preset = "custom";
  return o;
}

/// s = n^{-1/q}: alpha(n^{1/p-1/q}) <= C beta(1). For (p,q) = (1,2) this is
/// alpha(sqrt n) <= C beta(1).
inline ModulusObstruction coarse_preset(int n, const PqParams& params = {1.0, 2.0}) {
  auto o = coarse_obstruction(n, std::pow(static_cast<double>(n), params.q_inf() ? 0.0 : -1.0 / params.q), params);
  o.preset = "coarse";
  return o;
}

/// s = n^{-1/p}: alpha(1) <= C beta(n^{-(1/p-1/q)}). For (p,q) = (1,2) this is
/// beta(1/sqrt n) >= alpha(1)/C.
inline ModulusObstruction uniform_preset(int n, const PqParams& params = {1.0, 2.0}) {
  auto o = coarse_obstruction(n, std::pow(static_cast<double>(n), params.p_inf() ? 0.0 : -1.0 / params.p), params);
  o.preset = "uniform";
  return o;
}

// ---------------------------------------------------------------------------
// Linear counterexample for exponents above 2

struct PAboveTwoReport {
  int n = 0;
  double p = 0.0;
  double theta = 1.0;
  double lhs = 0.0;    // E_j E_x ||f(x+row_j)-f(x)||^theta
  double rhs = 0.0;    // E_k E_x ||f(x+selector_k)-f(x)||^theta
  double ratio = 0.0;  // lhs / rhs
  double predicted_ratio = 0.0;  // n^{theta(1/2-1/p)}
  /// For even integer p every difference has an integral p-th power norm;
  /// these hold the common values when all sampled terms agree.
  std::optional<Rational> row_norm_pow;
  std::optional<Rational> selector_norm_pow;
  std::optional<Rational> ratio_pow;  // (row_norm / selector_norm)^p, predicted n^{p/2-1}
  std::uint64_t row_terms = 0;
  std::uint64_t selector_terms = 0;
};

/// f(x) = sum_{j,k} x_jk E_jk into l_p^n(l_2^n). f is additive on M_n(F_2)
/// up to signs: f(x+s) - f(x) has entries +-1 exactly on the support of s, so
/// every difference norm depends only on s. Terms are evaluated over sampled
/// base points x and, when n^n is large, sampled selectors.
inline PAboveTwoReport p_gt_2_counterexample(int n, double p, double theta = 1.0, std::uint64_t seed = 1,
                                             std::size_t base_points = 64, std::size_t max_selectors = 4096) {
  if (!(p > 2.0) || !std::isfinite(p)) throw DomainError("counterexample needs finite p > 2");
  if (n < 2 || n % 2 != 0) throw DomainError("counterexample needs even n >= 2");
  if (!(theta > 0.0)) throw DomainError("theta must be positive");
  PAboveTwoReport r;
  r.n = n;
  r.p = p;
  r.theta = theta;
  std::mt19937_64 rng(seed);

  // Row patterns are handled as per-row Hamming counts so any even n works.
  auto diff_norm = [&](const std::vector<int>& ones) {
    double s = 0.0;
    for (int c : ones)
      if (c) s += std::pow(static_cast<double>(c), p / 2.0);
    return std::pow(s, 1.0 / p);
  };
  auto diff_norm_pow = [&](const std::vector<int>& ones) -> std::optional<BigInt> {
    if (p != std::floor(p) || static_cast<long long>(p) % 2 != 0) return std::nullopt;
    BigInt s = 0;
    for (int c : ones) s += ipow(BigInt(c), static_cast<unsigned>(p / 2));
    return s;
  };
  // A base point x only affects signs of f(x+s)-f(x); the entries themselves
  // are (1 - 2 x_jk) on supp(s). Signs are materialized and discarded by the
  // Euclidean row norm, which is what the direct computation checks.
  auto diff_row_counts = [&](const std::vector<std::vector<int>>& x, const std::vector<std::vector<int>>& support) {
    std::vector<int> ones(static_cast<std::size_t>(n), 0);
    for (int j = 0; j < n; ++j) {
      double sq = 0.0;
      for (int k = 0; k < n; ++k) {
        if (!support[j][k]) continue;
        const double entry = 1.0 - 2.0 * x[j][k];  // f(x+e)-f(x) on that coordinate
        sq += entry * entry;
      }
      ones[j] = static_cast<int>(std::lround(sq));
    }
    return ones;
  };

  std::vector<std::vector<std::vector<int>>> bases;
  for (std::size_t b = 0; b < base_points; ++b) {
    std::vector<std::vector<int>> x(n, std::vector<int>(n, 0));
    if (b > 0)
      for (auto& row : x)
        for (auto& v : row) v = static_cast<int>(rng() & 1U);
    bases.push_back(std::move(x));
  }

  std::optional<BigInt> row_pow, sel_pow;
  bool row_same = true, sel_same = true;
  CascadeSum lhs_sum, rhs_sum;
  for (const auto& x : bases) {
    for (int j = 0; j < n; ++j) {
      std::vector<std::vector<int>> s(n, std::vector<int>(n, 0));
      for (int k = 0; k < n; ++k) s[j][k] = 1;
      const auto ones = diff_row_counts(x, s);
      lhs_sum.add(std::pow(diff_norm(ones), theta));
      ++r.row_terms;
      auto pw = diff_norm_pow(ones);
      if (!pw) row_same = false;
      else if (!row_pow) row_pow = pw;
      else if (*row_pow != *pw) row_same = false;
    }
    // Selectors: all n^n when small, otherwise a seeded sample.
    double total = std::pow(static_cast<double>(n), n);
    const bool exhaustive = total <= static_cast<double>(max_selectors);
    const std::size_t count = exhaustive ? static_cast<std::size_t>(total) : max_selectors;
    for (std::size_t t = 0; t < count; ++t) {
      std::vector<std::vector<int>> s(n, std::vector<int>(n, 0));
      std::size_t code = t;
      for (int j = 0; j < n; ++j) {
        int k;
        if (exhaustive) {
          k = static_cast<int>(code % static_cast<std::size_t>(n));
          code /= static_cast<std::size_t>(n);
        } else {
          k = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
        }
        s[j][k] = 1;
      }
      const auto ones = diff_row_counts(x, s);
      rhs_sum.add(std::pow(diff_norm(ones), theta));
      ++r.selector_terms;
      auto pw = diff_norm_pow(ones);
      if (!pw) sel_same = false;
      else if (!sel_pow) sel_pow = pw;
      else if (*sel_pow != *pw) sel_same = false;
    }
  }
  r.lhs = lhs_sum.total() / static_cast<double>(r.row_terms);
  r.rhs = rhs_sum.total() / static_cast<double>(r.selector_terms);
  r.ratio = r.lhs / r.rhs;
  r.predicted_ratio = std::pow(static_cast<double>(n), theta * (0.5 - 1.0 / p));
  if (row_same && row_pow) r.row_norm_pow = Rational(*row_pow);
  if (sel_same && sel_pow) r.selector_norm_pow = Rational(*sel_pow);
  if (r.row_norm_pow && r.selector_norm_pow) r.ratio_pow = *r.row_norm_pow / *r.selector_norm_pow;
  return r;
}

}  // namespace kscube
