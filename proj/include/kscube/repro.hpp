#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "kscube/bounds.hpp"
#include "kscube/config.hpp"
#include "kscube/cut_cone.hpp"
#include "kscube/embeddings.hpp"
#include "kscube/function_table.hpp"
#include "kscube/json_io.hpp"
#include "kscube/ks_inequality.hpp"
#include "kscube/metric_space.hpp"
#include "kscube/walsh.hpp"

namespace kscube {

enum class ReportFormat { json, csv, markdown };

inline ReportFormat parse_format(const std::string& s) {
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  if (s == "markdown" || s == "md") return ReportFormat::markdown;
  throw DomainError("unknown format '" + s + "' (json, csv, markdown)");
}

struct RunConfig {
  std::uint64_t seed = 20240611;
  int threads = 1;
  Caps caps = Caps::global();
  double rel_tol = 1e-9;
  std::string out_dir;
  ReportFormat format = ReportFormat::json;
  /// Per-criterion scale on the random suite sizes; 1 reproduces the full suite.
  double suite_scale = 1.0;

  io::json to_json() const {
    return io::json{{"seed", seed},
                    {"threads", threads},
                    {"caps",
                     {{"max_table_n", caps.max_table_n},
                      {"max_stream_n", caps.max_stream_n},
                      {"max_lp_points", caps.max_lp_points},
                      {"max_exact_lp_points", caps.max_exact_lp_points}}},
                    {"rel_tol", rel_tol},
                    {"suite_scale", suite_scale}};
  }
  std::string hash() const { return io::hex64(io::fnv1a(to_json().dump())); }
};

struct ReproRow {
  ReproRow() = default;
  ReproRow(std::string id_, std::string claim_) : id(std::move(id_)), claim(std::move(claim_)) {}

  std::string id;
  std::string claim;
  io::json values = io::json::object();
  bool pass = false;
  double runtime_s = 0.0;
  double budget_s = 0.0;
  std::string detail;
};

struct ReproReport {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<ReproRow> rows;

  bool all_pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const ReproRow& r) { return r.pass; });
  }
};

namespace repro_detail {

using Clock = std::chrono::steady_clock;

struct Check {
  bool ok = true;
  std::vector<std::string> failures;
  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      failures.push_back(what);
    }
  }
};

inline std::size_t scaled(std::size_t n, double s) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(n) * s)));
}

inline BigInt pow2(int e) { return ipow(BigInt(2), static_cast<unsigned>(e)); }

inline bool close_rel(double a, double b, double tol) {
  const double s = std::max(std::abs(a), std::abs(b));
  return s == 0.0 || std::abs(a - b) <= tol * s;
}

// 1. Exhaustive isoperimetric verification on M_2(F_2).
inline ReproRow isoperimetric(const RunConfig&) {
  ReproRow row{"1", "isoperimetric form holds for all 2^16 subsets of M_2(F_2) with factor 1; "
                    "the phi level set is an equality case"};
  row.budget_s = 30;
  Check c;
  const auto sweep = isoperimetric_exhaustive_n2();
  c.expect(sweep.subsets == 65536, "subset count");
  c.expect(sweep.violations == 0, "violations found");
  c.expect(ks_constant(2).unnormalized == 1, "factor 2n/(n^n-(n-2)^n) at n=2 is not 1");
  c.expect(sweep.phi_level_set_is_equality, "phi level set is not an equality case");
  // Cross-check the phi level set through the generic subset path.
  const auto s = SubsetWitness::from_mask16(sweep.phi_level_set);
  const auto rep = isoperimetric_check(s);
  c.expect(rep.exact && rep.lhs_exact == rep.rhs_exact, "phi level set: generic path disagrees");
  c.expect(rep.lhs_exact && *rep.lhs_exact == 16, "phi level set lhs != n 2^{n^2-1} = 16");
  row.values = {{"subsets", sweep.subsets},
                {"violations", sweep.violations},
                {"equality_cases", sweep.equality_cases.size()},
                {"phi_level_set", sweep.phi_level_set},
                {"phi_lhs", rep.lhs},
                {"phi_rhs", rep.rhs}};
  row.pass = c.ok;
  return row;
}

// 2. Sharpness of phi at n = 2, 4 with exact integers.
inline ReproRow sharpness(const RunConfig& cfg) {
  ReproRow row{"2", "phi attains equality: lhs = n 2^{n^2+1}, rhs = 2^{n^2}(n^n-(n-2)^n), "
                    "ratio = 2n/(n^n-(n-2)^n), n in {2,4}"};
  row.budget_s = 60;
  Check c;
  io::json vals = io::json::object();
  for (int n : {2, 4}) {
    const BigInt nb(n);
    const BigInt want_lhs = nb * pow2(n * n + 1);
    const BigInt want_rhs = pow2(n * n) * (ipow(nb, n) - ipow(nb - 2, n));
    // Full table path: every x and every one of the n^n selectors.
    const auto table = witness_phi(n, cfg.caps);
    const auto rep = ks_sides(table, 1.0, cfg.threads);
    c.expect(rep.exact, "n=" + std::to_string(n) + ": not evaluated exactly");
    c.expect(rep.lhs_exact && *rep.lhs_exact == Rational(want_lhs), "n=" + std::to_string(n) + ": lhs");
    c.expect(rep.rhs_exact && *rep.rhs_exact == Rational(want_rhs), "n=" + std::to_string(n) + ": rhs");
    const Rational ratio = *rep.lhs_exact / *rep.rhs_exact;
    c.expect(ratio == ks_constant(n).unnormalized, "n=" + std::to_string(n) + ": ratio");
    c.expect(rep.holds && rep.slack == 0.0, "n=" + std::to_string(n) + ": not an equality");
    // Character closed form.
    const auto tot = character_totals(phi_character(n), false);
    c.expect(tot.row_total == want_lhs && tot.selector_total == want_rhs,
             "n=" + std::to_string(n) + ": closed form disagrees");
    vals[std::to_string(n)] = {{"lhs", to_string(*rep.lhs_exact)},
                               {"rhs", to_string(*rep.rhs_exact)},
                               {"ratio", to_string(ratio)}};
  }
  row.values = vals;
  row.pass = c.ok;
  return row;
}

// 3. Random tables never violate the standard inequality.
inline ReproRow random_suite(const RunConfig& cfg) {
  ReproRow row{"3", "random tables: 1000 at n=2 and 100 at n=4, theta in {1,2}, zero violations beyond 1e-9"};
  row.budget_s = 600;
  Check c;
  std::uint64_t checked = 0, violations = 0;
  double worst = -std::numeric_limits<double>::infinity();  // max (lhs - C rhs)/scale
  for (auto [n, count] : {std::pair{2, std::size_t{1000}}, std::pair{4, std::size_t{100}}}) {
    const std::size_t m = scaled(count, cfg.suite_scale);
    for (std::size_t i = 0; i < m; ++i) {
      const int d = (n == 2 && i % 2 == 1) ? 3 : 1;
      const auto f = random_table(n, d, cfg.seed + 7919 * static_cast<std::uint64_t>(n) + i, cfg.caps);
      for (double theta : {1.0, 2.0}) {
        const auto rep = ks_sides(f, theta, cfg.threads);
        ++checked;
        const double bound = to_double(rep.constant) * rep.rhs;
        worst = std::max(worst, (rep.lhs - bound) / std::max(rep.lhs, bound));
        if (!rep.holds) ++violations;
      }
    }
  }
  c.expect(violations == 0, std::to_string(violations) + " violations");
  row.values = {{"checked", checked}, {"violations", violations}, {"max_relative_excess", worst}};
  row.pass = c.ok;
  return row;
}

// 4. Direct energies equal their Fourier expressions.
inline ReproRow spectral(const RunConfig& cfg) {
  ReproRow row{"4", "row-flip and selector energies equal their Walsh expressions (1e-9) on 100 tables "
                    "at n=2 and 20 at n=3; Parseval within 1e-10"};
  row.budget_s = 120;
  Check c;
  double worst_row = 0, worst_sel = 0, worst_parseval = 0;
  std::uint64_t tables = 0;
  for (auto [n, count] : {std::pair{2, std::size_t{100}}, std::pair{3, std::size_t{20}}}) {
    const std::size_t m = scaled(count, cfg.suite_scale);
    for (std::size_t i = 0; i < m; ++i) {
      const auto f = random_table(n, 1 + static_cast<int>(i % 2), cfg.seed + 104729 + 31 * i + n, cfg.caps);
      const auto s = wht_forward(f);
      const double r1 = row_flip_energy(f, cfg.threads), r2 = row_flip_energy_spectral(s);
      const double s1 = selector_energy(f, cfg.threads), s2 = selector_energy_spectral(s);
      worst_row = std::max(worst_row, std::abs(r1 - r2) / std::max(std::abs(r1), std::abs(r2)));
      worst_sel = std::max(worst_sel, std::abs(s1 - s2) / std::max(std::abs(s1), std::abs(s2)));
      worst_parseval = std::max(worst_parseval, parseval_relative_error(f, s));
      ++tables;
    }
  }
  c.expect(worst_row <= 1e-9, "row-flip identity");
  c.expect(worst_sel <= 1e-9, "selector identity");
  c.expect(worst_parseval <= 1e-10, "Parseval");
  row.values = {{"tables", tables},
                {"max_rel_err_row", worst_row},
                {"max_rel_err_selector", worst_sel},
                {"max_rel_err_parseval", worst_parseval}};
  row.pass = c.ok;
  return row;
}

/// Zero-slack masks of the counting bound, derived independently: either
/// every |A_j| is in {0, n} with an even number equal to n, or every |A_j| is
/// in {1, n-1} with an even number equal to n-1.
inline bool predicted_zero_slack(int n, std::uint64_t mask) {
  int top = 0, low = 0, hi_even = 0, hi_odd = 0;
  for (int j = 0; j < n; ++j) {
    const int a = std::popcount((mask >> (j * n)) & row_mask(n, 0));
    if (a == 0 || a == n) {
      ++top;
      if (a == n) ++hi_even;
    }
    if (a == 1 || a == n - 1) {
      ++low;
      if (a == n - 1 && n != 2) ++hi_odd;
    }
  }
  return (top == n && hi_even % 2 == 0) || (low == n && hi_odd % 2 == 0);
}

// 5. Even-n counting bound over every mask.
inline ReproRow counting(const RunConfig&) {
  ReproRow row{"5", "counting bound n^n - prod(n-2|A_j|) >= (n^n-(n-2)^n)/n * oddCount for every mask, n in {2,4}; "
                    "minimal slack 0; the zero-slack masks are exactly those with all |A_j| in {0,n} (evenly many n) "
                    "or all |A_j| in {1,n-1} (evenly many n-1), which includes every all-|A_j|=1 mask"};
  row.budget_s = 300;
  Check c;
  io::json vals = io::json::object();
  for (int n : {2, 4}) {
    const auto rep = even_n_counting_bound(n);
    const std::string tag = "n=" + std::to_string(n);
    c.expect(rep.holds, tag + ": bound fails");
    c.expect(rep.checked == (std::uint64_t{1} << (n * n)), tag + ": mask count");
    c.expect(rep.min_slack == 0, tag + ": minimal slack is not 0");
    c.expect(rep.zero_slack.size() == rep.zero_slack_count, tag + ": zero-slack list truncated");
    // Every all-ones mask has zero slack.
    std::uint64_t ones_masks = 0, ones_zero = 0;
    std::vector<int> k(static_cast<std::size_t>(n), 0);
    std::vector<bool> in_zero_set(std::size_t{1} << (n * n), false);
    for (auto m : rep.zero_slack) in_zero_set[m] = true;
    while (true) {
      const std::uint64_t m = selector_mask(n, k);
      ++ones_masks;
      if (in_zero_set[m]) ++ones_zero;
      int j = 0;
      while (j < n && ++k[j] == n) k[j++] = 0;
      if (j == n) break;
    }
    c.expect(ones_zero == ones_masks, tag + ": an all-|A_j|=1 mask has positive slack");
    // The full zero set matches the characterization.
    std::uint64_t predicted = 0, mismatches = 0;
    for (std::uint64_t m = 0; m < in_zero_set.size(); ++m) {
      const bool p = predicted_zero_slack(n, m);
      predicted += p;
      if (p != in_zero_set[m]) ++mismatches;
    }
    c.expect(mismatches == 0, tag + ": zero-slack set differs from its characterization");
    vals[tag] = {{"checked", rep.checked},
                 {"min_slack", to_string(rep.min_slack)},
                 {"zero_slack_masks", rep.zero_slack_count},
                 {"all_ones_masks", ones_masks},
                 {"other_zero_slack_masks", rep.zero_slack_count - ones_masks}};
  }
  row.values = vals;
  row.pass = c.ok;
  return row;
}

// 6. Permutation variant fails through psi.
inline ReproRow permutation(const RunConfig& cfg) {
  ReproRow row{"6", "psi at n in {4,6}: row total n 2^{n^2+1}, permutation total 2^{n^2+2}(n-1)!, so K >= n/2"};
  row.budget_s = 120;
  Check c;
  io::json vals = io::json::object();
  for (int n : {4, 6}) {
    const std::string tag = "n=" + std::to_string(n);
    const BigInt nb(n);
    BigInt fact = 1;
    for (int i = 2; i < n; ++i) fact *= i;
    const BigInt want_row = pow2(n * n + 1) * nb;
    const BigInt want_perm = pow2(n * n + 2) * fact;
    const auto w = psi_character(n);
    const auto tot = character_totals(w, false);
    const BigInt perm_total = 2 * pow2(n * n) * psi_flipping_permutations_by_first_image(n);
    c.expect(tot.row_total == want_row, tag + ": row total");
    c.expect(perm_total == want_perm, tag + ": permutation total");
    const Rational k = Rational(tot.row_total / nb) / Rational(perm_total, fact * nb);
    c.expect(k == Rational(n, 2), tag + ": K != n/2");
    io::json v{{"row_total", to_string(Rational(tot.row_total))},
               {"permutation_total", to_string(Rational(perm_total))},
               {"minimal_K", to_string(k)}};
    if (n == 4) {
      // Cross-checks: enumerate permutations, then the full table sum.
      c.expect(w.flipping_permutations() == psi_flipping_permutations_by_first_image(n),
               tag + ": classification disagrees with enumeration");
      const auto rep = permutation_variant_sides(witness_psi(n, cfg.caps), 1.0, cfg.threads);
      c.expect(rep.lhs_exact && *rep.lhs_exact * n == Rational(want_row), tag + ": table lhs");
      c.expect(rep.rhs_exact && *rep.rhs_exact * Rational(fact * nb) == Rational(want_perm), tag + ": table rhs");
      c.expect(rep.constant == Rational(n, 2), tag + ": table K");
      v["table_minimal_K"] = to_string(rep.constant);
    }
    vals[tag] = v;
  }
  row.values = vals;
  row.pass = c.ok;
  return row;
}

// 7. Odd n: the standard variant degenerates, the y-variant holds.
inline ReproRow odd_n(const RunConfig& cfg) {
  ReproRow row{"7", "n=3: standard rhs = 0 and lhs > 0 for the odd witness; y-averaged variant holds with "
                    "constant 2/(1-(2/3)^3) = 54/19"};
  row.budget_s = 60;
  Check c;
  const int n = 3;
  const auto f = witness_odd(n, cfg.caps);
  const auto s = standard_sums(f, 1.0, cfg.threads);
  c.expect(s.rhs_crossings && *s.rhs_crossings == 0, "standard rhs is not 0");
  c.expect(s.lhs_crossings && *s.lhs_crossings > 0, "standard lhs is 0");
  const BigInt want_lhs = BigInt(n - 1) * pow2(n * n + 1);
  c.expect(BigInt(*s.lhs_crossings) * 2 == want_lhs, "standard lhs != (n-1) 2^{n^2+1}");
  const Rational cy = y_variant_constant(n);
  c.expect(cy == Rational(54, 19), "y constant");
  std::uint64_t checked = 0, fails = 0;
  auto y = ks_y_variant_sides(f, 1.0, cfg.threads);
  ++checked;
  if (!(y.holds && y.exact && *y.rhs_exact > 0)) ++fails;
  const auto parity = tabulate(n, [](const MatrixPoint& x) { return (std::popcount(x.index) & 1) ? -1.0 : 1.0; },
                               cfg.caps);
  auto yp = ks_y_variant_sides(parity, 1.0, cfg.threads);
  ++checked;
  if (!(yp.holds && yp.rhs > 0)) ++fails;
  for (std::size_t i = 0; i < scaled(20, cfg.suite_scale); ++i) {
    const auto g = random_table(n, 1, cfg.seed + 65537 + i, cfg.caps);
    for (double theta : {1.0, 2.0}) {
      ++checked;
      if (!ks_y_variant_sides(g, theta, cfg.threads).holds) ++fails;
    }
  }
  c.expect(fails == 0, std::to_string(fails) + " y-variant failures");
  row.values = {{"standard_lhs", s.lhs},
                {"standard_rhs", 0},
                {"y_constant", to_string(cy)},
                {"y_odd_witness_lhs", to_string(*y.lhs_exact)},
                {"y_odd_witness_rhs", to_string(*y.rhs_exact)},
                {"y_checked", checked},
                {"y_failures", fails}};
  row.pass = c.ok;
  return row;
}

// 8. Cut-cone LP suite.
inline ReproRow lp_suite(const RunConfig& cfg) {
  ReproRow row{"8", "F_2^3 Hamming exactly L1; sqrt-Hamming cube feasible within 1e-7; c1 of l_2^2(F_2^2) "
                    "with duality gap <= 1e-7 in [1, sqrt 2]; 4-point spaces have D = 1"};
  row.budget_s = 300;
  Check c;
  const auto h3 = hamming_cube_space(3);
  const auto r1 = l1_embeddable(h3, cfg.caps);
  c.expect(r1.feasible && r1.exact, "Hamming cube not exactly feasible");
  if (r1.feasible && r1.exact) {
    const auto d = r1.combination.expand_exact();
    bool same = true;
    for (std::size_t a = 0; a < 8; ++a)
      for (std::size_t b = 0; b < 8; ++b) same &= d[a * 8 + b] == h3.exact_dist(a, b);
    c.expect(same, "cut combination does not reproduce the Hamming metric");
  }
  const auto snow = snowflake_space(h3, 0.5);
  const auto r2 = l1_embeddable(snow, cfg.caps);
  c.expect(r2.feasible && r2.max_residual <= 1e-7, "sqrt-Hamming cube not feasible within 1e-7");

  const auto l22 = materialize_space(2, PqParams{1.0, 2.0}, cfg.caps);
  const auto cert = c1_distortion(l22, cfg.caps);
  c.expect(cert.duality_gap <= 1e-7, "duality gap above 1e-7");
  c.expect(cert.lower >= 1.0 - 1e-9 && cert.upper <= std::sqrt(2.0) + 1e-9, "value outside [1, sqrt 2]");
  const double ks_lb = poincare_lower_bound(ks_pair(2, PqParams{1.0, 2.0}));
  c.expect(ks_lb <= cert.lower + 1e-9, "KS pair bound exceeds the LP value");

  // Random rational 4-point metrics (shortest-path closure of random weights).
  std::mt19937_64 rng(cfg.seed ^ 0x4c50u);
  std::uniform_int_distribution<int> w(1, 12);
  std::uint64_t four = 0, four_fail = 0;
  for (int t = 0; t < 40; ++t) {
    std::vector<Rational> d(16, Rational(0));
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) d[a * 4 + b] = d[b * 4 + a] = Rational(w(rng), w(rng));
    for (int k = 0; k < 4; ++k)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
          if (d[a * 4 + k] + d[k * 4 + b] < d[a * 4 + b]) d[a * 4 + b] = d[a * 4 + k] + d[k * 4 + b];
    const auto s4 = FiniteMetricSpace::from_rationals({"a", "b", "c", "d"}, d, "random 4-point");
    const auto c4 = c1_distortion(s4, cfg.caps);
    ++four;
    if (!(c4.exact && c4.exact_value && *c4.exact_value == 1)) ++four_fail;
  }
  c.expect(four_fail == 0, std::to_string(four_fail) + " four-point spaces with D != 1");
  row.values = {{"hamming_cube_cuts", r1.combination.weights.size()},
                {"sqrt_hamming_residual", r2.max_residual},
                {"l2_F2_2_lower", cert.lower},
                {"l2_F2_2_upper", cert.upper},
                {"l2_F2_2_gap", cert.duality_gap},
                {"l2_F2_2_iterations", cert.iterations},
                {"ks_pair_bound", ks_lb},
                {"four_point_spaces", four}};
  row.pass = c.ok;
  return row;
}

// 9. Lower bound versus Hoelder upper bound for (p, q) = (1, 2).
inline ReproRow sandwich(const RunConfig&) {
  ReproRow row{"9", "(p,q)=(1,2), n in {2,4,8,16}: explicit lower bound <= sqrt n and increasing; lower/sqrt n "
                    "equals (1-(1-2/n)^n)/2 within 1e-12 and converges monotonically to (1-e^-2)/2"};
  row.budget_s = 1;
  Check c;
  const PqParams pq{1.0, 2.0};
  const double limit = -std::expm1(-2.0) / 2.0;
  // (1-2/n)^n increases to e^-2, so lower/sqrt n approaches its limit from
  // above while the bound itself grows like sqrt n.
  double prev_ratio = std::numeric_limits<double>::infinity();
  double prev_lower = 0.0;
  io::json vals = io::json::array();
  for (int n : {2, 4, 8, 16}) {
    const double lb = asymptotic_lower_bound(n, pq);
    const double ub = holder_sandwich(n, n, pq, 0).c1_upper_bound;
    const double ratio = lb / std::sqrt(static_cast<double>(n));
    const double nd = n;
    const double closed = -std::expm1(nd * std::log1p(-2.0 / nd)) / 2.0;
    c.expect(lb <= ub, "n=" + std::to_string(n) + ": lower above upper");
    c.expect(lb > prev_lower, "n=" + std::to_string(n) + ": lower bound not increasing");
    c.expect(ratio < prev_ratio && ratio > limit,
             "n=" + std::to_string(n) + ": ratio not monotonically approaching the limit");
    c.expect(std::abs(ratio - closed) <= 1e-12, "n=" + std::to_string(n) + ": closed form");
    prev_ratio = ratio;
    prev_lower = lb;
    vals.push_back({{"n", n}, {"lower", lb}, {"upper", ub}, {"lower_over_sqrt_n", ratio}});
  }
  row.values = {{"rows", vals}, {"limit", limit}};
  row.pass = c.ok;
  return row;
}

// 10. Schoenberg and the finite-scale F_p map.
inline ReproRow embeddings(const RunConfig& cfg) {
  ReproRow row{"10", "Schoenberg on {0,1}^3 reproduces d^beta (1e-8) with Gram spectrum >= -1e-10 trace, "
                     "beta in {1, 1/2}; F_p at p=4, m=50000 within 2% of d^{2/p}"};
  row.budget_s = 120;
  Check c;
  std::vector<std::vector<double>> cube;
  for (int i = 0; i < 8; ++i) cube.push_back({double(i & 1), double((i >> 1) & 1), double((i >> 2) & 1)});
  io::json vals = io::json::object();
  for (double beta : {1.0, 0.5}) {
    const auto e = schoenberg_embed(cube, beta);
    c.expect(e.max_rel_error <= 1e-8, "beta=" + std::to_string(beta) + ": distances");
    c.expect(e.min_eigenvalue >= -1e-10 * e.gram_trace, "beta=" + std::to_string(beta) + ": spectrum");
    vals["beta=" + std::to_string(beta)] = {{"max_rel_error", e.max_rel_error},
                                            {"min_eig_over_trace", e.min_eigenvalue / e.gram_trace}};
  }
  std::vector<MatrixPoint> pts;
  for (auto x : enumerate_points(2, cfg.caps)) pts.push_back(x);
  const auto fp = fp_embed(pts, 4.0, 50000, cfg.seed, cfg.threads);
  c.expect(fp.max_rel_error <= 0.02, "F_p error above 2%");
  vals["fp"] = {{"p", 4}, {"m", 50000}, {"seed", cfg.seed}, {"max_rel_error", fp.max_rel_error}};
  row.values = vals;
  row.pass = c.ok;
  return row;
}

// 11. Linear counterexample for p > 2.
inline ReproRow p_above_two(const RunConfig& cfg) {
  ReproRow row{"11", "p=4, theta=1: row/selector ratio n^{1/2-1/p} is sqrt 2 at n=4 and 2 at n=16, "
                     "from direct mixed-norm computation"};
  row.budget_s = 1;
  Check c;
  io::json vals = io::json::object();
  for (auto [n, want] : {std::pair{4, std::sqrt(2.0)}, std::pair{16, 2.0}}) {
    const auto r = p_gt_2_counterexample(n, 4.0, 1.0, cfg.seed, 8, 512);
    const std::string tag = "n=" + std::to_string(n);
    c.expect(r.ratio_pow && *r.ratio_pow == Rational(n), tag + ": (ratio)^p != n");
    c.expect(std::abs(r.ratio - want) <= 1e-14 * want, tag + ": ratio");
    vals[tag] = {{"ratio", r.ratio}, {"ratio_pow_4", r.ratio_pow ? to_string(*r.ratio_pow) : "n/a"}};
  }
  row.values = vals;
  row.pass = c.ok;
  return row;
}

}  // namespace repro_detail

using ReproCriterion = std::function<ReproRow(const RunConfig&)>;

inline const std::vector<std::pair<std::string, ReproCriterion>>& repro_criteria() {
  static const std::vector<std::pair<std::string, ReproCriterion>> list = {
      {"1", repro_detail::isoperimetric}, {"2", repro_detail::sharpness},   {"3", repro_detail::random_suite},
      {"4", repro_detail::spectral},      {"5", repro_detail::counting},    {"6", repro_detail::permutation},
      {"7", repro_detail::odd_n},         {"8", repro_detail::lp_suite},    {"9", repro_detail::sandwich},
      {"10", repro_detail::embeddings},   {"11", repro_detail::p_above_two}};
  return list;
}

/// Runs one criterion; errors become failing rows rather than crashes.
inline ReproRow run_criterion(const std::string& id, const RunConfig& cfg) {
  for (const auto& [cid, fn] : repro_criteria()) {
    if (cid != id) continue;
    const auto t0 = repro_detail::Clock::now();
    ReproRow row;
    try {
      row = fn(cfg);
    } catch (const std::exception& e) {
      row.id = id;
      row.pass = false;
      row.detail = std::string("error: ") + e.what();
    }
    row.runtime_s = std::chrono::duration<double>(repro_detail::Clock::now() - t0).count();
    if (row.pass && row.budget_s > 0 && row.runtime_s > row.budget_s) {
      row.pass = false;
      row.detail = "runtime budget exceeded";
    }
    row.values["config_hash"] = cfg.hash();
    return row;
  }
  throw DomainError("unknown criterion " + id);
}

inline ReproReport run_repro(const RunConfig& cfg, const std::vector<std::string>& only = {}) {
  ReproReport rep;
  rep.seed = cfg.seed;
  rep.config_hash = cfg.hash();
  for (const auto& [id, fn] : repro_criteria()) {
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    rep.rows.push_back(run_criterion(id, cfg));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Distortion table

struct DistortionTableRow {
  int n = 0;
  PqParams params;
  double lower = 1.0;
  bool lower_vacuous = false;
  double upper = 1.0;
  std::optional<double> lp_value;
  std::optional<double> lp_gap;
  double log_cardinality_root = 0.0;  // (n^2 log 2)^{1/4}
  std::string note;
};

/// lower: explicit KS bound (flagged vacuous when <= 1); upper: min{m,n}
/// Hoelder bound; LP value when the space has at most max_lp_points points.
inline std::vector<DistortionTableRow> distortion_table(const std::vector<int>& ns,
                                                        const std::vector<PqParams>& pqs,
                                                        const RunConfig& cfg, bool with_lp = true) {
  std::vector<DistortionTableRow> out;
  for (const auto& pq : pqs) {
    for (int n : ns) {
      DistortionTableRow r;
      r.n = n;
      r.params = pq;
      r.log_cardinality_root = std::pow(static_cast<double>(n) * n * std::log(2.0), 0.25);
      if (pq.p < pq.q) {
        r.lower = asymptotic_lower_bound(n, pq);
        r.upper = holder_sandwich(n, n, pq, 0).c1_upper_bound;
      } else {
        const int m = n % 2 == 0 ? n : n - 1;
        r.lower = m >= 2 ? poincare_lower_bound(ks_pair(m, pq)) : 1.0;
        r.upper = pq.p == pq.q && pq.p >= 1.0 ? 1.0 : std::numeric_limits<double>::infinity();
        r.note = "p >= q: no separation, lower bound vacuous";
      }
      r.lower_vacuous = r.lower <= 1.0;
      if (with_lp && n * n < 63 && point_count(n) <= static_cast<std::uint64_t>(cfg.caps.max_lp_points)) {
        const auto space = materialize_space(n, pq, cfg.caps);
        const auto cert = c1_distortion(space, cfg.caps);
        r.lp_value = cert.upper;
        r.lp_gap = cert.duality_gap;
      }
      out.push_back(r);
    }
  }
  return out;
}

namespace repro_detail {
inline std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}
inline std::string csv_escape(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}
}  // namespace repro_detail

inline std::string emit_distortion_table(const std::vector<DistortionTableRow>& rows, ReportFormat fmt,
                                         const RunConfig& cfg) {
  using repro_detail::num;
  std::ostringstream os;
  const std::string prov_lower = "bounds/asymptotic_lower_bound";
  const std::string prov_upper = "bounds/holder_sandwich";
  const std::string prov_lp = "cut_cone/c1_distortion";
  if (fmt == ReportFormat::json) {
    io::json arr = io::json::array();
    for (const auto& r : rows) {
      io::json j{{"n", r.n}, {"p", r.params.p}, {"q", r.params.q}, {"lower", r.lower},
                 {"lower_vacuous", r.lower_vacuous}, {"upper", r.upper},
                 {"log_cardinality_root", r.log_cardinality_root},
                 {"provenance", {{"lower", prov_lower}, {"upper", prov_upper}, {"lp", prov_lp},
                                 {"config_hash", cfg.hash()}}}};
      if (r.lp_value) {
        j["lp_value"] = *r.lp_value;
        j["lp_gap"] = *r.lp_gap;
      }
      if (!r.note.empty()) j["note"] = r.note;
      arr.push_back(std::move(j));
    }
    io::json doc{{"schema", io::kSchemaVersion}, {"seed", cfg.seed}, {"config_hash", cfg.hash()}, {"rows", arr}};
    os << doc.dump(2) << "\n";
  } else if (fmt == ReportFormat::csv) {
    os << "n,p,q,lower,lower_vacuous,upper,lp_value,lp_gap,log_cardinality_root,config_hash\n";
    for (const auto& r : rows) {
      os << r.n << ',' << num(r.params.p) << ',' << num(r.params.q) << ',' << num(r.lower) << ','
         << (r.lower_vacuous ? "true" : "false") << ',' << num(r.upper) << ','
         << (r.lp_value ? num(*r.lp_value) : "") << ',' << (r.lp_gap ? num(*r.lp_gap) : "") << ','
         << num(r.log_cardinality_root) << ',' << cfg.hash() << "\n";
    }
  } else {
    os << "| n | p | q | lower | upper | exact LP | (n^2 log 2)^{1/4} |\n";
    os << "|---|---|---|---|---|---|---|\n";
    for (const auto& r : rows) {
      os << "| " << r.n << " | " << num(r.params.p) << " | " << num(r.params.q) << " | " << num(r.lower)
         << (r.lower_vacuous ? " (vacuous)" : "") << " | " << num(r.upper) << " | "
         << (r.lp_value ? num(*r.lp_value) : "-") << " | " << num(r.log_cardinality_root) << " |\n";
    }
    os << "\nseed " << cfg.seed << ", config " << cfg.hash() << "\n";
  }
  return os.str();
}

inline std::string render_report(const ReproReport& rep, ReportFormat fmt) {
  using repro_detail::num;
  std::ostringstream os;
  if (fmt == ReportFormat::json) {
    io::json rows = io::json::array();
    for (const auto& r : rep.rows) {
      rows.push_back({{"id", r.id}, {"claim", r.claim}, {"pass", r.pass}, {"runtime_s", r.runtime_s},
                      {"budget_s", r.budget_s}, {"values", r.values}, {"detail", r.detail}});
    }
    io::json doc{{"schema", io::kSchemaVersion}, {"seed", rep.seed}, {"config_hash", rep.config_hash},
                 {"all_pass", rep.all_pass()}, {"rows", rows}};
    os << doc.dump(2) << "\n";
  } else if (fmt == ReportFormat::csv) {
    os << "id,pass,runtime_s,budget_s,claim,values,detail\n";
    for (const auto& r : rep.rows) {
      os << r.id << ',' << (r.pass ? "pass" : "fail") << ',' << num(r.runtime_s) << ',' << num(r.budget_s) << ','
         << repro_detail::csv_escape(r.claim) << ',' << repro_detail::csv_escape(r.values.dump()) << ','
         << repro_detail::csv_escape(r.detail) << "\n";
    }
  } else {
    os << "| # | verdict | runtime (s) | claim |\n|---|---|---|---|\n";
    for (const auto& r : rep.rows) {
      os << "| " << r.id << " | " << (r.pass ? "PASS" : "FAIL") << " | " << num(r.runtime_s) << " | " << r.claim
         << (r.detail.empty() ? "" : " (" + r.detail + ")") << " |\n";
    }
    os << "\nseed " << rep.seed << ", config " << rep.config_hash << "\n";
  }
  return os.str();
}

}  // namespace kscube
