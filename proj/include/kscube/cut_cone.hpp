#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kscube/config.hpp"
#include "kscube/errors.hpp"
#include "kscube/metric_space.hpp"
#include "kscube/rational.hpp"
#include "kscube/simplex.hpp"

namespace kscube {

/// Cut semimetric delta_S on N points. Canonical form: point 0 is never in
/// S, so S and its complement are not both represented.
struct CutMetric {
  std::uint32_t subset = 0;

  bool separates(std::size_t a, std::size_t b) const {
    return ((subset >> a) & 1U) != ((subset >> b) & 1U);
  }
  friend bool operator==(const CutMetric&, const CutMetric&) = default;
};

inline std::size_t cut_count(std::size_t points) {
  return points <= 1 ? 0 : (std::size_t{1} << (points - 1)) - 1;
}
/// Column index j <-> subset (j + 1) << 1.
inline CutMetric cut_from_index(std::size_t j) { return {static_cast<std::uint32_t>((j + 1) << 1)}; }
inline std::size_t index_of_cut(CutMetric c) { return (c.subset >> 1) - 1; }

inline CutMetric canonical_cut(std::uint32_t subset, std::size_t points) {
  const std::uint32_t all = points >= 32 ? ~0U : ((1U << points) - 1);
  subset &= all;
  if (subset & 1U) subset = ~subset & all;
  if (subset == 0) throw DomainError("a cut must separate at least one pair");
  return {subset};
}

/// Unordered pairs (a < b) in lexicographic order.
struct PairIndex {
  std::size_t points = 0;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<std::size_t> index;  // points x points -> pair id

  explicit PairIndex(std::size_t n) : points(n), index(n * n, 0) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) {
        index[a * n + b] = index[b * n + a] = pairs.size();
        pairs.emplace_back(a, b);
      }
  }
  std::size_t size() const { return pairs.size(); }
  std::size_t operator()(std::size_t a, std::size_t b) const { return index[a * points + b]; }
};

/// Visits every canonical cut in Gray-code order with the running value
/// sum_{pairs e separated by S} w_e, in O(N) per cut.
template <class T, class Fn>
void sweep_cut_sums(const PairIndex& pairs, const std::vector<T>& w, Fn&& visit) {
  const std::size_t n = pairs.points;
  if (n < 2) return;
  std::uint32_t member = 0;
  T sum = 0;
  const std::size_t count = cut_count(n);
  for (std::size_t i = 1; i <= count; ++i) {
    const std::size_t v = static_cast<std::size_t>(std::countr_zero(i)) + 1;
    member ^= 1U << v;
    const bool in_v = (member >> v) & 1U;
    for (std::size_t u = 0; u < n; ++u) {
      if (u == v) continue;
      const T& we = w[pairs(u, v)];
      if (((member >> u) & 1U) != in_v) {
        sum += we;
      } else {
        sum -= we;
      }
    }
    const std::size_t gray = i ^ (i >> 1);
    visit(gray - 1, sum);
  }
}

// ---------------------------------------------------------------------------
// Primal witnesses and certificates

struct CutWeight {
  CutMetric cut;
  double weight = 0.0;
  std::optional<Rational> exact;
};

/// Nonnegative combination sum_S w_S delta_S.
struct CutCombination {
  std::size_t points = 0;
  std::vector<CutWeight> weights;

  std::vector<double> expand() const {
    std::vector<double> d(points * points, 0.0);
    for (const auto& cw : weights)
      for (std::size_t a = 0; a < points; ++a)
        for (std::size_t b = 0; b < points; ++b)
          if (cw.cut.separates(a, b)) d[a * points + b] += cw.weight;
    return d;
  }

  std::vector<Rational> expand_exact() const {
    std::vector<Rational> d(points * points, Rational(0));
    for (const auto& cw : weights) {
      if (!cw.exact) throw DomainError("combination carries no exact weights");
      for (std::size_t a = 0; a < points; ++a)
        for (std::size_t b = 0; b < points; ++b)
          if (cw.cut.separates(a, b)) d[a * points + b] += *cw.exact;
    }
    return d;
  }
};

struct L1EmbeddingResult {
  bool feasible = false;
  bool exact = false;
  CutCombination combination;
  /// Infeasible: a functional y over pairs with sum_e y_e delta_S(e) <= 0 for
  /// every cut but sum_e y_e d_e > 0.
  std::vector<double> separator;
  std::optional<std::vector<Rational>> separator_exact;
  double max_residual = 0.0;  // max_e |sum_S w_S delta_S(e) - d_e|
  std::size_t iterations = 0;
};

/// Bounds on c_1 of a finite space with the witnesses that prove them. The
/// dual is a Poincare-type pair: alpha ("expand") and beta ("contract")
/// weights over pairs with sum_e alpha_e delta_S(e) <= C sum_e beta_e delta_S(e)
/// for every cut, giving c_1 >= sum alpha d / (C sum beta d).
struct DistortionCertificate {
  std::string space_id;
  std::size_t points = 0;
  double lower = 1.0;
  std::string lower_provenance = "trivial";
  double upper = 1.0;
  std::string upper_provenance = "trivial";
  bool exact = false;
  std::optional<Rational> exact_value;
  CutCombination primal;
  std::vector<double> dual_expand;    // alpha
  std::vector<double> dual_contract;  // beta
  std::optional<std::vector<Rational>> dual_expand_exact;
  std::optional<std::vector<Rational>> dual_contract_exact;
  double cut_constant = 1.0;  // max over cuts of alpha.delta / beta.delta (re-checked)
  double duality_gap = 0.0;   // upper - lower
  std::size_t iterations = 0;
};

namespace detail {

template <class T>
std::vector<T> pair_distances(const FiniteMetricSpace& s, const PairIndex& pairs) {
  std::vector<T> d(pairs.size());
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    const auto [a, b] = pairs.pairs[e];
    if constexpr (std::is_same_v<T, Rational>) {
      d[e] = s.exact_dist(a, b);
    } else {
      d[e] = s.dist(a, b);
    }
  }
  return d;
}

/// Rows: one per pair. Columns: cuts. Ax = d.
template <class T>
class FeasibilityLp final : public lp::Problem<T> {
 public:
  FeasibilityLp(const PairIndex& pairs, std::vector<T> d) : pairs_(pairs), d_(std::move(d)) {}
  std::size_t rows() const override { return pairs_.size(); }
  std::size_t cols() const override { return cut_count(pairs_.points); }
  const std::vector<T>& rhs() const override { return d_; }
  T cost(std::size_t) const override { return T(0); }
  void column(std::size_t j, std::vector<T>& out) const override {
    out.assign(rows(), T(0));
    const CutMetric c = cut_from_index(j);
    for (std::size_t e = 0; e < pairs_.size(); ++e)
      if (c.separates(pairs_.pairs[e].first, pairs_.pairs[e].second)) out[e] = 1;
  }
  void price(std::span<const T> y, std::vector<T>& out) const override {
    out.assign(cols(), T(0));
    std::vector<T> w(y.begin(), y.end());
    sweep_cut_sums(pairs_, w, [&](std::size_t j, const T& s) { out[j] = -s; });
  }

 private:
  const PairIndex& pairs_;
  std::vector<T> d_;
};

/// Distortion LP in reciprocal form: maximize t subject to
///   t d_e <= sum_S w_S delta_S(e) <= d_e  for every pair e, w >= 0,
/// so the optimal distortion is 1/t. Rows 0..P-1 hold
///   -sum_S w_S delta_S(e) + t d_e + lo_e = 0
/// and rows P..2P-1 hold sum_S w_S delta_S(e) + hi_e = d_e, which makes the
/// slack columns an immediately feasible starting basis.
/// Columns: [cuts | t | lo_0..lo_{P-1} | hi_0..hi_{P-1}].
template <class T>
class DistortionLp final : public lp::Problem<T> {
 public:
  DistortionLp(const PairIndex& pairs, std::vector<T> d)
      : pairs_(pairs), d_(std::move(d)), cuts_(cut_count(pairs.points)) {
    rhs_.assign(2 * pairs_.size(), T(0));
    for (std::size_t e = 0; e < pairs_.size(); ++e) rhs_[pairs_.size() + e] = d_[e];
  }
  std::size_t cuts() const { return cuts_; }
  std::size_t t_column() const { return cuts_; }
  std::size_t rows() const override { return 2 * pairs_.size(); }
  std::size_t cols() const override { return cuts_ + 1 + 2 * pairs_.size(); }
  const std::vector<T>& rhs() const override { return rhs_; }
  T cost(std::size_t j) const override { return j == cuts_ ? T(-1) : T(0); }
  void column(std::size_t j, std::vector<T>& out) const override {
    const std::size_t p = pairs_.size();
    out.assign(rows(), T(0));
    if (j < cuts_) {
      const CutMetric c = cut_from_index(j);
      for (std::size_t e = 0; e < p; ++e)
        if (c.separates(pairs_.pairs[e].first, pairs_.pairs[e].second)) {
          out[e] = -1;
          out[p + e] = 1;
        }
    } else if (j == cuts_) {
      for (std::size_t e = 0; e < p; ++e) out[e] = d_[e];
    } else if (j < cuts_ + 1 + p) {
      out[j - cuts_ - 1] = 1;
    } else {
      out[p + (j - cuts_ - 1 - p)] = 1;
    }
  }
  void price(std::span<const T> y, std::vector<T>& out) const override {
    const std::size_t p = pairs_.size();
    out.assign(cols(), T(0));
    std::vector<T> w(p);
    for (std::size_t e = 0; e < p; ++e) w[e] = y[p + e] - y[e];
    sweep_cut_sums(pairs_, w, [&](std::size_t j, const T& s) { out[j] = -s; });
    T tcol = -1;
    for (std::size_t e = 0; e < p; ++e) tcol -= y[e] * d_[e];
    out[cuts_] = tcol;
    for (std::size_t e = 0; e < p; ++e) {
      out[cuts_ + 1 + e] = -y[e];
      out[cuts_ + 1 + p + e] = -y[p + e];
    }
  }

 private:
  const PairIndex& pairs_;
  std::vector<T> d_;
  std::size_t cuts_;
  std::vector<T> rhs_;
};

inline void check_lp_size(const FiniteMetricSpace& s, const Caps& caps) {
  if (s.size() > static_cast<std::size_t>(caps.max_lp_points)) {
    throw SizeLimitError("cut LP limited to " + std::to_string(caps.max_lp_points) +
                         " points (2^{N-1}-1 cut columns), got " + std::to_string(s.size()));
  }
}

inline bool use_exact(const FiniteMetricSpace& s, const Caps& caps) {
  return s.exact() && s.size() <= static_cast<std::size_t>(caps.max_exact_lp_points);
}

}  // namespace detail

/// Largest ratio sum_e alpha_e delta_S(e) / sum_e beta_e delta_S(e) over all
/// cuts, i.e. the smallest C for which the pair inequality holds for every
/// cut metric (hence, by the cut-cone decomposition, for every L1-valued map).
/// Returns +infinity when some cut has zero beta-mass but positive alpha-mass.
inline double cut_cone_constant(std::size_t points, const std::vector<double>& alpha,
                                const std::vector<double>& beta) {
  PairIndex pairs(points);
  std::vector<double> a_sum(cut_count(points)), b_sum(cut_count(points));
  // Direct accumulation per cut (no Gray-code drift); this is a checker.
  double worst = 0.0;
  for (std::size_t j = 0; j < cut_count(points); ++j) {
    const CutMetric c = cut_from_index(j);
    double sa = 0.0, sb = 0.0;
    for (std::size_t e = 0; e < pairs.size(); ++e) {
      if (c.separates(pairs.pairs[e].first, pairs.pairs[e].second)) {
        sa += alpha[e];
        sb += beta[e];
      }
    }
    if (sa <= 0.0) continue;
    if (sb <= 0.0) return std::numeric_limits<double>::infinity();
    worst = std::max(worst, sa / sb);
  }
  return worst;
}

inline Rational cut_cone_constant_exact(std::size_t points, const std::vector<Rational>& alpha,
                                        const std::vector<Rational>& beta) {
  PairIndex pairs(points);
  Rational worst = 0;
  for (std::size_t j = 0; j < cut_count(points); ++j) {
    const CutMetric c = cut_from_index(j);
    Rational sa = 0, sb = 0;
    for (std::size_t e = 0; e < pairs.size(); ++e) {
      if (c.separates(pairs.pairs[e].first, pairs.pairs[e].second)) {
        sa += alpha[e];
        sb += beta[e];
      }
    }
    if (sa <= 0) continue;
    if (sb <= 0) throw NumericalError("dual certificate has a cut with no contracting mass");
    if (sa / sb > worst) worst = sa / sb;
  }
  return worst;
}

/// Decides membership of the space's metric in the cut cone.
inline L1EmbeddingResult l1_embeddable(const FiniteMetricSpace& space,
                                       const Caps& caps = Caps::global(), double eps = 1e-7) {
  detail::check_lp_size(space, caps);
  L1EmbeddingResult out;
  const std::size_t n = space.size();
  out.combination.points = n;
  if (n <= 1) {
    out.feasible = true;
    out.exact = true;
    return out;
  }
  PairIndex pairs(n);
  if (detail::use_exact(space, caps)) {
    out.exact = true;
    auto d = detail::pair_distances<Rational>(space, pairs);
    detail::FeasibilityLp<Rational> prob(pairs, d);
    auto res = lp::solve(prob);
    out.iterations = res.iterations;
    if (res.status == lp::Status::infeasible) {
      out.feasible = false;
      out.separator_exact = res.farkas;
      for (const auto& v : res.farkas) out.separator.push_back(to_double(v));
      return out;
    }
    if (res.status != lp::Status::optimal) throw NumericalError("exact cut LP did not terminate");
    out.feasible = true;
    for (std::size_t j = 0; j < res.x.size(); ++j) {
      if (res.x[j] > 0) out.combination.weights.push_back({cut_from_index(j), to_double(res.x[j]), res.x[j]});
    }
    auto expanded = out.combination.expand_exact();
    for (std::size_t e = 0; e < pairs.size(); ++e) {
      const auto [a, b] = pairs.pairs[e];
      if (expanded[a * n + b] != d[e]) throw NumericalError("exact cut combination does not reproduce the metric");
    }
    return out;
  }
  auto d = detail::pair_distances<double>(space, pairs);
  double scale = 0.0;
  for (double v : d) scale = std::max(scale, v);
  detail::FeasibilityLp<double> prob(pairs, d);
  lp::Options opt;
  opt.feasibility_tol = 1e-10;
  auto res = lp::solve(prob, opt);
  out.iterations = res.iterations;
  if (res.status == lp::Status::infeasible) {
    out.feasible = false;
    out.separator = res.farkas;
    out.max_residual = res.phase1_residual;
    return out;
  }
  if (res.status != lp::Status::optimal) throw NumericalError("cut LP did not converge");
  for (std::size_t j = 0; j < res.x.size(); ++j) {
    if (res.x[j] > 1e-13 * std::max(1.0, scale)) {
      out.combination.weights.push_back({cut_from_index(j), res.x[j], std::nullopt});
    }
  }
  auto expanded = out.combination.expand();
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    const auto [a, b] = pairs.pairs[e];
    out.max_residual = std::max(out.max_residual, std::abs(expanded[a * n + b] - d[e]));
  }
  out.feasible = out.max_residual <= eps * std::max(1.0, scale);
  return out;
}

/// Realized distortion of a cut combination on the space: max ratio over min
/// ratio of embedded to original distances.
inline double realized_distortion(const FiniteMetricSpace& space, const CutCombination& comb) {
  const auto emb = comb.expand();
  const std::size_t n = space.size();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      const double r = emb[a * n + b] / space.dist(a, b);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

/// Minimal L1 distortion of a finite space with primal and dual witnesses.
/// Exact (rational simplex) for exact spaces with N <= 8, floating point with
/// re-checked certificates otherwise.
inline DistortionCertificate c1_distortion(const FiniteMetricSpace& space,
                                           const Caps& caps = Caps::global()) {
  detail::check_lp_size(space, caps);
  DistortionCertificate cert;
  cert.space_id = space.provenance();
  cert.points = space.size();
  cert.primal.points = space.size();
  const std::size_t n = space.size();
  if (n <= 2) {
    // Any 1- or 2-point space is a single (possibly empty) scaled cut.
    cert.exact = true;
    cert.exact_value = Rational(1);
    if (n == 2) {
      cert.primal.weights.push_back({CutMetric{2}, space.dist(0, 1),
                                     space.exact() ? std::optional<Rational>(space.exact_dist(0, 1))
                                                   : std::nullopt});
      cert.upper_provenance = "single cut";
    }
    return cert;
  }
  PairIndex pairs(n);

  if (detail::use_exact(space, caps)) {
    auto d = detail::pair_distances<Rational>(space, pairs);
    detail::DistortionLp<Rational> prob(pairs, d);
    auto res = lp::solve(prob);
    if (res.status != lp::Status::optimal) throw NumericalError("exact distortion LP did not terminate");
    cert.exact = true;
    cert.iterations = res.iterations;
    const Rational t = res.x[prob.t_column()];
    if (t <= 0) throw NumericalError("distortion LP returned a degenerate scale");
    const Rational value = Rational(1) / t;
    cert.exact_value = value;
    for (std::size_t j = 0; j < prob.cuts(); ++j)
      if (res.x[j] > 0) cert.primal.weights.push_back({cut_from_index(j), to_double(res.x[j]), res.x[j]});
    const std::size_t p = pairs.size();
    std::vector<Rational> alpha(p), beta(p);
    for (std::size_t e = 0; e < p; ++e) {
      alpha[e] = -res.y[e];
      beta[e] = -res.y[p + e];
    }
    // Exact re-verification of both witnesses.
    const auto emb = cert.primal.expand_exact();
    Rational lo = -1, hi = 0;
    for (std::size_t e = 0; e < p; ++e) {
      const auto [a, b] = pairs.pairs[e];
      const Rational r = emb[a * n + b] / d[e];
      if (lo < 0 || r < lo) lo = r;
      if (r > hi) hi = r;
    }
    const Rational upper = hi / lo;
    const Rational c = cut_cone_constant_exact(n, alpha, beta);
    Rational ad = 0, bd = 0;
    for (std::size_t e = 0; e < p; ++e) {
      ad += alpha[e] * d[e];
      bd += beta[e] * d[e];
    }
    const Rational lower = ad / (c * bd);
    if (upper != value || lower != value) {
      throw NumericalError("exact distortion certificate failed re-verification");
    }
    cert.upper = to_double(upper);
    cert.lower = to_double(lower);
    cert.cut_constant = to_double(c);
    cert.dual_expand_exact = alpha;
    cert.dual_contract_exact = beta;
    for (std::size_t e = 0; e < p; ++e) {
      cert.dual_expand.push_back(to_double(alpha[e]));
      cert.dual_contract.push_back(to_double(beta[e]));
    }
    cert.upper_provenance = "cut combination (exact rational simplex)";
    cert.lower_provenance = "dual Poincare pair (exact rational simplex)";
    cert.duality_gap = 0.0;
    return cert;
  }

  auto d = detail::pair_distances<double>(space, pairs);
  detail::DistortionLp<double> prob(pairs, d);
  auto res = lp::solve(prob);
  if (res.status != lp::Status::optimal) {
    throw NumericalError(std::string("distortion LP ended with status ") + lp::to_string(res.status));
  }
  cert.iterations = res.iterations;
  double wmax = 0.0;
  for (std::size_t j = 0; j < prob.cuts(); ++j) wmax = std::max(wmax, res.x[j]);
  for (std::size_t j = 0; j < prob.cuts(); ++j)
    if (res.x[j] > 1e-13 * wmax) cert.primal.weights.push_back({cut_from_index(j), res.x[j], std::nullopt});
  const std::size_t p = pairs.size();
  std::vector<double> alpha(p), beta(p);
  double ymax = 0.0;
  for (double v : res.y) ymax = std::max(ymax, std::abs(v));
  // Roundoff-level dual entries would make near-empty cuts dominate the
  // re-checked constant; drop them before re-verification.
  const double floor = 1e-12 * ymax;
  for (std::size_t e = 0; e < p; ++e) {
    alpha[e] = -res.y[e] > floor ? -res.y[e] : 0.0;
    beta[e] = -res.y[p + e] > floor ? -res.y[p + e] : 0.0;
  }
  cert.upper = realized_distortion(space, cert.primal);
  cert.cut_constant = cut_cone_constant(n, alpha, beta);
  double ad = 0.0, bd = 0.0;
  for (std::size_t e = 0; e < p; ++e) {
    ad += alpha[e] * d[e];
    bd += beta[e] * d[e];
  }
  cert.lower = (bd > 0.0 && std::isfinite(cert.cut_constant) && cert.cut_constant > 0.0)
                   ? ad / (cert.cut_constant * bd)
                   : 1.0;
  cert.lower = std::max(cert.lower, 1.0);
  cert.dual_expand = std::move(alpha);
  cert.dual_contract = std::move(beta);
  cert.duality_gap = cert.upper - cert.lower;
  cert.upper_provenance = "cut combination (floating simplex, realized distortion recomputed)";
  cert.lower_provenance = "dual Poincare pair (cut constant re-checked over all cuts)";
  return cert;
}

/// d^alpha for alpha in (0, 1]; exact when every power is rational.
inline FiniteMetricSpace snowflake_space(const FiniteMetricSpace& space, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("snowflake exponent must lie in (0, 1]");
  const std::size_t n = space.size();
  std::string prov = space.provenance() + "^" + std::to_string(alpha);
  if (alpha == 1.0) {
    FiniteMetricSpace copy = space;
    copy.set_provenance(prov);
    return copy;
  }
  const double inv = 1.0 / alpha;
  if (space.exact() && inv == std::floor(inv) && inv <= 64) {
    std::vector<Rational> d(n * n);
    bool ok = true;
    for (std::size_t i = 0; i < n * n && ok; ++i) {
      ok = exact_root(space.exact_dist(i / n, i % n), static_cast<unsigned>(inv), d[i]);
    }
    if (ok) return FiniteMetricSpace::from_rationals(space.labels(), std::move(d), prov);
  }
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i * n + j] = std::pow(space.dist(i, j), alpha);
  return FiniteMetricSpace::from_floats(space.labels(), std::move(d), prov);
}

}  // namespace kscube
