#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "kscube/function_table.hpp"
#include "kscube/matrix_point.hpp"
#include "kscube/parallel.hpp"
#include "kscube/rational.hpp"
#include "kscube/summation.hpp"

namespace kscube {

/// Fourier coefficients on M_n(F_2) ~ F_2^{n^2}. coeffs[m * d + c] holds
/// coordinate c of f^(A_1, ..., A_n), where row block j of the mask m is the
/// indicator of A_j.
struct WalshSpectrum {
  int n = 0;
  int d = 1;
  std::vector<double> coeffs;

  std::span<const double> at(std::uint64_t m) const {
    return {coeffs.data() + m * d, static_cast<std::size_t>(d)};
  }
  double norm2(std::uint64_t m) const {
    double s = 0.0;
    for (double v : at(m)) s += v * v;
    return s;
  }
};

namespace detail {
inline void butterfly(std::vector<double>& v, int bits, int d) {
  const std::size_t size = std::size_t{1} << bits;
  for (std::size_t half = 1; half < size; half <<= 1) {
    for (std::size_t base = 0; base < size; base += 2 * half) {
      for (std::size_t i = base; i < base + half; ++i) {
        double* a = v.data() + i * d;
        double* b = v.data() + (i + half) * d;
        for (int c = 0; c < d; ++c) {
          const double s = a[c] + b[c];
          const double t = a[c] - b[c];
          a[c] = s;
          b[c] = t;
        }
      }
    }
  }
}
}  // namespace detail

/// coeff(m) = 2^{-n^2} sum_x (-1)^{<m,x>} f(x).
inline WalshSpectrum wht_forward(const FunctionTable& f) {
  WalshSpectrum s{f.n(), f.d(), f.values()};
  const int bits = f.n() * f.n();
  detail::butterfly(s.coeffs, bits, f.d());
  const double scale = std::ldexp(1.0, -bits);
  for (double& v : s.coeffs) v *= scale;
  return s;
}

inline FunctionTable wht_inverse(const WalshSpectrum& s, const Caps& caps = Caps::global()) {
  FunctionTable f(s.n, s.d, s.coeffs, caps);
  detail::butterfly(f.values(), s.n * s.n, s.d);
  return f;
}

/// Per-mask counting quantities driving the spectral proof.
struct SpectralProfile {
  int n = 0;
  std::vector<int> row_sizes;           // |A_j|
  int odd_count = 0;                    // |{j : |A_j| odd}|
  std::int64_t selector_multiplier = 0; // n^n - prod_j (n - 2|A_j|)
  std::int64_t y_multiplier = 0;        // 2^n (n^n - prod_j (n - |A_j|))

  static SpectralProfile of(int n, std::uint64_t mask) {
    SpectralProfile p;
    p.n = n;
    p.row_sizes = row_profile(n, n, mask);
    std::int64_t nn = 1;
    std::int64_t sel = 1;
    std::int64_t avoid = 1;
    for (int a : p.row_sizes) {
      p.odd_count += (a & 1);
      nn *= n;
      sel *= (n - 2 * a);
      avoid *= (n - a);
    }
    p.selector_multiplier = nn - sel;
    p.y_multiplier = (std::int64_t{1} << n) * (nn - avoid);
    return p;
  }
};

// ---------------------------------------------------------------------------
// Translation energies. Every KS-type sum is sum_{t in T} sum_x
// ||f(x + t) - f(x)||_2^theta over a list of translations T.

inline std::vector<std::uint64_t> row_flip_masks(int n) {
  std::vector<std::uint64_t> out;
  for (int j = 0; j < n; ++j) out.push_back(row_mask(n, j));
  return out;
}

/// All n^n selector masks in mixed-radix order (k_0 varies fastest).
inline std::vector<std::uint64_t> selector_masks(int n) {
  std::vector<int> k(static_cast<std::size_t>(n), 0);
  std::vector<std::uint64_t> out;
  while (true) {
    out.push_back(selector_mask(n, k));
    int j = 0;
    while (j < n && ++k[j] == n) k[j++] = 0;
    if (j == n) break;
  }
  return out;
}

namespace detail {
inline double powered_norm(std::span<const double> a, std::span<const double> b, double theta) {
  if (a.size() == 1) {
    const double diff = std::abs(a[0] - b[0]);
    if (theta == 2.0) return diff * diff;
    if (theta == 1.0) return diff;
    return diff == 0.0 ? 0.0 : std::pow(diff, theta);
  }
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double diff = a[c] - b[c];
    s += diff * diff;
  }
  if (theta == 2.0) return s;
  return s == 0.0 ? 0.0 : std::pow(s, theta / 2.0);
}
}  // namespace detail

/// sum_{t} sum_x ||f(x+t) - f(x)||_2^theta with pairwise summation; the
/// per-translation totals are reduced in list order regardless of threads.
inline double translation_energy(const FunctionTable& f, std::span<const std::uint64_t> shifts,
                                 double theta, int threads = 1) {
  std::vector<double> per_shift(shifts.size(), 0.0);
  constexpr std::uint64_t block = CascadeSum::block_size();
  if (f.d() == 1 && f.points() % block == 0) {
    // Scalar fast path: same summation tree as the generic loop below.
    const double* v = f.values().data();
    auto run = [&](auto term) {
      parallel_chunks(shifts.size(), threads, [&](std::size_t i) {
        CascadeSum acc;
        const std::uint64_t t = shifts[i];
        for (std::uint64_t x0 = 0; x0 < f.points(); x0 += block) {
          double b = 0.0;
          for (std::uint64_t x = x0; x < x0 + block; ++x) b += term(std::abs(v[x ^ t] - v[x]));
          acc.add_block(b);
        }
        per_shift[i] = acc.total();
      });
    };
    if (theta == 1.0) run([](double d) { return d; });
    else if (theta == 2.0) run([](double d) { return d * d; });
    else run([theta](double d) { return d == 0.0 ? 0.0 : std::pow(d, theta); });
    return pairwise_sum(per_shift);
  }
  parallel_chunks(shifts.size(), threads, [&](std::size_t i) {
    CascadeSum acc;
    const std::uint64_t t = shifts[i];
    for (std::uint64_t x = 0; x < f.points(); ++x) {
      acc.add(detail::powered_norm(f.at(x ^ t), f.at(x), theta));
    }
    per_shift[i] = acc.total();
  });
  return pairwise_sum(per_shift);
}

/// Number of (t, x) with f(x + t) != f(x). Exact counterpart of
/// translation_energy for two-valued tables: energy = count * |a - b|^theta.
inline std::uint64_t translation_crossings(const FunctionTable& f,
                                           std::span<const std::uint64_t> shifts,
                                           int threads = 1) {
  std::vector<std::uint64_t> per_shift(shifts.size(), 0);
  parallel_chunks(shifts.size(), threads, [&](std::size_t i) {
    std::uint64_t c = 0;
    const std::uint64_t t = shifts[i];
    for (std::uint64_t x = 0; x < f.points(); ++x) {
      const auto a = f.at(x ^ t);
      const auto b = f.at(x);
      for (int k = 0; k < f.d(); ++k) {
        if (a[k] != b[k]) {
          ++c;
          break;
        }
      }
    }
    per_shift[i] = c;
  });
  std::uint64_t total = 0;
  for (auto c : per_shift) total += c;
  return total;
}

/// sum_j sum_x ||f(x + row_j) - f(x)||_2^2.
inline double row_flip_energy(const FunctionTable& f, int threads = 1) {
  auto masks = row_flip_masks(f.n());
  return translation_energy(f, masks, 2.0, threads);
}

/// sum_k sum_x ||f(x + selector_k) - f(x)||_2^2 over all n^n selectors.
inline double selector_energy(const FunctionTable& f, int threads = 1) {
  auto masks = selector_masks(f.n());
  return translation_energy(f, masks, 2.0, threads);
}

/// 2^{n^2+2} sum_m oddCount(m) ||coeff(m)||^2.
inline double row_flip_energy_spectral(const WalshSpectrum& s) {
  std::vector<double> terms(s.coeffs.size() / s.d);
  for (std::uint64_t m = 0; m < terms.size(); ++m) {
    terms[m] = SpectralProfile::of(s.n, m).odd_count * s.norm2(m);
  }
  return std::ldexp(pairwise_sum(terms), s.n * s.n + 2);
}

/// 2^{n^2+1} sum_m selectorMultiplier(m) ||coeff(m)||^2.
inline double selector_energy_spectral(const WalshSpectrum& s) {
  std::vector<double> terms(s.coeffs.size() / s.d);
  for (std::uint64_t m = 0; m < terms.size(); ++m) {
    terms[m] = static_cast<double>(SpectralProfile::of(s.n, m).selector_multiplier) * s.norm2(m);
  }
  return std::ldexp(pairwise_sum(terms), s.n * s.n + 1);
}

/// 2^{n^2+1} sum_m yMultiplier(m) ||coeff(m)||^2: the spectral form of
/// sum_k sum_x sum_{y in F_2^n} ||f(x + sum_j y_j e_{j k_j}) - f(x)||^2.
inline double y_selector_energy_spectral(const WalshSpectrum& s) {
  std::vector<double> terms(s.coeffs.size() / s.d);
  for (std::uint64_t m = 0; m < terms.size(); ++m) {
    terms[m] = static_cast<double>(SpectralProfile::of(s.n, m).y_multiplier) * s.norm2(m);
  }
  return std::ldexp(pairwise_sum(terms), s.n * s.n + 1);
}

/// Parseval: sum_m ||coeff(m)||^2 versus 2^{-n^2} sum_x ||f(x)||^2.
inline double parseval_relative_error(const FunctionTable& f, const WalshSpectrum& s) {
  std::vector<double> lhs(s.coeffs.size() / s.d);
  for (std::uint64_t m = 0; m < lhs.size(); ++m) lhs[m] = s.norm2(m);
  std::vector<double> rhs(f.values().size());
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = f.values()[i] * f.values()[i];
  const double a = pairwise_sum(lhs);
  const double b = std::ldexp(pairwise_sum(rhs), -f.n() * f.n());
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// ---------------------------------------------------------------------------
// Even-n counting bound: selectorMultiplier(m) >= (n^n - (n-2)^n)/n * oddCount(m).

struct CountingBoundReport {
  int n = 0;
  bool holds = true;
  std::uint64_t checked = 0;
  Rational min_slack;
  std::uint64_t argmin = 0;
  /// Every mask (or size profile, in profile mode) with zero slack, capped.
  std::vector<std::uint64_t> zero_slack;
  std::uint64_t zero_slack_count = 0;
};

inline Rational counting_slack(const SpectralProfile& p) {
  const BigInt n(p.n);
  const BigInt k = ipow(n, p.n) - ipow(n - 2, p.n);
  return Rational(BigInt(p.selector_multiplier)) - Rational(k * p.odd_count, n);
}

/// Verifies the bound for every mask of M_n(F_2) (n even, n <= 4 by default).
inline CountingBoundReport even_n_counting_bound(int n, std::size_t keep_zero = 1u << 16) {
  if (n % 2 != 0) throw DomainError("even_n_counting_bound requires even n");
  check_side(n);
  if (n * n > 32) throw SizeLimitError("mask enumeration limited to n <= 4; use the profile mode");
  CountingBoundReport r;
  r.n = n;
  const std::uint64_t total = std::uint64_t{1} << (n * n);
  bool first = true;
  for (std::uint64_t m = 0; m < total; ++m) {
    const auto prof = SpectralProfile::of(n, m);
    const Rational slack = counting_slack(prof);
    ++r.checked;
    if (slack < 0) r.holds = false;
    if (first || slack < r.min_slack) {
      r.min_slack = slack;
      r.argmin = m;
      first = false;
    }
    if (slack == 0) {
      ++r.zero_slack_count;
      if (r.zero_slack.size() < keep_zero) r.zero_slack.push_back(m);
    }
  }
  return r;
}

/// Same bound checked over all (n+1)^n row-size profiles (|A_1|, ..., |A_n|),
/// which determine both sides; reaches even n up to 8 without mask streaming.
/// zero_slack holds profile codes in base n+1 (row 0 least significant).
inline CountingBoundReport even_n_counting_bound_profiles(int n) {
  if (n % 2 != 0) throw DomainError("even_n_counting_bound requires even n");
  check_side(n);
  CountingBoundReport r;
  r.n = n;
  std::vector<int> sizes(static_cast<std::size_t>(n), 0);
  // n <= 8: n^n < 2^25, so n * slack = n (n^n - prod) - k odd fits in 64 bits.
  std::int64_t nn = 1, nm2 = 1;
  for (int i = 0; i < n; ++i) {
    nn *= n;
    nm2 *= n - 2;
  }
  const std::int64_t k = nn - nm2;
  bool first = true;
  std::int64_t best = 0;  // n * min slack
  std::uint64_t code = 0;
  while (true) {
    std::int64_t prod = 1;
    int odd = 0;
    for (int a : sizes) {
      prod *= (n - 2 * a);
      odd += (a & 1);
    }
    const std::int64_t scaled = n * (nn - prod) - k * odd;
    ++r.checked;
    if (scaled < 0) r.holds = false;
    if (first || scaled < best) {
      best = scaled;
      r.argmin = code;
      first = false;
    }
    if (scaled == 0) {
      ++r.zero_slack_count;
      r.zero_slack.push_back(code);
    }
    int j = 0;
    while (j < n && ++sizes[j] == n + 1) sizes[j++] = 0;
    if (j == n) break;
    ++code;
  }
  r.min_slack = Rational(best, n);
  return r;
}

}  // namespace kscube
