#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kscube/errors.hpp"
#include "kscube/rational.hpp"

namespace kscube::lp {

/// Column-oriented LP in standard form: minimize c^T x s.t. A x = b, x >= 0.
/// Columns are produced on demand so that exponentially wide cut LPs never
/// materialize A.
template <class T>
class Problem {
 public:
  virtual ~Problem() = default;
  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;
  virtual const std::vector<T>& rhs() const = 0;
  virtual T cost(std::size_t j) const = 0;
  /// Dense column j into `out` (resized to rows()).
  virtual void column(std::size_t j, std::vector<T>& out) const = 0;

  /// out[j] = c_j - y^T a_j for every column. Override when the column
  /// structure admits a faster sweep.
  virtual void price(std::span<const T> y, std::vector<T>& out) const {
    out.resize(cols());
    std::vector<T> a;
    for (std::size_t j = 0; j < cols(); ++j) {
      column(j, a);
      T s = cost(j);
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != 0) s -= y[i] * a[i];
      }
      out[j] = s;
    }
  }
};

enum class Status { optimal, infeasible, unbounded, iteration_limit };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::iteration_limit: return "iteration_limit";
  }
  return "?";
}

template <class T>
struct Result {
  Status status = Status::iteration_limit;
  T objective{};
  std::vector<T> x;       // primal values, one per column
  std::vector<T> y;       // duals: A^T y <= c at optimality, b^T y = objective
  std::vector<T> farkas;  // infeasible: A^T f <= 0 and b^T f > 0
  T phase1_residual{};
  std::size_t iterations = 0;
};

struct Options {
  std::size_t max_iterations = 500000;
  double optimality_tol = 1e-10;   // float mode, relative to cost scale
  double pivot_tol = 1e-11;        // float mode
  double feasibility_tol = 1e-9;   // float mode phase-1 acceptance
  std::size_t refactor_every = 64; // float mode
  std::size_t degenerate_streak_for_bland = 2000;
};

namespace detail {
template <class T>
constexpr bool is_exact() {
  return !std::is_floating_point_v<T>;
}
}  // namespace detail

/// Revised simplex with an explicit basis inverse and a two-phase start from
/// artificial columns. Exact scalars use Bland's rule throughout, so the
/// method terminates without cycling. Floating point uses Dantzig pricing,
/// switches to Bland's rule on long degenerate streaks, refactors the basis
/// periodically and re-verifies optimality after a fresh refactorization.
template <class T>
class RevisedSimplex {
 public:
  explicit RevisedSimplex(const Problem<T>& problem, Options options = {})
      : prob_(problem), opt_(options), m_(problem.rows()), n_(problem.cols()) {}

  Result<T> solve() {
    init();
    Result<T> res;
    // Phase 1.
    phase_ = 1;
    Status st = run(res.iterations);
    if (st == Status::iteration_limit) {
      res.status = st;
      return res;
    }
    T infeas = 0;
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] >= n_) infeas += xb_[i];
    res.phase1_residual = infeas;
    if (phase1_infeasible(infeas)) {
      res.status = Status::infeasible;
      res.farkas = duals();
      return res;
    }
    // Phase 2.
    phase_ = 2;
    st = run(res.iterations);
    res.status = st;
    if (st != Status::optimal) return res;
    res.x.assign(n_, T(0));
    res.objective = 0;
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) {
        res.x[basis_[i]] = xb_[i];
        res.objective += prob_.cost(basis_[i]) * xb_[i];
      }
    }
    res.y = duals();
    return res;
  }

 private:
  static constexpr bool kExact = detail::is_exact<T>();

  void init() {
    b_ = prob_.rhs();
    if (b_.size() != m_) throw DimensionMismatch("rhs length differs from row count");
    sign_.assign(m_, 1);
    for (std::size_t i = 0; i < m_; ++i) {
      if (b_[i] < 0) {
        sign_[i] = -1;
        b_[i] = -b_[i];
      }
    }
    basis_.resize(m_);
    in_basis_.assign(n_ + m_, false);
    binv_.assign(m_ * m_, T(0));
    // Crash basis: a column that is +e_i in the sign-normalized rows covers
    // row i at level b_i >= 0; remaining rows start on artificials.
    std::vector<std::size_t> cover(m_, n_);
    std::vector<T> col;
    for (std::size_t j = 0; j < n_; ++j) {
      prob_.column(j, col);
      std::size_t hit = m_;
      bool unit = true;
      for (std::size_t i = 0; i < m_ && unit; ++i) {
        if (col[i] == 0) continue;
        if (hit != m_ || col[i] != T(sign_[i])) unit = false;
        hit = i;
      }
      if (unit && hit != m_ && cover[hit] == n_) cover[hit] = j;
    }
    for (std::size_t i = 0; i < m_; ++i) {
      basis_[i] = cover[i] < n_ ? cover[i] : n_ + i;
      in_basis_[basis_[i]] = true;
      binv_[i * m_ + i] = 1;
    }
    xb_ = b_;
    cost_scale_ = 1.0;
    if constexpr (!kExact) {
      for (std::size_t j = 0; j < n_; ++j) cost_scale_ = std::max(cost_scale_, std::abs(prob_.cost(j)));
    }
  }

  bool phase1_infeasible(const T& infeas) const {
    if constexpr (kExact) {
      return infeas > 0;
    } else {
      double bscale = 1.0;
      for (const auto& v : b_) bscale = std::max(bscale, std::abs(v));
      return infeas > opt_.feasibility_tol * bscale;
    }
  }

  T phase_cost(std::size_t j) const {
    if (j >= n_) return phase_ == 1 ? T(1) : T(0);
    return phase_ == 1 ? T(0) : prob_.cost(j);
  }

  /// Column j in the sign-normalized row space.
  void signed_column(std::size_t j, std::vector<T>& out) const {
    if (j >= n_) {
      out.assign(m_, T(0));
      out[j - n_] = 1;
      return;
    }
    prob_.column(j, out);
    for (std::size_t i = 0; i < m_; ++i)
      if (sign_[i] < 0) out[i] = -out[i];
  }

  /// Duals in the original row orientation.
  std::vector<T> duals() const {
    std::vector<T> y(m_, T(0));
    for (std::size_t i = 0; i < m_; ++i) {
      const T cb = phase_cost(basis_[i]);
      if (cb == 0) continue;
      for (std::size_t k = 0; k < m_; ++k) y[k] += cb * binv_[i * m_ + k];
    }
    for (std::size_t k = 0; k < m_; ++k)
      if (sign_[k] < 0) y[k] = -y[k];
    return y;
  }

  bool negative(const T& r) const {
    if constexpr (kExact) {
      return r < 0;
    } else {
      return r < -opt_.optimality_tol * cost_scale_;
    }
  }

  void refactor() {
    if constexpr (!kExact) {
      Eigen::MatrixXd B(m_, m_);
      std::vector<T> col;
      for (std::size_t i = 0; i < m_; ++i) {
        signed_column(basis_[i], col);
        for (std::size_t r = 0; r < m_; ++r) B(r, i) = col[r];
      }
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
      if (!(lu.rcond() > 1e-13)) throw NumericalError("simplex basis became numerically singular");
      Eigen::MatrixXd inv = lu.inverse();
      for (std::size_t r = 0; r < m_; ++r)
        for (std::size_t c = 0; c < m_; ++c) binv_[r * m_ + c] = inv(r, c);
      for (std::size_t r = 0; r < m_; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < m_; ++c) s += binv_[r * m_ + c] * b_[c];
        xb_[r] = s < 0.0 && s > -1e-9 ? 0.0 : s;
      }
    }
  }

  Status run(std::size_t& iterations) {
    std::vector<T> reduced, col, u(m_);
    std::size_t degenerate_streak = 0;
    std::size_t since_refactor = 0;
    int verify_rounds = 0;
    while (true) {
      if (iterations >= opt_.max_iterations) return Status::iteration_limit;
      // Pricing.
      std::vector<T> y = duals();
      if (phase_ == 1) {
        prob_.price(y, reduced);
        for (std::size_t j = 0; j < n_; ++j) reduced[j] -= prob_.cost(j);
      } else {
        prob_.price(y, reduced);
      }
      const bool bland = kExact || degenerate_streak >= opt_.degenerate_streak_for_bland;
      std::size_t enter = n_;
      T best = 0;
      for (std::size_t j = 0; j < n_; ++j) {
        if (in_basis_[j] || !negative(reduced[j])) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (enter == n_ || reduced[j] < best) {
          enter = j;
          best = reduced[j];
        }
      }
      if (enter == n_) {
        if constexpr (!kExact) {
          // Re-verify against a fresh factorization before declaring optimal.
          if (verify_rounds++ < 3 && since_refactor > 0) {
            refactor();
            since_refactor = 0;
            continue;
          }
        }
        return Status::optimal;
      }
      verify_rounds = 0;

      // Direction u = B^{-1} a_enter.
      signed_column(enter, col);
      for (std::size_t i = 0; i < m_; ++i) {
        T s = 0;
        const T* row = &binv_[i * m_];
        for (std::size_t k = 0; k < m_; ++k)
          if (col[k] != 0) s += row[k] * col[k];
        u[i] = s;
      }

      // Ratio test. In phase 2, artificials still basic at level zero leave
      // whenever the entering column touches their row.
      std::size_t leave = m_;
      T best_ratio = 0;
      if constexpr (kExact) {
        for (std::size_t i = 0; i < m_; ++i) {
          T ratio;
          if (phase_ == 2 && basis_[i] >= n_ && u[i] != 0) {
            ratio = 0;
          } else if (u[i] > 0) {
            ratio = xb_[i] / u[i];
          } else {
            continue;
          }
          if (leave == m_ || ratio < best_ratio ||
              (ratio == best_ratio && basis_[i] < basis_[leave])) {
            leave = i;
            best_ratio = ratio;
          }
        }
      } else {
        // Harris two-pass test: relax the bounds by the feasibility tolerance,
        // then take the largest pivot among rows within the relaxed step.
        double umax = 0.0;
        for (std::size_t i = 0; i < m_; ++i) umax = std::max(umax, std::abs(u[i]));
        const double ptol = std::max(opt_.pivot_tol, 1e-9 * umax);
        for (std::size_t i = 0; i < m_; ++i) {
          if (phase_ == 2 && basis_[i] >= n_ && std::abs(u[i]) > ptol) {
            if (leave == m_ || best_ratio > 0.0 || std::abs(u[i]) > std::abs(u[leave])) {
              leave = i;
              best_ratio = 0.0;
            }
          }
        }
        if (leave == m_) {
          double relaxed = std::numeric_limits<double>::infinity();
          for (std::size_t i = 0; i < m_; ++i)
            if (u[i] > ptol) relaxed = std::min(relaxed, (std::max(xb_[i], 0.0) + opt_.feasibility_tol) / u[i]);
          double best_pivot = 0.0;
          for (std::size_t i = 0; i < m_; ++i) {
            if (u[i] <= ptol) continue;
            const double ratio = std::max(xb_[i], 0.0) / u[i];
            if (ratio <= relaxed && u[i] > best_pivot) {
              best_pivot = u[i];
              leave = i;
              best_ratio = ratio;
            }
          }
        }
      }
      if (leave == m_) return Status::unbounded;

      // Pivot.
      const T piv = u[leave];
      T* prow = &binv_[leave * m_];
      for (std::size_t k = 0; k < m_; ++k) prow[k] /= piv;
      for (std::size_t i = 0; i < m_; ++i) {
        if (i == leave || is_zero(u[i])) continue;
        const T f = u[i];
        T* row = &binv_[i * m_];
        for (std::size_t k = 0; k < m_; ++k)
          if (prow[k] != 0) row[k] -= f * prow[k];
      }
      for (std::size_t i = 0; i < m_; ++i) {
        if (i == leave) continue;
        xb_[i] -= best_ratio * u[i];
        if constexpr (!kExact) {
          if (xb_[i] < 0.0 && xb_[i] > -1e-9) xb_[i] = 0.0;
        }
      }
      xb_[leave] = best_ratio;
      in_basis_[basis_[leave]] = false;
      basis_[leave] = enter;
      in_basis_[enter] = true;
      ++iterations;
      if (is_zero(best_ratio)) {
        ++degenerate_streak;
      } else {
        degenerate_streak = 0;
      }
      if constexpr (!kExact) {
        if (++since_refactor >= opt_.refactor_every) {
          refactor();
          since_refactor = 0;
        }
      }
    }
  }

  bool is_zero(const T& v) const {
    if constexpr (kExact) {
      return v == 0;
    } else {
      return std::abs(v) <= opt_.pivot_tol;
    }
  }

  const Problem<T>& prob_;
  Options opt_;
  std::size_t m_, n_;
  int phase_ = 1;
  std::vector<T> b_;
  std::vector<int> sign_;
  std::vector<std::size_t> basis_;
  std::vector<bool> in_basis_;
  std::vector<T> binv_;
  std::vector<T> xb_;
  double cost_scale_ = 1.0;
};

template <class T>
Result<T> solve(const Problem<T>& problem, Options options = {}) {
  return RevisedSimplex<T>(problem, options).solve();
}

}  // namespace kscube::lp
