#pragma once

// Two-phase tableau simplex. The program is solved through its dual, which
// has one row per primal column and so stays small when the primal has many
// more constraints than variables. Primal values are read back from the
// dual's simplex multipliers.
//
// Exact solves can start from a basis found in double precision; the exact
// phase then re-factors that basis in rationals and finishes with Bland's
// least-index rule, so the reported optimum is always certified exactly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "sinkmech/errors.hpp"
#include "sinkmech/lp/linear_program.hpp"
#include "sinkmech/scalar.hpp"

namespace sinkmech::lp {

enum class Status { Optimal, Infeasible, Unbounded };

inline const char* status_name(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
  }
  return "unknown";
}

template <Scalar T>
struct Solution {
  Status status = Status::Optimal;
  T objective;
  std::vector<T> x;      // one entry per column
  std::vector<T> duals;  // one entry per row; b^T duals equals objective
  std::uint64_t iterations = 0;
};

enum class PivotRule { Bland, Dantzig };

struct SimplexOptions {
  std::uint64_t max_iterations = 20'000'000;
  /// Seed the final pass with the basis of a perturbed double-precision solve.
  bool float_warm_start = true;
  /// Rule for the seeding pass and for the final pass in double mode; the
  /// exact final pass is always Bland.
  PivotRule warm_start_rule = PivotRule::Dantzig;
};

/// Same program with every coefficient converted to double.
template <Scalar T>
LinearProgram<double> to_float(const LinearProgram<T>& lp) {
  LinearProgram<double> out;
  for (const auto& c : lp.columns()) out.add_column(c.name, c.bound, to_double(c.cost));
  for (const auto& r : lp.rows()) {
    Row<double> row{r.name, r.kind, {}, r.sense, to_double(r.rhs)};
    for (const auto& [col, coef] : r.terms) row.terms.emplace_back(col, to_double(coef));
    out.add_row(std::move(row));
  }
  return out;
}

namespace detail {

/// Dense tableau for  min c^T z  s.t.  A z = b (b >= 0), z >= 0.
template <Scalar T>
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : m_(rows), n_(cols), a_(rows, std::vector<T>(cols + 1, T(0))) {}

  T& at(std::size_t r, std::size_t c) { return a_[r][c]; }
  const T& at(std::size_t r, std::size_t c) const { return a_[r][c]; }
  T& rhs(std::size_t r) { return a_[r][n_]; }
  const T& rhs(std::size_t r) const { return a_[r][n_]; }
  std::vector<std::size_t>& basis() { return basis_; }
  const std::vector<std::size_t>& basis() const { return basis_; }
  const std::vector<T>& reduced_costs() const { return obj_; }
  std::size_t rows() const { return m_; }
  std::size_t cols() const { return n_; }

  /// Installs cost vector `c` and prices out the current basis.
  void set_costs(const std::vector<T>& c) {
    obj_.assign(n_ + 1, T(0));
    for (std::size_t j = 0; j < n_; ++j) obj_[j] = c[j];
    for (std::size_t r = 0; r < m_; ++r) {
      const T cb = c[basis_[r]];
      if (cb == T(0)) continue;
      for (std::size_t j = 0; j <= n_; ++j) {
        if (a_[r][j] != T(0)) obj_[j] -= cb * a_[r][j];
      }
    }
  }

  T value() const { return T(-obj_[n_]); }

  void pivot(std::size_t r, std::size_t e) {
    auto& prow = a_[r];
    const T piv = prow[e];
    std::vector<std::size_t> nz;
    for (std::size_t j = 0; j <= n_; ++j) {
      if (prow[j] != T(0)) {
        prow[j] /= piv;
        nz.push_back(j);
      }
    }
    prow[e] = T(1);
    for (std::size_t i = 0; i < m_; ++i) {
      if (i != r) eliminate(a_[i], prow, nz, e);
    }
    if (!obj_.empty()) eliminate(obj_, prow, nz, e);
    basis_[r] = e;
  }

  /// One pivot restricted to `allowed` columns. Returns false at optimality;
  /// sets `unbounded` when the entering column has no pivot.
  bool step(const std::vector<char>& allowed, PivotRule rule, bool& unbounded) {
    std::optional<std::size_t> entering;
    for (std::size_t j = 0; j < n_; ++j) {
      if (!allowed[j] || !is_negative(obj_[j])) continue;
      if (!entering || (rule == PivotRule::Dantzig && obj_[j] < obj_[*entering])) entering = j;
      if (rule == PivotRule::Bland) break;
    }
    if (!entering) return false;
    const std::size_t e = *entering;
    std::optional<std::size_t> leave;
    T best_ratio;
    if constexpr (ScalarTraits<T>::exact) {
      for (std::size_t r = 0; r < m_; ++r) {
        if (!(a_[r][e] > T(0))) continue;
        T ratio = a_[r][n_] / a_[r][e];
        if (!leave || ratio < best_ratio || (ratio == best_ratio && basis_[r] < basis_[*leave])) {
          leave = r;
          best_ratio = std::move(ratio);
        }
      }
    } else {
      // Harris ratio test: among rows within a small primal tolerance of the
      // minimum ratio, pivot on the largest entry.
      constexpr double pivot_tol = 1e-9;
      constexpr double primal_tol = 1e-9;
      double bound = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < m_; ++r) {
        if (a_[r][e] > pivot_tol) bound = std::min(bound, (std::max(a_[r][n_], 0.0) + primal_tol) / a_[r][e]);
      }
      for (std::size_t r = 0; r < m_; ++r) {
        if (!(a_[r][e] > pivot_tol)) continue;
        const double ratio = std::max(a_[r][n_], 0.0) / a_[r][e];
        if (ratio > bound) continue;
        if (!leave || a_[r][e] > a_[*leave][e]) {
          leave = r;
          best_ratio = ratio;
        }
      }
    }
    if (!leave) {
      unbounded = true;
      return false;
    }
    last_degenerate_ = is_zero(best_ratio);
    pivot(*leave, e);
    return true;
  }

  bool last_degenerate() const { return last_degenerate_; }

 private:
  static void eliminate(std::vector<T>& row, const std::vector<T>& prow, const std::vector<std::size_t>& nz,
                        std::size_t e) {
    if (row[e] == T(0)) return;
    const T factor = row[e];
    for (std::size_t j : nz) {
      row[j] -= factor * prow[j];
      if constexpr (!ScalarTraits<T>::exact) {
        if (std::abs(row[j]) < 1e-11) row[j] = 0.0;
      }
    }
    row[e] = T(0);
  }

  std::size_t m_;
  std::size_t n_;
  std::vector<std::vector<T>> a_;
  std::vector<T> obj_;
  std::vector<std::size_t> basis_;
  bool last_degenerate_ = false;
};

struct DualColumn {
  std::size_t primal_row;
  int sign;  // y_r = sign * z
};

/// Standard form of the dual
///   max b^T y  s.t.  A^T y <= c (nonnegative columns), = c (free columns),
///   y >= 0 on >= rows, y <= 0 on <= rows, y free on = rows,
/// as  min -b^T y  with every dual row scaled so its right side is >= 0 and
/// given an identity column (its slack where possible, else an artificial).
template <Scalar T>
struct DualForm {
  std::vector<DualColumn> ycols;
  std::vector<int> flip;
  std::vector<std::size_t> identity;
  std::vector<char> artificial;
  std::vector<T> phase1;
  std::vector<T> phase2;
  Tableau<T> tab;
};

template <Scalar T>
DualForm<T> make_dual_form(const LinearProgram<T>& lp, const std::vector<T>& cost) {
  const auto& cols = lp.columns();
  const auto& rows = lp.rows();
  const std::size_t m = cols.size();
  std::vector<DualColumn> ycols;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    switch (rows[r].sense) {
      case Sense::GreaterEqual: ycols.push_back({r, +1}); break;
      case Sense::LessEqual: ycols.push_back({r, -1}); break;
      case Sense::Equal:
        ycols.push_back({r, +1});
        ycols.push_back({r, -1});
        break;
    }
  }
  std::vector<int> flip(m, 1);
  for (std::size_t j = 0; j < m; ++j) {
    if (cost[j] < T(0)) flip[j] = -1;
  }
  const std::size_t ny = ycols.size();
  std::vector<std::optional<std::size_t>> slack(m);
  std::vector<std::size_t> identity(m);
  std::size_t next = ny;
  for (std::size_t j = 0; j < m; ++j) {
    if (cols[j].bound == Bound::NonNegative) slack[j] = next++;
  }
  for (std::size_t j = 0; j < m; ++j) identity[j] = slack[j] && flip[j] == 1 ? *slack[j] : next++;
  const std::size_t n = next;
  std::vector<char> artificial(n, 0);
  for (std::size_t j = 0; j < m; ++j) {
    if (identity[j] != slack[j]) artificial[identity[j]] = 1;
  }

  Tableau<T> tab(m, n);
  std::vector<T> phase2(n, T(0));
  for (std::size_t k = 0; k < ny; ++k) {
    const auto& row = rows[ycols[k].primal_row];
    for (const auto& [col, coef] : row.terms) tab.at(col, k) = ycols[k].sign * flip[col] > 0 ? coef : T(-coef);
    phase2[k] = ycols[k].sign > 0 ? T(-row.rhs) : row.rhs;
  }
  for (std::size_t j = 0; j < m; ++j) {
    if (slack[j]) tab.at(j, *slack[j]) = T(flip[j]);
    if (artificial[identity[j]]) tab.at(j, identity[j]) = T(1);
    tab.rhs(j) = flip[j] > 0 ? cost[j] : T(-cost[j]);
  }
  tab.basis() = identity;
  std::vector<T> phase1(n, T(0));
  for (std::size_t k = 0; k < n; ++k) {
    if (artificial[k]) phase1[k] = T(1);
  }
  return DualForm<T>{std::move(ycols), std::move(flip), std::move(identity), std::move(artificial),
                     std::move(phase1), std::move(phase2), std::move(tab)};
}

/// Pivots basic artificials (at level zero) out wherever a nonzero
/// non-artificial entry exists in their row.
template <Scalar T>
void drive_out_artificials(DualForm<T>& form) {
  auto& tab = form.tab;
  for (std::size_t r = 0; r < tab.rows(); ++r) {
    if (!form.artificial[tab.basis()[r]]) continue;
    for (std::size_t k = 0; k < tab.cols(); ++k) {
      if (!form.artificial[k] && !is_zero(tab.at(r, k))) {
        tab.pivot(r, k);
        break;
      }
    }
  }
}

/// Re-factors the tableau around `target` columns. Returns false when the
/// resulting basic solution is not feasible for the original dual.
template <Scalar T>
bool install_basis(DualForm<T>& form, const std::vector<std::size_t>& target) {
  auto& tab = form.tab;
  std::vector<char> fixed(tab.rows(), 0);
  for (std::size_t e : target) {
    std::optional<std::size_t> row;
    for (std::size_t r = 0; r < tab.rows(); ++r) {
      if (fixed[r]) continue;
      if (tab.basis()[r] == e) {
        row = r;
        break;
      }
      if (!row && !is_zero(tab.at(r, e))) row = r;
    }
    if (!row) continue;
    if (tab.basis()[*row] != e) tab.pivot(*row, e);
    fixed[*row] = 1;
  }
  for (std::size_t r = 0; r < tab.rows(); ++r) {
    if (is_negative(tab.rhs(r))) return false;
    if (form.artificial[tab.basis()[r]] && !is_zero(tab.rhs(r))) return false;
  }
  return true;
}

template <Scalar T>
struct DualRun {
  Solution<T> solution;
  std::vector<std::size_t> basis;
};

template <Scalar T>
DualRun<T> solve_via_dual(const LinearProgram<T>& lp, const std::vector<T>& cost, const SimplexOptions& options,
                          PivotRule rule, const std::vector<std::size_t>* warm = nullptr) {
  auto form = make_dual_form(lp, cost);
  auto& tab = form.tab;
  const std::size_t n = tab.cols();
  DualRun<T> out;
  auto& sol = out.solution;
  std::uint64_t iterations = 0;
  auto run = [&](const std::vector<char>& allowed) {
    bool unbounded = false;
    std::size_t degenerate_streak = 0;
    PivotRule current = rule;
    while (tab.step(allowed, current, unbounded)) {
      if (++iterations > options.max_iterations) {
        throw ResourceError("simplex exceeded " + std::to_string(options.max_iterations) + " iterations");
      }
      // Dantzig can cycle on degenerate vertices; fall back to Bland.
      degenerate_streak = tab.last_degenerate() ? degenerate_streak + 1 : 0;
      if (degenerate_streak > 50) current = PivotRule::Bland;
    }
    return unbounded;
  };

  const bool warmed = warm && install_basis(form, *warm);
  if (!warmed) {
    if (warm) form = make_dual_form(lp, cost);
    bool needs_phase1 = false;
    for (char a : form.artificial) needs_phase1 = needs_phase1 || a;
    if (needs_phase1) {
      tab.set_costs(form.phase1);
      run(std::vector<char>(n, 1));
      if (is_positive(tab.value())) {
        sol.status = Status::Unbounded;  // dual infeasible; refined by the caller
        sol.iterations = iterations;
        return out;
      }
    }
  }
  drive_out_artificials(form);
  std::vector<char> allowed(n);
  for (std::size_t k = 0; k < n; ++k) allowed[k] = !form.artificial[k];
  tab.set_costs(form.phase2);
  if (run(allowed)) {
    sol.status = Status::Infeasible;  // dual unbounded
    sol.iterations = iterations;
    return out;
  }

  const std::size_t m = tab.rows();
  std::vector<T> z(n, T(0));
  for (std::size_t r = 0; r < m; ++r) z[tab.basis()[r]] = tab.rhs(r);
  sol.duals.assign(lp.row_count(), T(0));
  for (std::size_t k = 0; k < form.ycols.size(); ++k) {
    sol.duals[form.ycols[k].primal_row] += form.ycols[k].sign > 0 ? z[k] : T(-z[k]);
  }
  // x_j = -(multiplier of dual row j) = flip_j * reduced cost of its identity column.
  const auto& rc = tab.reduced_costs();
  sol.x.resize(m);
  for (std::size_t j = 0; j < m; ++j) sol.x[j] = form.flip[j] > 0 ? rc[form.identity[j]] : T(-rc[form.identity[j]]);
  sol.objective = T(-tab.value());
  sol.iterations = iterations;
  sol.status = Status::Optimal;
  out.basis = tab.basis();
  return out;
}

template <Scalar T>
Solution<T> solve_with_cost(const LinearProgram<T>& lp, const std::vector<T>& cost, const SimplexOptions& options) {
  std::vector<std::size_t> warm;
  bool have_warm = false;
  std::uint64_t warm_iterations = 0;
  if (options.float_warm_start) {
    const auto approx = to_float(lp);
    std::vector<double> approx_cost;
    // Loosened inequality right-hand sides remove the degeneracy that
    // makes floating-point pivoting stall; the final pass uses the true values.
    for (std::size_t j = 0; j < cost.size(); ++j) {
      const double c = to_double(cost[j]);
      const double shift = 1e-7 * (1.0 + static_cast<double>((j * 7919) % 1000) / 1000.0);
      const bool inequality = lp.columns()[j].bound == Bound::NonNegative;
      approx_cost.push_back(inequality ? c + shift : c);
    }
    try {
      auto seed = solve_via_dual(approx, approx_cost, options, options.warm_start_rule);
      warm_iterations = seed.solution.iterations;
      if (seed.solution.status == Status::Optimal) {
        warm = std::move(seed.basis);
        have_warm = true;
      }
    } catch (const ResourceError&) {
      // fall through to a cold start
    }
  }
  const PivotRule finish = ScalarTraits<T>::exact ? PivotRule::Bland : options.warm_start_rule;
  auto run = solve_via_dual(lp, cost, options, finish, have_warm ? &warm : nullptr);
  run.solution.iterations += warm_iterations;
  return std::move(run.solution);
}

}  // namespace detail

/// Minimizes the program. Infeasible and unbounded programs are reported
/// through `status`; `x`, `duals`, and `objective` are set only when optimal.
template <Scalar T>
Solution<T> solve_lp(const LinearProgram<T>& lp, SimplexOptions options = {}) {
  std::vector<T> cost;
  cost.reserve(lp.column_count());
  for (const auto& c : lp.columns()) cost.push_back(c.cost);
  auto sol = detail::solve_with_cost(lp, cost, options);
  if (sol.status == Status::Unbounded) {
    // An infeasible dual means the primal is unbounded or infeasible; the
    // zero-cost dual is always feasible and is unbounded iff the primal is infeasible.
    auto probe = detail::solve_with_cost(lp, std::vector<T>(cost.size(), T(0)), options);
    sol.iterations += probe.iterations;
    if (probe.status == Status::Infeasible) sol.status = Status::Infeasible;
  }
  return sol;
}

}  // namespace sinkmech::lp
