#pragma once

// Optimal deterministic mechanism on the smallest grid by exhaustive search:
// every 0/1 allocation function is ranked by worst-case welfare loss, and the
// first one (lowest loss, then lowest code) admitting strategyproof,
// budget-balanced payments wins.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "sinkmech/core.hpp"
#include "sinkmech/grid.hpp"
#include "sinkmech/lp/linear_program.hpp"
#include "sinkmech/lp/simplex.hpp"

namespace sinkmech::amd {

/// Chosen alternative at every grid profile, indexed by full profile index.
using AllocationTable = std::vector<std::size_t>;

/// Feasibility LP in the payments p_i(v) (free) for a fixed allocation:
///   v_i(f(v)) - p_i(v) >= v_i(f(v')) - p_i(v')   and   sum_i p_i(v) = 0.
template <Scalar T>
lp::LinearProgram<T> payment_feasibility_lp(const Grid<T>& grid, const AllocationTable& allocation) {
  if (allocation.size() != grid.profile_count()) throw ArgumentError("allocation table has the wrong length");
  const std::size_t n = grid.agents();
  lp::LinearProgram<T> lp;
  for (std::uint64_t v = 0; v < grid.profile_count(); ++v) {
    for (std::size_t i = 0; i < n; ++i) {
      lp.add_column("p" + std::to_string(i + 1) + "_v" + std::to_string(v), lp::Bound::Free);
    }
  }
  std::vector<std::vector<T>> rows(grid.row_count());
  for (std::uint64_t r = 0; r < grid.row_count(); ++r) rows[r] = grid.row_values(r);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint64_t v = 0; v < grid.profile_count(); ++v) {
      auto digits = grid.row_indices(v);
      const auto& truth = rows[digits[i]];
      const std::uint64_t own = digits[i];
      for (std::uint64_t r = 0; r < grid.row_count(); ++r) {
        if (r == own) continue;
        digits[i] = r;
        const std::uint64_t w = grid.compose(digits);
        digits[i] = own;
        lp::Row<T> row{"sp" + std::to_string(i + 1) + "_v" + std::to_string(v) + "_w" + std::to_string(w),
                       lp::RowKind::StrategyProof,
                       {{v * n + i, T(-1)}, {w * n + i, T(1)}},
                       lp::Sense::GreaterEqual,
                       T(truth[allocation[w]] - truth[allocation[v]])};
        lp.add_row(std::move(row));
      }
    }
  }
  for (std::uint64_t v = 0; v < grid.profile_count(); ++v) {
    lp::Row<T> row{"bb_v" + std::to_string(v), lp::RowKind::BudgetBalance, {}, lp::Sense::Equal, T(0)};
    for (std::size_t i = 0; i < n; ++i) row.terms.emplace_back(v * n + i, T(1));
    lp.add_row(std::move(row));
  }
  return lp;
}

template <Scalar T>
bool payments_exist(const Grid<T>& grid, const AllocationTable& allocation) {
  return lp::solve_lp(payment_feasibility_lp(grid, allocation)).status == lp::Status::Optimal;
}

template <Scalar T>
T worst_case_loss(const Grid<T>& grid, const AllocationTable& allocation) {
  T worst(0);
  for (std::uint64_t v = 0; v < grid.profile_count(); ++v) {
    const auto profile = grid.profile(v);
    const T loss = max_welfare(profile) - social_welfare(profile, Alternative{allocation[v]});
    if (loss > worst) worst = loss;
  }
  return worst;
}

template <Scalar T>
struct DeterministicSearchResult {
  T value;
  std::uint64_t allocation_code = 0;  // bit v = alternative chosen at profile v
  AllocationTable allocation;
  std::uint64_t candidates = 0;
  std::uint64_t feasibility_checks = 0;
};

/// Exhaustive search over the 2^16 allocation functions of the n = m = 2,
/// k = 2 grid.
template <Scalar T>
DeterministicSearchResult<T> deterministic_exhaustive(std::size_t n, std::size_t m, std::size_t k, const T& range) {
  if (n != 2 || m != 2 || k != 2) throw ArgumentError("exhaustive deterministic search supports only n = m = k = 2");
  const Grid<T> grid(n, m, k, range);
  const std::uint64_t profiles = grid.profile_count();
  const std::uint64_t count = std::uint64_t{1} << profiles;

  // Welfare gap per profile: loss from choosing each alternative.
  std::vector<std::vector<T>> loss(profiles, std::vector<T>(m));
  for (std::uint64_t v = 0; v < profiles; ++v) {
    const auto profile = grid.profile(v);
    const T best = max_welfare(profile);
    for (std::size_t a = 0; a < m; ++a) loss[v][a] = best - social_welfare(profile, Alternative{a});
  }
  auto decode = [&](std::uint64_t code) {
    AllocationTable table(profiles);
    for (std::uint64_t v = 0; v < profiles; ++v) table[v] = (code >> v) & 1;
    return table;
  };
  std::vector<T> worst(count, T(0));
  for (std::uint64_t code = 0; code < count; ++code) {
    for (std::uint64_t v = 0; v < profiles; ++v) {
      const T& l = loss[v][(code >> v) & 1];
      if (l > worst[code]) worst[code] = l;
    }
  }
  std::vector<std::uint64_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return worst[a] < worst[b]; });

  DeterministicSearchResult<T> result;
  result.candidates = count;
  for (std::uint64_t code : order) {
    ++result.feasibility_checks;
    auto table = decode(code);
    if (payments_exist(grid, table)) {
      result.value = worst[code];
      result.allocation_code = code;
      result.allocation = std::move(table);
      return result;
    }
  }
  throw ContractError("no deterministic allocation admits payments; constant allocations always should");
}

}  // namespace sinkmech::amd
