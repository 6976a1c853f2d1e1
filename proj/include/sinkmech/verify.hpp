#pragma once

// Brute-force property checks over a valuation grid. Misreports range over
// the same grid as truthful reports. Exact mode flags any strictly positive
// gain; float mode ignores gains up to 1e-9.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sinkmech/core.hpp"
#include "sinkmech/grid.hpp"
#include "sinkmech/parallel.hpp"
#include "sinkmech/profile_io.hpp"

namespace sinkmech {

/// Expected allocation and payments of a mechanism at every grid profile.
template <Scalar T>
struct OutcomeTable {
  std::vector<std::vector<T>> allocation;
  std::vector<std::vector<T>> payments;
  std::vector<T> worst_surplus;  // max |sum of payments| over realized outcomes
};

template <Scalar T>
OutcomeTable<T> tabulate(const Mechanism<T>& mechanism, const Grid<T>& grid, EnumerationOptions options = {}) {
  grid.require_enumerable(options.budget);
  const std::size_t count = grid.profile_count();
  OutcomeTable<T> table;
  table.allocation.resize(count);
  table.payments.resize(count);
  table.worst_surplus.resize(count);
  parallel_chunks(count, options.workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t idx = begin; idx < end; ++idx) {
      const auto profile = grid.profile(idx);
      const auto outcome = mechanism(profile);
      outcome.validate(profile.agents());
      table.allocation[idx] = outcome.allocation(profile.alternatives());
      table.payments[idx] = outcome.expected_payments(profile.agents());
      T worst(0);
      for (const auto& e : outcome.support) worst = std::max(worst, T(abs_value(e.outcome.surplus())));
      table.worst_surplus[idx] = worst;
    }
  });
  return table;
}

template <Scalar T>
struct ViolationReport {
  std::size_t agent = 0;
  std::uint64_t profile_index = 0;         // truthful profile
  std::uint64_t misreport_profile_index = 0;
  ValuationProfile<T> profile;
  std::vector<T> misreport;                // the deviating row
  T gain;                                  // utility improvement (WMON: -inner product)
};

namespace detail {

template <Scalar T>
T dot(std::span<const T> a, const std::vector<T>& b) {
  T s(0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Calls visit(profile_idx, agent, own_row, misreport_row, misreport_profile_idx)
/// for every unilateral deviation inside [begin, end); per-chunk reports are
/// concatenated in chunk order.
template <Scalar T, class Visit>
std::vector<ViolationReport<T>> scan_deviations(const Grid<T>& grid, EnumerationOptions options, Visit visit) {
  grid.require_enumerable(options.budget);
  std::vector<std::vector<ViolationReport<T>>> partial(std::max<std::size_t>(1, options.workers));
  std::vector<std::vector<T>> rows(grid.row_count());
  for (std::uint64_t r = 0; r < grid.row_count(); ++r) rows[r] = grid.row_values(r);
  parallel_chunks(grid.profile_count(), options.workers, [&](std::size_t w, std::size_t begin, std::size_t end) {
    for (std::uint64_t idx = begin; idx < end; ++idx) {
      auto digits = grid.row_indices(idx);
      for (std::size_t i = 0; i < grid.agents(); ++i) {
        const std::uint64_t own = digits[i];
        for (std::uint64_t r = 0; r < grid.row_count(); ++r) {
          if (r == own) continue;
          digits[i] = r;
          const std::uint64_t dev = grid.compose(digits);
          digits[i] = own;
          if (auto gain = visit(idx, i, rows[own], rows[r], dev)) {
            partial[w].push_back(
                ViolationReport<T>{i, idx, dev, grid.profile(idx), rows[r], std::move(*gain)});
          }
        }
      }
    }
  });
  std::vector<ViolationReport<T>> out;
  for (auto& p : partial) std::move(p.begin(), p.end(), std::back_inserter(out));
  return out;
}

}  // namespace detail

/// Every (profile, agent, grid misreport) where misreporting strictly raises
/// the agent's expected utility.
template <Scalar T>
std::vector<ViolationReport<T>> check_strategyproof(const OutcomeTable<T>& table, const Grid<T>& grid,
                                                    EnumerationOptions options = {}) {
  return detail::scan_deviations<T>(
      grid, options,
      [&](std::uint64_t idx, std::size_t i, const std::vector<T>& own, const std::vector<T>&,
          std::uint64_t dev) -> std::optional<T> {
        const std::span<const T> truth(own);
        T truthful = detail::dot(truth, table.allocation[idx]) - table.payments[idx][i];
        T deviating = detail::dot(truth, table.allocation[dev]) - table.payments[dev][i];
        T gain = deviating - truthful;
        if (is_positive(gain)) return gain;
        return std::nullopt;
      });
}

template <Scalar T>
std::vector<ViolationReport<T>> check_strategyproof(const Mechanism<T>& mechanism, const Grid<T>& grid,
                                                    EnumerationOptions options = {}) {
  return check_strategyproof(tabulate(mechanism, grid, options), grid, options);
}

/// Pairs where (f(v_i, v_-i) - f(v_i', v_-i)) . (v_i - v_i') < 0. Each
/// unordered pair is reported once, from the smaller row index.
template <Scalar T>
std::vector<ViolationReport<T>> check_weak_monotonicity(const OutcomeTable<T>& table, const Grid<T>& grid,
                                                        EnumerationOptions options = {}) {
  return detail::scan_deviations<T>(
      grid, options,
      [&](std::uint64_t idx, std::size_t i, const std::vector<T>& own, const std::vector<T>& other,
          std::uint64_t dev) -> std::optional<T> {
        const auto digits = grid.row_indices(idx);
        if (grid.row_index(std::span<const T>(other)) < digits[i]) return std::nullopt;
        T inner(0);
        for (std::size_t a = 0; a < grid.alternatives(); ++a) {
          inner += (table.allocation[idx][a] - table.allocation[dev][a]) * (own[a] - other[a]);
        }
        if (is_negative(inner)) return T(-inner);
        return std::nullopt;
      });
}

template <Scalar T>
std::vector<ViolationReport<T>> check_weak_monotonicity(const Mechanism<T>& mechanism, const Grid<T>& grid,
                                                        EnumerationOptions options = {}) {
  return check_weak_monotonicity(tabulate(mechanism, grid, options), grid, options);
}

template <Scalar T>
struct BudgetBalanceReport {
  T worst_surplus;
  std::uint64_t argmax_index = 0;
  ValuationProfile<T> argmax;
};

/// Largest |sum_i p_i| over every realized outcome at every grid profile;
/// ties go to the smallest profile index.
template <Scalar T>
BudgetBalanceReport<T> check_budget_balance(const OutcomeTable<T>& table, const Grid<T>& grid) {
  std::uint64_t best = 0;
  for (std::uint64_t idx = 1; idx < table.worst_surplus.size(); ++idx) {
    if (table.worst_surplus[idx] > table.worst_surplus[best]) best = idx;
  }
  return BudgetBalanceReport<T>{table.worst_surplus[best], best, grid.profile(best)};
}

template <Scalar T>
BudgetBalanceReport<T> check_budget_balance(const Mechanism<T>& mechanism, const Grid<T>& grid,
                                            EnumerationOptions options = {}) {
  return check_budget_balance(tabulate(mechanism, grid, options), grid);
}

struct SymmetryViolation {
  std::uint64_t profile_index = 0;
  std::vector<std::size_t> permutation;  // image of each agent / alternative
};

namespace detail {

inline std::vector<std::vector<std::size_t>> non_identity_permutations(std::size_t size) {
  std::vector<std::size_t> p(size);
  std::iota(p.begin(), p.end(), 0);
  std::vector<std::vector<std::size_t>> out;
  while (std::next_permutation(p.begin(), p.end())) out.push_back(p);
  return out;
}

template <Scalar T>
bool equal_within(const T& a, const T& b) {
  return is_zero(T(a - b));
}

/// True when every nonempty agent subset has a unique welfare argmax, so a
/// fixed tie-break cannot break permutation covariance.
template <Scalar T>
bool all_subset_argmaxes_unique(const ValuationProfile<T>& profile) {
  const std::size_t n = profile.agents();
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<T> welfare(profile.alternatives(), T(0));
    for (std::size_t i = 0; i < n; ++i) {
      if (mask >> i & 1) {
        for (std::size_t a = 0; a < profile.alternatives(); ++a) welfare[a] += profile.value(i, a);
      }
    }
    const T best = *std::max_element(welfare.begin(), welfare.end());
    if (std::count(welfare.begin(), welfare.end(), best) > 1) return false;
  }
  return true;
}

}  // namespace detail

/// f(pi v) = pi(f(v)) and p(pi v) = p(v) for every non-identity alternative
/// permutation pi, checked only on profiles where all subset argmaxes are unique.
template <Scalar T>
std::vector<SymmetryViolation> check_neutrality(const OutcomeTable<T>& table, const Grid<T>& grid) {
  std::vector<SymmetryViolation> out;
  const auto perms = detail::non_identity_permutations(grid.alternatives());
  std::vector<std::vector<T>> rows(grid.row_count());
  for (std::uint64_t r = 0; r < grid.row_count(); ++r) rows[r] = grid.row_values(r);
  for (std::uint64_t idx = 0; idx < grid.profile_count(); ++idx) {
    if (!detail::all_subset_argmaxes_unique(grid.profile(idx))) continue;
    const auto digits = grid.row_indices(idx);
    for (const auto& pi : perms) {
      std::vector<std::uint64_t> image(digits.size());
      for (std::size_t i = 0; i < digits.size(); ++i) {
        std::vector<T> permuted(grid.alternatives());
        for (std::size_t a = 0; a < grid.alternatives(); ++a) permuted[pi[a]] = rows[digits[i]][a];
        image[i] = *grid.row_index(std::span<const T>(permuted));
      }
      const std::uint64_t target = grid.compose(image);
      bool ok = true;
      for (std::size_t a = 0; a < grid.alternatives() && ok; ++a) {
        ok = detail::equal_within(table.allocation[target][pi[a]], table.allocation[idx][a]);
      }
      for (std::size_t i = 0; i < grid.agents() && ok; ++i) {
        ok = detail::equal_within(table.payments[target][i], table.payments[idx][i]);
      }
      if (!ok) out.push_back(SymmetryViolation{idx, pi});
    }
  }
  return out;
}

/// f(sigma v) = f(v) and p_sigma(i)(sigma v) = p_i(v) for every non-identity
/// agent permutation sigma.
template <Scalar T>
std::vector<SymmetryViolation> check_anonymity(const OutcomeTable<T>& table, const Grid<T>& grid) {
  std::vector<SymmetryViolation> out;
  const auto perms = detail::non_identity_permutations(grid.agents());
  for (std::uint64_t idx = 0; idx < grid.profile_count(); ++idx) {
    const auto digits = grid.row_indices(idx);
    for (const auto& sigma : perms) {
      std::vector<std::uint64_t> image(digits.size());
      for (std::size_t i = 0; i < digits.size(); ++i) image[sigma[i]] = digits[i];
      const std::uint64_t target = grid.compose(image);
      bool ok = true;
      for (std::size_t a = 0; a < grid.alternatives() && ok; ++a) {
        ok = detail::equal_within(table.allocation[target][a], table.allocation[idx][a]);
      }
      for (std::size_t i = 0; i < grid.agents() && ok; ++i) {
        ok = detail::equal_within(table.payments[target][sigma[i]], table.payments[idx][i]);
      }
      if (!ok) out.push_back(SymmetryViolation{idx, sigma});
    }
  }
  return out;
}

template <Scalar T>
std::vector<SymmetryViolation> check_neutrality(const Mechanism<T>& mechanism, const Grid<T>& grid,
                                                EnumerationOptions options = {}) {
  return check_neutrality(tabulate(mechanism, grid, options), grid);
}

template <Scalar T>
std::vector<SymmetryViolation> check_anonymity(const Mechanism<T>& mechanism, const Grid<T>& grid,
                                               EnumerationOptions options = {}) {
  return check_anonymity(tabulate(mechanism, grid, options), grid);
}

namespace detail {

template <Scalar T>
std::string describe_row(const std::vector<T>& row) {
  std::string s = "(";
  for (std::size_t a = 0; a < row.size(); ++a) s += (a ? "," : "") + format_scalar(row[a]);
  return s + ")";
}

}  // namespace detail

/// One report per line; agents are printed 1-based.
template <Scalar T>
void write_violations_text(std::ostream& out, const std::vector<ViolationReport<T>>& reports) {
  for (const auto& r : reports) {
    out << "agent " << r.agent + 1 << " at profile " << r.profile_index << ' ' << describe_profile(r.profile)
        << " gains " << format_scalar(r.gain) << " by reporting " << detail::describe_row(r.misreport)
        << " (profile " << r.misreport_profile_index << ")\n";
  }
}

template <Scalar T>
void write_violations_csv(std::ostream& out, const std::vector<ViolationReport<T>>& reports) {
  out << "agent,profile_index,profile,misreport,misreport_profile_index,gain\n";
  for (const auto& r : reports) {
    out << r.agent + 1 << ',' << r.profile_index << ",\"" << describe_profile(r.profile) << "\",\""
        << detail::describe_row(r.misreport) << "\"," << r.misreport_profile_index << ',' << format_scalar(r.gain)
        << '\n';
  }
}

}  // namespace sinkmech
