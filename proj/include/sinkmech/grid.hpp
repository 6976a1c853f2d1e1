#pragma once

// Discretized valuation grids. Each agent's valuation takes one of k evenly
// spaced levels in [-M/2, M/2] per alternative.
//
// Indexing (used everywhere, including the LP variable layout):
//   level_j            = -M/2 + j * M / (k - 1)
//   row index of agent = sum_a level_index(a) * k^(m-1-a)
//   profile index      = sum_i row_index(i) * k^(m * (n-1-i))
// so agent 0 is the most significant digit, and within an agent the first
// alternative is most significant. For n = m = 2, k = 3, M = 1 this puts
// ((0, 1/2), (1/2, 0)) at index 52 and ((1/2, 0), (0, 1/2)) at index 68.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "sinkmech/core.hpp"
#include "sinkmech/parallel.hpp"

namespace sinkmech {

/// Default cap on the number of profiles any single enumeration may visit.
inline constexpr std::uint64_t kDefaultEnumerationBudget = 50'000'000;

template <Scalar T>
class Grid {
 public:
  Grid(std::size_t agents, std::size_t alternatives, std::size_t levels, T range)
      : n_(agents), m_(alternatives), k_(levels), range_(std::move(range)) {
    if (n_ < 1) throw ArgumentError("grid needs at least one agent");
    if (m_ < 2) throw ArgumentError("grid needs at least two alternatives");
    if (k_ < 2) throw ArgumentError("grid needs at least two levels");
    if (!(range_ > T(0))) throw ArgumentError("valuation range M must be positive");
    rows_ = checked_power(k_, m_);
    profiles_ = checked_power(rows_, n_);
    for (std::size_t j = 0; j < k_; ++j) {
      levels_.push_back(-range_ / 2 + range_ * T(static_cast<long>(j)) / T(static_cast<long>(k_ - 1)));
    }
  }

  std::size_t agents() const noexcept { return n_; }
  std::size_t alternatives() const noexcept { return m_; }
  std::size_t levels() const noexcept { return k_; }
  const T& range() const noexcept { return range_; }
  const std::vector<T>& level_values() const noexcept { return levels_; }

  /// Number of distinct valuation rows per agent, k^m.
  std::uint64_t row_count() const noexcept { return rows_; }

  /// Number of profiles, k^(nm).
  std::uint64_t profile_count() const noexcept { return profiles_; }

  std::vector<T> row_values(std::uint64_t row) const {
    std::vector<T> values(m_);
    for (std::size_t a = m_; a-- > 0;) {
      values[a] = levels_[row % k_];
      row /= k_;
    }
    return values;
  }

  /// Row index of each agent, agent 0 first.
  std::vector<std::uint64_t> row_indices(std::uint64_t profile) const {
    std::vector<std::uint64_t> rows(n_);
    for (std::size_t i = n_; i-- > 0;) {
      rows[i] = profile % rows_;
      profile /= rows_;
    }
    return rows;
  }

  std::uint64_t compose(const std::vector<std::uint64_t>& rows) const {
    std::uint64_t index = 0;
    for (std::uint64_t r : rows) index = index * rows_ + r;
    return index;
  }

  ValuationProfile<T> profile(std::uint64_t index) const {
    if (index >= profiles_) throw ArgumentError("profile index out of range");
    std::vector<T> values;
    values.reserve(n_ * m_);
    for (std::uint64_t r : row_indices(index)) {
      auto row = row_values(r);
      values.insert(values.end(), row.begin(), row.end());
    }
    return ValuationProfile<T>(n_, m_, range_, std::move(values));
  }

  /// Inverse of `profile`; nullopt when some entry is not a grid level.
  std::optional<std::uint64_t> index_of(const ValuationProfile<T>& profile) const {
    if (profile.agents() != n_ || profile.alternatives() != m_ || profile.range() != range_) {
      return std::nullopt;
    }
    std::vector<std::uint64_t> rows(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      auto r = row_index(profile.row(i));
      if (!r) return std::nullopt;
      rows[i] = *r;
    }
    return compose(rows);
  }

  std::optional<std::uint64_t> row_index(std::span<const T> row) const {
    if (row.size() != m_) return std::nullopt;
    std::uint64_t index = 0;
    for (const T& v : row) {
      auto level = level_index(v);
      if (!level) return std::nullopt;
      index = index * k_ + *level;
    }
    return index;
  }

  /// Throws ResourceError when the grid exceeds `budget` profiles.
  void require_enumerable(std::uint64_t budget) const {
    if (profiles_ > budget) {
      throw ResourceError("grid has " + std::to_string(profiles_) + " profiles, budget is " +
                          std::to_string(budget));
    }
  }

 private:
  static std::uint64_t checked_power(std::uint64_t base, std::size_t exponent) {
    std::uint64_t result = 1;
    for (std::size_t e = 0; e < exponent; ++e) {
      if (result > std::numeric_limits<std::uint64_t>::max() / base) {
        throw ResourceError("grid index space overflows 64 bits");
      }
      result *= base;
    }
    return result;
  }

  std::optional<std::size_t> level_index(const T& v) const {
    for (std::size_t j = 0; j < k_; ++j) {
      if constexpr (ScalarTraits<T>::exact) {
        if (levels_[j] == v) return j;
      } else {
        if (std::abs(levels_[j] - v) <= 1e-12 * std::max(1.0, std::abs(range_))) return j;
      }
    }
    return std::nullopt;
  }

  std::size_t n_;
  std::size_t m_;
  std::size_t k_;
  T range_;
  std::vector<T> levels_;
  std::uint64_t rows_ = 0;
  std::uint64_t profiles_ = 0;
};

/// Every grid profile in index order.
template <Scalar T>
std::vector<ValuationProfile<T>> enumerate_profiles(const Grid<T>& grid,
                                                    std::uint64_t budget = kDefaultEnumerationBudget) {
  grid.require_enumerable(budget);
  std::vector<ValuationProfile<T>> profiles;
  profiles.reserve(grid.profile_count());
  for (std::uint64_t v = 0; v < grid.profile_count(); ++v) profiles.push_back(grid.profile(v));
  return profiles;
}

/// Per-profile quantity maximized by `grid_supremum`.
template <Scalar T>
using ProfileMetric = std::function<T(const ValuationProfile<T>&, const RandomizedOutcome<T>&)>;

template <Scalar T>
ProfileMetric<T> absolute_inefficiency_metric() {
  return [](const ValuationProfile<T>& v, const RandomizedOutcome<T>& o) { return absolute_inefficiency(v, o); };
}

/// Expected sample inefficiency: expected welfare loss / (n M).
template <Scalar T>
ProfileMetric<T> sample_inefficiency_metric() {
  return [](const ValuationProfile<T>& v, const RandomizedOutcome<T>& o) {
    return sample_inefficiency_normalize(absolute_inefficiency(v, o), v.agents(), v.range());
  };
}

template <Scalar T>
struct GridSupremum {
  T value;
  std::uint64_t argmax_index = 0;
  ValuationProfile<T> argmax;
};

struct EnumerationOptions {
  std::size_t workers = 1;
  std::uint64_t budget = kDefaultEnumerationBudget;
};

/// Maximum of `metric` over every grid profile. Ties between equal maxima go
/// to the smallest profile index, so the result does not depend on `workers`.
template <Scalar T>
GridSupremum<T> grid_supremum(const Grid<T>& grid, const Mechanism<T>& mechanism,
                              const ProfileMetric<T>& metric, EnumerationOptions options = {}) {
  grid.require_enumerable(options.budget);
  struct Best {
    std::optional<T> value;
    std::uint64_t index = 0;
  };
  std::vector<Best> partial(std::max<std::size_t>(1, options.workers));
  parallel_chunks(grid.profile_count(), options.workers, [&](std::size_t w, std::size_t begin, std::size_t end) {
    Best best;
    for (std::uint64_t idx = begin; idx < end; ++idx) {
      const auto profile = grid.profile(idx);
      T value = metric(profile, mechanism(profile));
      if (!best.value || value > *best.value) {
        best.value = std::move(value);
        best.index = idx;
      }
    }
    partial[w] = std::move(best);
  });
  Best overall;
  for (auto& b : partial) {
    if (b.value && (!overall.value || *b.value > *overall.value)) overall = std::move(b);
  }
  return GridSupremum<T>{*overall.value, overall.index, grid.profile(overall.index)};
}

}  // namespace sinkmech
