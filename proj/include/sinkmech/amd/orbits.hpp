#pragma once

// Permutation symmetry of valuation grids. A group element renames agents
// (agent i's row moves to position sigma(i)) and alternatives (value at a
// moves to pi(a)) simultaneously.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "sinkmech/grid.hpp"

namespace sinkmech::amd {

struct GroupElement {
  std::vector<std::size_t> agents;        // sigma
  std::vector<std::size_t> alternatives;  // pi
};

enum class Symmetry { AgentsAndAlternatives, AgentsOnly };

/// All group elements, identity first.
inline std::vector<GroupElement> symmetry_group(std::size_t n, std::size_t m, Symmetry kind) {
  auto perms = [](std::size_t size) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> p(size);
    std::iota(p.begin(), p.end(), 0);
    do {
      out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
  };
  std::vector<std::vector<std::size_t>> alt_perms;
  if (kind == Symmetry::AgentsOnly) {
    alt_perms.push_back(perms(m).front());
  } else {
    alt_perms = perms(m);
  }
  std::vector<GroupElement> group;
  for (const auto& sigma : perms(n)) {
    for (const auto& pi : alt_perms) group.push_back(GroupElement{sigma, pi});
  }
  return group;
}

/// Row index of a single agent's valuation after permuting alternatives.
inline std::uint64_t permute_row(std::uint64_t row, std::size_t m, std::size_t k, const std::vector<std::size_t>& pi) {
  std::vector<std::uint64_t> digits(m);
  for (std::size_t a = m; a-- > 0;) {
    digits[a] = row % k;
    row /= k;
  }
  std::vector<std::uint64_t> out(m);
  for (std::size_t a = 0; a < m; ++a) out[pi[a]] = digits[a];
  std::uint64_t index = 0;
  for (std::uint64_t d : out) index = index * k + d;
  return index;
}

template <Scalar T>
std::uint64_t apply(const Grid<T>& grid, const GroupElement& g, std::uint64_t profile) {
  const auto rows = grid.row_indices(profile);
  std::vector<std::uint64_t> image(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    image[g.agents[i]] = permute_row(rows[i], grid.alternatives(), grid.levels(), g.alternatives);
  }
  return grid.compose(image);
}

/// Orbit partition of grid profiles. Each orbit is represented by its
/// smallest full index; reduced indices rank the representatives.
class OrbitTable {
 public:
  OrbitTable(std::vector<GroupElement> group, std::vector<std::uint64_t> reduced_of)
      : group_(std::move(group)), reduced_of_(std::move(reduced_of)) {
    for (std::uint64_t v = 0; v < reduced_of_.size(); ++v) {
      if (reduced_of_[v] == representatives_.size()) {
        representatives_.push_back(v);
        members_.emplace_back();
      }
      members_[reduced_of_[v]].push_back(v);
    }
  }

  const std::vector<GroupElement>& group() const noexcept { return group_; }
  std::size_t size() const noexcept { return representatives_.size(); }
  std::uint64_t reduced_index(std::uint64_t full) const { return reduced_of_.at(full); }
  std::uint64_t representative(std::uint64_t reduced) const { return representatives_.at(reduced); }
  const std::vector<std::uint64_t>& members(std::uint64_t reduced) const { return members_.at(reduced); }
  const std::vector<std::uint64_t>& representatives() const noexcept { return representatives_; }

 private:
  std::vector<GroupElement> group_;
  std::vector<std::uint64_t> reduced_of_;
  std::vector<std::uint64_t> representatives_;
  std::vector<std::vector<std::uint64_t>> members_;
};

template <Scalar T>
OrbitTable orbit_reduce(const Grid<T>& grid, Symmetry kind = Symmetry::AgentsAndAlternatives,
                        std::uint64_t budget = kDefaultEnumerationBudget) {
  grid.require_enumerable(budget);
  auto group = symmetry_group(grid.agents(), grid.alternatives(), kind);
  constexpr auto unset = ~std::uint64_t{0};
  std::vector<std::uint64_t> reduced(grid.profile_count(), unset);
  std::uint64_t next = 0;
  // Ascending scan: the first unseen index of an orbit is its minimum.
  for (std::uint64_t v = 0; v < grid.profile_count(); ++v) {
    if (reduced[v] != unset) continue;
    for (const auto& g : group) reduced[apply(grid, g, v)] = next;
    ++next;
  }
  return OrbitTable(std::move(group), std::move(reduced));
}

}  // namespace sinkmech::amd
