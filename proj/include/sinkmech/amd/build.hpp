#pragma once

// Inefficiency-minimization LPs over a valuation grid.
//
// Unrestricted randomized class, variables f_a(v) >= 0, p_i(v) free, l >= 0:
//   SP   sum_a v_i(a) (f_a(v) - f_a(v')) - p_i(v) + p_i(v') >= 0   (v' differs from v in row i only)
//   SCF  sum_a f_a(v) = 1
//   BB   sum_i p_i(v) = 0
//   MI   l + sum_a W(v, a) f_a(v) >= max_a W(v, a)
// minimizing l. The generalized-sink class (n = 2) replaces f and p with a
// sink lottery g_k(v) >= 0: sink k induces the efficient choice c_k(v) of the
// other agent, payments vanish, and the SP and MI rows become linear in g.
//
// With symmetry enabled, columns in one group orbit are identified (their
// coefficients summed), rows that become identical are merged, and rows that
// become 0 >= 0 are dropped.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "sinkmech/amd/orbits.hpp"
#include "sinkmech/core.hpp"
#include "sinkmech/grid.hpp"
#include "sinkmech/lp/linear_program.hpp"
#include "sinkmech/parallel.hpp"
#include "sinkmech/randomized.hpp"

namespace sinkmech::amd {

enum class MechanismClass { Randomized, GeneralizedSink, Deterministic };

inline const char* class_name(MechanismClass c) {
  switch (c) {
    case MechanismClass::Randomized: return "randomized";
    case MechanismClass::GeneralizedSink: return "generalized-sink";
    case MechanismClass::Deterministic: return "deterministic";
  }
  return "unknown";
}

inline MechanismClass parse_class(const std::string& name) {
  if (name == "randomized" || name == "unrestricted") return MechanismClass::Randomized;
  if (name == "generalized-sink" || name == "gen-sink") return MechanismClass::GeneralizedSink;
  if (name == "deterministic") return MechanismClass::Deterministic;
  throw ArgumentError("unknown mechanism class '" + name + "'");
}

struct BuildOptions {
  bool use_symmetry = false;
  std::size_t workers = 1;
  std::uint64_t max_sp_rows = 2'000'000;
};

/// (agent, truthful profile, misreport profile), full indices.
using SpKey = std::tuple<std::size_t, std::uint64_t, std::uint64_t>;

template <Scalar T>
struct AmdProgram {
  MechanismClass mechanism_class = MechanismClass::Randomized;
  Grid<T> grid;
  std::optional<OrbitTable> orbits;
  lp::LinearProgram<T> lp;
  std::vector<std::size_t> allocation_column;  // [v * width + a]; width = m (randomized) or n (sink lottery)
  std::vector<std::size_t> payment_column;     // [v * n + i]; randomized only
  std::size_t loss_column = 0;
  std::map<SpKey, std::optional<std::size_t>> sp_row;  // nullopt: row vanished
  std::vector<std::optional<std::size_t>> simplex_row;
  std::vector<std::optional<std::size_t>> budget_row;
  std::vector<std::optional<std::size_t>> loss_row;

  std::size_t allocation_width() const {
    return mechanism_class == MechanismClass::GeneralizedSink ? grid.agents() : grid.alternatives();
  }
};

namespace detail {

/// Column per orbit of (profile, slot) pairs, where a group element maps
/// slot s to slot_map(g)[s]. Orbits are created in ascending (profile, slot)
/// order, so each column is named after its smallest member.
template <Scalar T, class SlotMap>
std::vector<std::size_t> orbit_columns(const Grid<T>& grid, std::size_t width, const std::vector<GroupElement>& group,
                                       SlotMap slot_map, lp::LinearProgram<T>& lp, const std::string& prefix,
                                       lp::Bound bound) {
  constexpr auto unset = ~std::size_t{0};
  std::vector<std::size_t> column(grid.profile_count() * width, unset);
  for (std::uint64_t v = 0; v < grid.profile_count(); ++v) {
    for (std::size_t s = 0; s < width; ++s) {
      if (column[v * width + s] != unset) continue;
      const std::size_t c = lp.add_column(prefix + std::to_string(s + 1) + "_v" + std::to_string(v), bound);
      for (const auto& g : group) column[apply(grid, g, v) * width + slot_map(g)[s]] = c;
    }
  }
  return column;
}

template <Scalar T>
std::string row_signature(const lp::Row<T>& row) {
  std::ostringstream key;
  key << static_cast<int>(row.kind) << '|' << static_cast<int>(row.sense) << '|' << format_scalar(row.rhs);
  for (const auto& [col, coef] : row.terms) key << '|' << col << ':' << format_scalar(coef);
  return key.str();
}

template <Scalar T>
class RowSink {
 public:
  explicit RowSink(lp::LinearProgram<T>& lp) : lp_(lp) {}

  /// With `merge` false the row is kept even if an identical one exists.
  std::optional<std::size_t> add(lp::Row<T> row, bool merge = true) {
    lp_.normalize(row);
    if (row.terms.empty()) {
      const T& b = row.rhs;
      const bool holds = row.sense == lp::Sense::GreaterEqual ? !(b > T(0))
                         : row.sense == lp::Sense::LessEqual  ? !(b < T(0))
                                                              : b == T(0);
      if (!holds) throw ContractError("row '" + row.name + "' reduced to an infeasible constant");
      return std::nullopt;
    }
    if (!merge) return lp_.add_row(std::move(row));
    auto key = row_signature(row);
    if (auto it = seen_.find(key); it != seen_.end()) return it->second;
    const std::size_t index = lp_.add_row(std::move(row));
    seen_.emplace(std::move(key), index);
    return index;
  }

 private:
  lp::LinearProgram<T>& lp_;
  std::unordered_map<std::string, std::size_t> seen_;
};

/// Efficient choice of the agent other than sink k, for every profile and k.
template <Scalar T>
std::vector<std::size_t> sink_choices(const Grid<T>& grid) {
  const std::size_t n = grid.agents();
  std::vector<std::size_t> choice(grid.profile_count() * n);
  for (std::uint64_t v = 0; v < grid.profile_count(); ++v) {
    const auto profile = grid.profile(v);
    for (std::size_t k = 0; k < n; ++k) choice[v * n + k] = efficient_alternative(profile, AgentSet{k}).index;
  }
  return choice;
}

}  // namespace detail

/// Checks the grid-size limits of a class without building anything.
template <Scalar T>
void check_buildable(MechanismClass cls, const Grid<T>& grid, const BuildOptions& options) {
  if (cls == MechanismClass::Deterministic) {
    throw ArgumentError("the deterministic class is solved by exhaustive search, not a single LP");
  }
  if (cls == MechanismClass::GeneralizedSink && grid.agents() != 2) {
    throw ArgumentError("the generalized-sink LP supports exactly two agents");
  }
  grid.require_enumerable(kDefaultEnumerationBudget);
  const std::uint64_t sp_rows = grid.agents() * grid.profile_count() * (grid.row_count() - 1);
  if (sp_rows > options.max_sp_rows) {
    throw ResourceError("LP would have " + std::to_string(sp_rows) + " strategyproofness rows, limit is " +
                        std::to_string(options.max_sp_rows));
  }
}

template <Scalar T>
AmdProgram<T> build_lp(MechanismClass cls, const Grid<T>& grid, BuildOptions options = {}) {
  check_buildable(cls, grid, options);
  const std::size_t n = grid.agents();
  const std::size_t m = grid.alternatives();
  const bool sink = cls == MechanismClass::GeneralizedSink;

  AmdProgram<T> prog{cls, grid, std::nullopt, {}, {}, {}, 0, {}, {}, {}, {}};
  const Symmetry kind = sink ? Symmetry::AgentsOnly : Symmetry::AgentsAndAlternatives;
  std::vector<GroupElement> group;
  if (options.use_symmetry) {
    prog.orbits = orbit_reduce(grid, kind);
    group = prog.orbits->group();
    if (n == 2 && m == 2 && grid.levels() == 3 && !sink && prog.orbits->reduced_index(52) != 24) {
      throw ContractError("orbit numbering anchor failed: full profile 52 is not reduced profile 24");
    }
  } else {
    group = {symmetry_group(n, m, kind).front()};
  }

  auto& lp = prog.lp;
  if (sink) {
    prog.allocation_column = detail::orbit_columns(
        grid, n, group, [](const GroupElement& g) -> const auto& { return g.agents; }, lp, "g", lp::Bound::NonNegative);
  } else {
    prog.allocation_column = detail::orbit_columns(
        grid, m, group, [](const GroupElement& g) -> const auto& { return g.alternatives; }, lp, "f",
        lp::Bound::NonNegative);
    prog.payment_column = detail::orbit_columns(
        grid, n, group, [](const GroupElement& g) -> const auto& { return g.agents; }, lp, "p", lp::Bound::Free);
  }
  prog.loss_column = lp.add_column("l", lp::Bound::NonNegative, T(1));

  const std::size_t width = prog.allocation_width();
  const auto choice = sink ? detail::sink_choices(grid) : std::vector<std::size_t>{};
  const auto& levels = grid.level_values();
  const std::uint64_t profiles = grid.profile_count();
  const std::uint64_t rows_per_agent = grid.row_count();

  // Value agent i assigns to what allocation slot s selects at profile v.
  auto slot_value = [&](std::size_t i, std::uint64_t v, std::size_t s, const std::vector<std::uint64_t>& digits) {
    const std::size_t a = sink ? choice[v * n + s] : s;
    std::uint64_t row = digits[i];
    for (std::size_t b = m - 1; b > a; --b) row /= grid.levels();
    return levels[row % grid.levels()];
  };

  // Rows are generated in parallel per profile, then merged in a fixed order.
  std::vector<std::vector<std::pair<SpKey, lp::Row<T>>>> sp(profiles);
  parallel_chunks(profiles, options.workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::uint64_t v = begin; v < end; ++v) {
      const auto digits = grid.row_indices(v);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::uint64_t r = 0; r < rows_per_agent; ++r) {
          if (r == digits[i]) continue;
          auto other = digits;
          other[i] = r;
          const std::uint64_t w = grid.compose(other);
          lp::Row<T> row;
          row.name = "sp" + std::to_string(i + 1) + "_v" + std::to_string(v) + "_w" + std::to_string(w);
          row.kind = lp::RowKind::StrategyProof;
          row.sense = lp::Sense::GreaterEqual;
          row.rhs = T(0);
          for (std::size_t s = 0; s < width; ++s) {
            const T own = slot_value(i, v, s, digits);
            const T lie = sink ? slot_value(i, w, s, digits) : own;
            row.terms.emplace_back(prog.allocation_column[v * width + s], own);
            row.terms.emplace_back(prog.allocation_column[w * width + s], T(-lie));
          }
          if (!sink) {
            row.terms.emplace_back(prog.payment_column[v * n + i], T(-1));
            row.terms.emplace_back(prog.payment_column[w * n + i], T(1));
          }
          sp[v].emplace_back(SpKey{i, v, w}, std::move(row));
        }
      }
    }
  });

  detail::RowSink<T> sink_rows(lp);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::uint64_t v = 0; v < profiles; ++v) {
      for (auto& [key, row] : sp[v]) {
        if (std::get<0>(key) == i) prog.sp_row[key] = sink_rows.add(std::move(row));
      }
    }
  }
  sp.clear();

  prog.simplex_row.resize(profiles);
  prog.loss_row.resize(profiles);
  if (!sink) prog.budget_row.resize(profiles);
  for (std::uint64_t v = 0; v < profiles; ++v) {
    lp::Row<T> row{"scf_v" + std::to_string(v), lp::RowKind::Simplex, {}, lp::Sense::Equal, T(1)};
    for (std::size_t s = 0; s < width; ++s) row.terms.emplace_back(prog.allocation_column[v * width + s], T(1));
    prog.simplex_row[v] = sink_rows.add(std::move(row));
  }
  if (!sink) {
    for (std::uint64_t v = 0; v < profiles; ++v) {
      lp::Row<T> row{"bb_v" + std::to_string(v), lp::RowKind::BudgetBalance, {}, lp::Sense::Equal, T(0)};
      for (std::size_t i = 0; i < n; ++i) row.terms.emplace_back(prog.payment_column[v * n + i], T(1));
      prog.budget_row[v] = sink_rows.add(std::move(row));
    }
  }
  for (std::uint64_t v = 0; v < profiles; ++v) {
    const auto profile = grid.profile(v);
    lp::Row<T> row{"mi_v" + std::to_string(v), lp::RowKind::MaxInefficiency, {}, lp::Sense::GreaterEqual,
                   max_welfare(profile)};
    row.terms.emplace_back(prog.loss_column, T(1));
    for (std::size_t s = 0; s < width; ++s) {
      const std::size_t a = sink ? choice[v * n + s] : s;
      row.terms.emplace_back(prog.allocation_column[v * width + s], social_welfare(profile, Alternative{a}));
    }
    // one row per profile in the full program; orbit copies merge when reduced
    prog.loss_row[v] = sink_rows.add(std::move(row), options.use_symmetry);
  }
  return prog;
}

/// Mechanism that plays the LP solution `x` on grid profiles and rejects
/// profiles off the grid.
template <Scalar T>
Mechanism<T> mechanism_from_solution(const AmdProgram<T>& prog, const std::vector<T>& x) {
  if (x.size() != prog.lp.column_count()) throw ArgumentError("solution length does not match the program");
  const std::size_t width = prog.allocation_width();
  const std::size_t n = prog.grid.agents();
  auto clean = [](T value) {
    if constexpr (!ScalarTraits<T>::exact) {
      if (std::abs(value) < 1e-9) value = 0.0;
    }
    return value;
  };
  std::vector<T> alloc(prog.allocation_column.size());
  for (std::size_t s = 0; s < alloc.size(); ++s) alloc[s] = clean(x[prog.allocation_column[s]]);
  std::vector<T> pay(prog.payment_column.size());
  for (std::size_t s = 0; s < pay.size(); ++s) pay[s] = clean(x[prog.payment_column[s]]);
  const Grid<T> grid = prog.grid;
  auto lookup = [grid](const ValuationProfile<T>& v) {
    auto idx = grid.index_of(v);
    if (!idx) throw ArgumentError("profile is not on the solved grid");
    return *idx;
  };
  if (prog.mechanism_class == MechanismClass::GeneralizedSink) {
    return generalized_sink_mechanism<T>("lp-generalized-sink", [=](const ValuationProfile<T>& v) {
      const auto idx = lookup(v);
      return SinkDistribution<T>{std::vector<T>(alloc.begin() + idx * width, alloc.begin() + (idx + 1) * width)};
    });
  }
  return Mechanism<T>{"lp-randomized", [=](const ValuationProfile<T>& v) {
                        const auto idx = lookup(v);
                        std::vector<T> p(pay.begin() + idx * n, pay.begin() + (idx + 1) * n);
                        RandomizedOutcome<T> out;
                        for (std::size_t a = 0; a < width; ++a) {
                          if (alloc[idx * width + a] > T(0)) {
                            out.support.push_back({alloc[idx * width + a], Outcome<T>{Alternative{a}, p}});
                          }
                        }
                        return out;
                      }};
}

}  // namespace sinkmech::amd
