#pragma once

// Optimal LP value as a function of the number of valuation levels k.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sinkmech/amd/build.hpp"
#include "sinkmech/amd/deterministic.hpp"
#include "sinkmech/lp/simplex.hpp"
#include "sinkmech/parallel.hpp"

namespace sinkmech::amd {

enum class NumericMode { Exact, Float };

inline const char* mode_name(NumericMode m) { return m == NumericMode::Exact ? "exact" : "float"; }

struct SweepOptions {
  std::size_t agents = 2;
  std::size_t alternatives = 2;
  Rational range = Rational(1);
  bool use_symmetry = true;
  std::size_t workers = 1;
  /// Levels above this are solved in double precision.
  std::size_t exact_max_k = 4;
  /// Dense dual tableau size (primal columns x (primal rows + columns)) beyond
  /// which a level is reported as out of budget.
  std::uint64_t max_tableau_cells = 100'000'000;
  std::uint64_t max_sp_rows = 2'000'000;
};

struct SweepPoint {
  std::size_t k = 0;
  NumericMode mode = NumericMode::Exact;
  double value = 0;
  std::string exact;  // p/q in exact mode, empty otherwise
  std::size_t columns = 0;
  std::size_t rows = 0;
  std::uint64_t iterations = 0;
};

struct SweepResult {
  MechanismClass mechanism_class = MechanismClass::Randomized;
  std::vector<SweepPoint> points;
  bool truncated = false;
  std::string truncation_reason;
};

namespace detail {

template <Scalar T>
SweepPoint solve_level(MechanismClass cls, std::size_t k, const SweepOptions& options, NumericMode mode) {
  T range;
  if constexpr (ScalarTraits<T>::exact) {
    range = options.range;
  } else {
    range = to_double(options.range);
  }
  const Grid<T> grid(options.agents, options.alternatives, k, range);
  SweepPoint point;
  point.k = k;
  point.mode = mode;
  if (cls == MechanismClass::Deterministic) {
    const auto result = deterministic_exhaustive(options.agents, options.alternatives, k, range);
    point.value = to_double(result.value);
    if constexpr (ScalarTraits<T>::exact) point.exact = format_scalar(result.value);
    point.iterations = result.feasibility_checks;
    return point;
  }
  const auto prog = build_lp(cls, grid, BuildOptions{options.use_symmetry, 1, options.max_sp_rows});
  point.columns = prog.lp.column_count();
  point.rows = prog.lp.row_count();
  const std::uint64_t cells = static_cast<std::uint64_t>(point.columns) * (point.rows + point.columns);
  if (cells > options.max_tableau_cells) {
    throw ResourceError("k = " + std::to_string(k) + " needs a " + std::to_string(cells) +
                        "-cell tableau, limit is " + std::to_string(options.max_tableau_cells));
  }
  const auto sol = lp::solve_lp(prog.lp);
  if (sol.status != lp::Status::Optimal) {
    throw ContractError(std::string("inefficiency LP reported ") + lp::status_name(sol.status) + " at k = " +
                        std::to_string(k));
  }
  point.value = to_double(sol.objective);
  if constexpr (ScalarTraits<T>::exact) point.exact = format_scalar(sol.objective);
  point.iterations = sol.iterations;
  return point;
}

}  // namespace detail

/// Solves each k in [k_min, k_max] (in parallel across k). The first level
/// that exceeds a resource limit ends the table; later levels are dropped and
/// the result is marked truncated.
inline SweepResult sweep_levels(MechanismClass cls, std::size_t k_min, std::size_t k_max,
                                const SweepOptions& options = {}) {
  if (k_min < 2) throw ArgumentError("k_min must be at least 2");
  if (k_max < k_min) throw ArgumentError("k_max must be at least k_min");
  const std::size_t count = k_max - k_min + 1;
  std::vector<std::optional<SweepPoint>> slots(count);
  std::vector<std::string> failures(count);
  std::atomic<std::size_t> next{0};
  parallel_chunks(options.workers, options.workers, [&](std::size_t, std::size_t, std::size_t) {
    for (std::size_t i = next++; i < count; i = next++) {
      const std::size_t k = k_min + i;
      try {
        if (cls == MechanismClass::Deterministic && k != 2) {
          throw ResourceError("deterministic exhaustive search is limited to k = 2");
        }
        slots[i] = k <= options.exact_max_k
                       ? detail::solve_level<Rational>(cls, k, options, NumericMode::Exact)
                       : detail::solve_level<double>(cls, k, options, NumericMode::Float);
      } catch (const ResourceError& e) {
        failures[i] = e.what();
      }
    }
  });
  SweepResult result;
  result.mechanism_class = cls;
  for (std::size_t i = 0; i < count; ++i) {
    if (!slots[i]) {
      result.truncated = true;
      result.truncation_reason = failures[i];
      break;
    }
    result.points.push_back(std::move(*slots[i]));
  }
  return result;
}

inline void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "class,k,mode,value,exact,columns,rows\n";
  for (const auto& p : result.points) {
    out << class_name(result.mechanism_class) << ',' << p.k << ',' << mode_name(p.mode) << ','
        << format_scalar(p.value) << ',' << p.exact << ',' << p.columns << ',' << p.rows << '\n';
  }
  if (result.truncated) out << "# truncated: " << result.truncation_reason << '\n';
}

}  // namespace sinkmech::amd
