#pragma once

// Sparse linear program: minimize c^T x subject to row constraints, with each
// column either nonnegative or free.

#include <algorithm>
#include <cstddef>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "sinkmech/errors.hpp"
#include "sinkmech/scalar.hpp"

namespace sinkmech::lp {

enum class Bound { NonNegative, Free };
enum class Sense { GreaterEqual, LessEqual, Equal };
enum class RowKind { StrategyProof, Simplex, BudgetBalance, MaxInefficiency, Other };

inline const char* row_kind_name(RowKind kind) {
  switch (kind) {
    case RowKind::StrategyProof: return "sp";
    case RowKind::Simplex: return "scf";
    case RowKind::BudgetBalance: return "bb";
    case RowKind::MaxInefficiency: return "maxineff";
    case RowKind::Other: return "other";
  }
  return "other";
}

template <Scalar T>
struct Column {
  std::string name;
  Bound bound = Bound::NonNegative;
  T cost;
};

template <Scalar T>
struct Row {
  std::string name;
  RowKind kind = RowKind::Other;
  std::vector<std::pair<std::size_t, T>> terms;  // (column, coefficient), no repeated columns
  Sense sense = Sense::GreaterEqual;
  T rhs;
};

template <Scalar T>
class LinearProgram {
 public:
  std::size_t add_column(std::string name, Bound bound, T cost = T(0)) {
    columns_.push_back(Column<T>{std::move(name), bound, std::move(cost)});
    return columns_.size() - 1;
  }

  /// Sorts terms by column, sums repeated columns, and drops zeros.
  void normalize(Row<T>& row) const {
    std::vector<std::pair<std::size_t, T>> merged;
    std::sort(row.terms.begin(), row.terms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [col, coef] : row.terms) {
      if (col >= columns_.size()) throw ArgumentError("row '" + row.name + "' references unknown column");
      if (!merged.empty() && merged.back().first == col) {
        merged.back().second += coef;
      } else {
        merged.emplace_back(col, std::move(coef));
      }
    }
    std::erase_if(merged, [](const auto& t) { return t.second == T(0); });
    row.terms = std::move(merged);
  }

  std::size_t add_row(Row<T> row) {
    normalize(row);
    rows_.push_back(std::move(row));
    return rows_.size() - 1;
  }

  const std::vector<Column<T>>& columns() const noexcept { return columns_; }
  const std::vector<Row<T>>& rows() const noexcept { return rows_; }
  std::size_t column_count() const noexcept { return columns_.size(); }
  std::size_t row_count() const noexcept { return rows_.size(); }

  std::size_t count_rows(RowKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(rows_.begin(), rows_.end(), [kind](const Row<T>& r) { return r.kind == kind; }));
  }

  T objective(const std::vector<T>& x) const {
    check_size(x);
    T value(0);
    for (std::size_t j = 0; j < columns_.size(); ++j) value += columns_[j].cost * x[j];
    return value;
  }

  T row_activity(std::size_t r, const std::vector<T>& x) const {
    T s(0);
    for (const auto& [col, coef] : rows_[r].terms) s += coef * x[col];
    return s;
  }

  /// Largest constraint or bound violation of x (0 when feasible).
  T max_violation(const std::vector<T>& x) const {
    check_size(x);
    T worst(0);
    auto note = [&](const T& v) {
      if (v > worst) worst = v;
    };
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      if (columns_[j].bound == Bound::NonNegative) note(T(-x[j]));
    }
    for (std::size_t r = 0; r < rows_.size(); ++r) {
      const T gap = row_activity(r, x) - rows_[r].rhs;
      switch (rows_[r].sense) {
        case Sense::GreaterEqual: note(T(-gap)); break;
        case Sense::LessEqual: note(gap); break;
        case Sense::Equal: note(abs_value(gap)); break;
      }
    }
    return worst;
  }

  bool feasible(const std::vector<T>& x) const { return !is_positive(max_violation(x)); }

  /// CPLEX-style LP text with coefficients written as p/q.
  void write_lp(std::ostream& out) const {
    out << "Minimize\n obj:";
    bool any = false;
    for (std::size_t j = 0; j < columns_.size(); ++j) {
      if (columns_[j].cost == T(0)) continue;
      write_term(out, columns_[j].cost, columns_[j].name, !any);
      any = true;
    }
    if (!any) out << " 0";
    out << "\nSubject To\n";
    for (const auto& row : rows_) {
      out << ' ' << row.name << ':';
      if (row.terms.empty()) out << " 0";
      bool first = true;
      for (const auto& [col, coef] : row.terms) {
        write_term(out, coef, columns_[col].name, first);
        first = false;
      }
      out << (row.sense == Sense::GreaterEqual ? " >= " : row.sense == Sense::LessEqual ? " <= " : " = ")
          << format_scalar(row.rhs) << '\n';
    }
    out << "Bounds\n";
    for (const auto& col : columns_) {
      if (col.bound == Bound::Free) out << ' ' << col.name << " free\n";
    }
    out << "End\n";
  }

 private:
  void check_size(const std::vector<T>& x) const {
    if (x.size() != columns_.size()) throw ArgumentError("solution length does not match column count");
  }

  static void write_term(std::ostream& out, const T& coef, const std::string& name, bool first) {
    if (coef < T(0)) {
      out << " - " << format_scalar(T(-coef)) << ' ' << name;
    } else {
      out << (first ? " " : " + ") << format_scalar(coef) << ' ' << name;
    }
  }

  std::vector<Column<T>> columns_;
  std::vector<Row<T>> rows_;
};

}  // namespace sinkmech::lp
