#include <gtest/gtest.h>

#include <cmath>
#include <optional>
#include <sstream>

#include "sinkmech/amd/build.hpp"
#include "sinkmech/lp/simplex.hpp"

using namespace sinkmech;
using lp::Bound;
using lp::LinearProgram;
using lp::RowKind;
using lp::Sense;

namespace {

Rational q(long p, long d = 1) { return ratio<Rational>(p, d); }

// Independent oracle: two-phase primal simplex on a dense double tableau with
// Bland's rule. Free columns are split, every row gets an artificial.
std::optional<double> reference_minimum(const LinearProgram<Rational>& prog) {
  constexpr double eps = 1e-9;
  std::vector<std::vector<double>> cols;  // per structural variable: coefficient per row
  std::vector<double> cost;
  const std::size_t rows = prog.row_count();
  std::vector<std::vector<double>> dense(rows, std::vector<double>(prog.column_count(), 0.0));
  for (std::size_t r = 0; r < rows; ++r) {
    for (const auto& [c, a] : prog.rows()[r].terms) dense[r][c] = a.get_d();
  }
  for (std::size_t j = 0; j < prog.column_count(); ++j) {
    std::vector<double> col(rows);
    for (std::size_t r = 0; r < rows; ++r) col[r] = dense[r][j];
    cols.push_back(col);
    cost.push_back(prog.columns()[j].cost.get_d());
    if (prog.columns()[j].bound == Bound::Free) {
      for (auto& x : col) x = -x;
      cols.push_back(col);
      cost.push_back(-prog.columns()[j].cost.get_d());
    }
  }
  for (std::size_t r = 0; r < rows; ++r) {
    const auto sense = prog.rows()[r].sense;
    if (sense == Sense::Equal) continue;
    std::vector<double> col(rows, 0.0);
    col[r] = sense == Sense::GreaterEqual ? -1.0 : 1.0;
    cols.push_back(col);
    cost.push_back(0.0);
  }
  const std::size_t nstruct = cols.size();
  const std::size_t width = nstruct + rows + 1;  // + artificials + rhs
  std::vector<std::vector<double>> t(rows, std::vector<double>(width, 0.0));
  std::vector<std::size_t> basis(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    double rhs = prog.rows()[r].rhs.get_d();
    const double sign = rhs < 0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < nstruct; ++j) t[r][j] = sign * cols[j][r];
    t[r][nstruct + r] = 1.0;
    t[r][width - 1] = sign * rhs;
    basis[r] = nstruct + r;
  }
  auto run = [&](const std::vector<double>& c, std::size_t allowed) -> bool {
    for (;;) {
      std::optional<std::size_t> enter;
      for (std::size_t j = 0; j < allowed && !enter; ++j) {
        double reduced = c[j];
        for (std::size_t r = 0; r < rows; ++r) reduced -= c[basis[r]] * t[r][j];
        if (reduced < -eps) enter = j;
      }
      if (!enter) return true;
      std::optional<std::size_t> leave;
      double best = 0;
      for (std::size_t r = 0; r < rows; ++r) {
        if (t[r][*enter] > eps) {
          const double ratio = t[r][width - 1] / t[r][*enter];
          if (!leave || ratio < best - eps || (std::abs(ratio - best) <= eps && basis[r] < basis[*leave])) {
            leave = r;
            best = ratio;
          }
        }
      }
      if (!leave) return false;
      const double piv = t[*leave][*enter];
      for (auto& x : t[*leave]) x /= piv;
      for (std::size_t r = 0; r < rows; ++r) {
        if (r == *leave || t[r][*enter] == 0.0) continue;
        const double f = t[r][*enter];
        for (std::size_t j = 0; j < width; ++j) t[r][j] -= f * t[*leave][j];
      }
      basis[*leave] = *enter;
    }
  };
  std::vector<double> phase1(width - 1, 0.0);
  for (std::size_t r = 0; r < rows; ++r) phase1[nstruct + r] = 1.0;
  run(phase1, width - 1);
  double infeas = 0;
  for (std::size_t r = 0; r < rows; ++r) infeas += phase1[basis[r]] * t[r][width - 1];
  if (infeas > 1e-7) return std::nullopt;
  // Pivot zero-level artificials out; rows where that is impossible are redundant.
  for (std::size_t r = 0; r < rows; ++r) {
    if (basis[r] < nstruct) continue;
    std::size_t j = 0;
    while (j < nstruct && std::abs(t[r][j]) <= eps) ++j;
    if (j == nstruct) continue;
    const double piv = t[r][j];
    for (auto& x : t[r]) x /= piv;
    for (std::size_t o = 0; o < rows; ++o) {
      if (o == r || t[o][j] == 0.0) continue;
      const double f = t[o][j];
      for (std::size_t c = 0; c < width; ++c) t[o][c] -= f * t[r][c];
    }
    basis[r] = j;
  }
  std::vector<double> phase2(width - 1, 0.0);
  for (std::size_t j = 0; j < nstruct; ++j) phase2[j] = cost[j];
  if (!run(phase2, nstruct)) return -INFINITY;
  double value = 0;
  for (std::size_t r = 0; r < rows; ++r) value += phase2[basis[r]] * t[r][width - 1];
  return value;
}

lp::SimplexOptions warm_start(bool on) {
  lp::SimplexOptions o;
  o.float_warm_start = on;
  return o;
}

LinearProgram<Rational> small_lp() {
  // min x + 2y  s.t.  x + y >= 1,  x - y <= 1/2,  y free
  LinearProgram<Rational> p;
  p.add_column("x", Bound::NonNegative, q(1));
  p.add_column("y", Bound::Free, q(2));
  p.add_row({"r1", RowKind::Other, {{0, q(1)}, {1, q(1)}}, Sense::GreaterEqual, q(1)});
  p.add_row({"r2", RowKind::Other, {{0, q(1)}, {1, q(-1)}}, Sense::LessEqual, q(1, 2)});
  return p;
}

}  // namespace

TEST(Simplex, SmallProgram) {
  const auto p = small_lp();
  const auto sol = lp::solve_lp(p);
  ASSERT_EQ(sol.status, lp::Status::Optimal);
  // optimum at x - y = 1/2, x + y = 1: x = 3/4, y = 1/4
  EXPECT_EQ(sol.objective, q(5, 4));
  EXPECT_EQ(sol.x, (std::vector<Rational>{q(3, 4), q(1, 4)}));
  EXPECT_TRUE(p.feasible(sol.x));
  Rational dual_obj = 0;
  for (std::size_t r = 0; r < p.row_count(); ++r) dual_obj += sol.duals[r] * p.rows()[r].rhs;
  EXPECT_EQ(dual_obj, sol.objective);
  EXPECT_NEAR(*reference_minimum(p), 1.25, 1e-9);
}

TEST(Simplex, EqualityAndNegativeRhs) {
  LinearProgram<Rational> p;
  p.add_column("a", Bound::NonNegative, q(3));
  p.add_column("b", Bound::NonNegative, q(1));
  p.add_row({"e", RowKind::Other, {{0, q(-1)}, {1, q(-1)}}, Sense::Equal, q(-2)});
  p.add_row({"g", RowKind::Other, {{0, q(1)}}, Sense::GreaterEqual, q(1, 3)});
  const auto sol = lp::solve_lp(p);
  ASSERT_EQ(sol.status, lp::Status::Optimal);
  EXPECT_EQ(sol.objective, q(1) + q(5, 3));
  EXPECT_NEAR(*reference_minimum(p), sol.objective.get_d(), 1e-9);
}

TEST(Simplex, Infeasible) {
  LinearProgram<Rational> p;
  p.add_column("x", Bound::NonNegative, q(1));
  p.add_row({"lo", RowKind::Other, {{0, q(1)}}, Sense::GreaterEqual, q(2)});
  p.add_row({"hi", RowKind::Other, {{0, q(1)}}, Sense::LessEqual, q(1)});
  EXPECT_EQ(lp::solve_lp(p).status, lp::Status::Infeasible);
  EXPECT_FALSE(reference_minimum(p).has_value());
  EXPECT_EQ(lp::solve_lp(p, warm_start(false)).status, lp::Status::Infeasible);
}

TEST(Simplex, Unbounded) {
  LinearProgram<Rational> p;
  p.add_column("x", Bound::NonNegative, q(-1));
  p.add_column("y", Bound::NonNegative, q(0));
  p.add_row({"r", RowKind::Other, {{0, q(1)}, {1, q(-1)}}, Sense::LessEqual, q(1)});
  EXPECT_EQ(lp::solve_lp(p).status, lp::Status::Unbounded);
  EXPECT_EQ(lp::solve_lp(p, warm_start(false)).status, lp::Status::Unbounded);
}

TEST(Simplex, DegenerateCycleProneProgram) {
  // Beale's example, which cycles under the textbook largest-coefficient rule.
  LinearProgram<Rational> p;
  p.add_column("x4", Bound::NonNegative, q(-3, 4));
  p.add_column("x5", Bound::NonNegative, q(150));
  p.add_column("x6", Bound::NonNegative, q(-1, 50));
  p.add_column("x7", Bound::NonNegative, q(6));
  p.add_row({"r1", RowKind::Other, {{0, q(1, 4)}, {1, q(-60)}, {2, q(-1, 25)}, {3, q(9)}}, Sense::LessEqual, q(0)});
  p.add_row({"r2", RowKind::Other, {{0, q(1, 2)}, {1, q(-90)}, {2, q(-1, 50)}, {3, q(3)}}, Sense::LessEqual, q(0)});
  p.add_row({"r3", RowKind::Other, {{2, q(1)}}, Sense::LessEqual, q(1)});
  for (bool warm : {true, false}) {
    const auto sol = lp::solve_lp(p, warm_start(warm));
    ASSERT_EQ(sol.status, lp::Status::Optimal);
    EXPECT_EQ(sol.objective, q(-1, 20));
  }
}

TEST(Simplex, FloatModeMatchesExact) {
  const auto exact = lp::solve_lp(small_lp());
  const auto flt = lp::solve_lp(lp::to_float(small_lp()));
  ASSERT_EQ(flt.status, lp::Status::Optimal);
  EXPECT_NEAR(flt.objective, exact.objective.get_d(), 1e-9);
}

TEST(Simplex, NormalizeMergesTerms) {
  LinearProgram<Rational> p;
  p.add_column("x", Bound::NonNegative, q(1));
  p.add_column("y", Bound::NonNegative, q(1));
  p.add_row({"r", RowKind::Other, {{1, q(1)}, {0, q(2)}, {1, q(-1)}}, Sense::GreaterEqual, q(1)});
  ASSERT_EQ(p.rows()[0].terms.size(), 1u);
  EXPECT_EQ(p.rows()[0].terms[0], (std::pair<std::size_t, Rational>{0, q(2)}));
  EXPECT_THROW(p.add_row({"bad", RowKind::Other, {{5, q(1)}}, Sense::Equal, q(0)}), ArgumentError);
}

TEST(Simplex, ExportUsesRationals) {
  std::ostringstream out;
  small_lp().write_lp(out);
  const auto text = out.str();
  EXPECT_NE(text.find("Minimize"), std::string::npos);
  EXPECT_NE(text.find("1/2"), std::string::npos);
  EXPECT_NE(text.find("y free"), std::string::npos);
}

TEST(CrossCheck, InefficiencyProgramAtTwoLevels) {
  for (bool symmetric : {false, true}) {
    const Grid<Rational> grid(2, 2, 2, q(1));
    const auto prog = amd::build_lp(amd::MechanismClass::Randomized, grid, amd::BuildOptions{symmetric});
    const auto sol = lp::solve_lp(prog.lp);
    ASSERT_EQ(sol.status, lp::Status::Optimal);
    const auto reference = reference_minimum(prog.lp);
    ASSERT_TRUE(reference.has_value());
    EXPECT_NEAR(sol.objective.get_d(), *reference, 1e-9) << "symmetric=" << symmetric;
    EXPECT_EQ(prog.lp.max_violation(sol.x), q(0));
  }
}

TEST(CrossCheck, GeneralizedSinkProgramAtThreeLevels) {
  const Grid<Rational> grid(2, 2, 3, q(1));
  const auto prog = amd::build_lp(amd::MechanismClass::GeneralizedSink, grid, amd::BuildOptions{true});
  const auto sol = lp::solve_lp(prog.lp);
  ASSERT_EQ(sol.status, lp::Status::Optimal);
  EXPECT_NEAR(sol.objective.get_d(), *reference_minimum(prog.lp), 1e-9);
}
