#include <gtest/gtest.h>

#include <sstream>

#include "sinkmech/core.hpp"
#include "sinkmech/grid.hpp"
#include "sinkmech/mechanisms.hpp"
#include "sinkmech/profile_io.hpp"
#include "sinkmech/randomized.hpp"

using namespace sinkmech;

namespace {

Rational q(long p, long d = 1) { return ratio<Rational>(p, d); }

ValuationProfile<Rational> profile(std::size_t n, std::size_t m, std::vector<Rational> v, Rational range = q(1)) {
  return ValuationProfile<Rational>(n, m, range, std::move(v));
}

// Three agents over (a, b, c) from the irrelevant-sink example.
ValuationProfile<Rational> three_agent_profile() {
  return profile(3, 3, {q(1, 2), q(0), q(-1, 2), q(-1, 2), q(0), q(1, 2), q(0), q(-1, 2), q(1, 2)});
}

}  // namespace

TEST(Profile, RejectsOutOfRangeValues) {
  EXPECT_THROW(profile(1, 2, {q(1), q(0)}), ArgumentError);
  EXPECT_THROW(profile(1, 1, {q(0)}), ArgumentError);
  EXPECT_THROW(profile(0, 2, {}), ArgumentError);
  EXPECT_THROW(profile(1, 2, {q(0), q(0)}, q(0)), ArgumentError);
  EXPECT_NO_THROW(profile(1, 2, {q(1, 2), q(-1, 2)}));
}

TEST(Welfare, ThreeAgentExample) {
  EXPECT_EQ(social_welfare(three_agent_profile(), Alternative{2}), q(1, 2));
}

TEST(Welfare, ZeroProfile) {
  const auto v = profile(3, 4, std::vector<Rational>(12, q(0)));
  for (std::size_t a = 0; a < 4; ++a) EXPECT_EQ(social_welfare(v, Alternative{a}), q(0));
}

TEST(Welfare, HandSum) {
  const auto v = profile(2, 2, {q(2, 5), q(-2, 5), q(-1, 10), q(1, 5)});
  EXPECT_EQ(social_welfare(v, Alternative{0}), q(3, 10));
  EXPECT_THROW(social_welfare(v, Alternative{2}), ArgumentError);
}

TEST(Efficient, ExampleAndTies) {
  EXPECT_EQ(efficient_alternative(three_agent_profile()).index, 2u);
  const auto flat = profile(3, 3, std::vector<Rational>(9, q(1, 4)));
  EXPECT_EQ(efficient_alternative(flat).index, 0u);
}

TEST(Efficient, Exclusion) {
  const auto v = profile(2, 2, {q(2, 5), q(-2, 5), q(-1, 10), q(1, 5)});
  EXPECT_EQ(efficient_alternative(v, AgentSet{0}).index, 1u);
  EXPECT_THROW(efficient_alternative(v, AgentSet{0, 1}), ArgumentError);
}

TEST(Inefficiency, DeterministicAndLottery) {
  const auto v = profile(2, 2, {q(499, 1000), q(-499, 1000), q(0), q(1, 1000)});
  const Outcome<Rational> chose_b{Alternative{1}, {q(0), q(0)}};
  const Outcome<Rational> chose_a{Alternative{0}, {q(0), q(0)}};
  EXPECT_EQ(absolute_inefficiency(v, chose_b), q(997, 1000));
  EXPECT_EQ(absolute_inefficiency(v, chose_a), q(0));
  const RandomizedOutcome<Rational> mix{{{q(1, 2), chose_a}, {q(1, 2), chose_b}}};
  EXPECT_EQ(absolute_inefficiency(v, mix), q(997, 2000));
  EXPECT_EQ(sample_inefficiency_normalize(q(997, 2000), 2, q(1)), q(997, 4000));
  EXPECT_EQ(sample_inefficiency_normalize(q(0), 5, q(3)), q(0));
  EXPECT_EQ(sample_inefficiency_normalize(q(2), 1, q(2)), q(1));
}

TEST(Inefficiency, EfficientMinimizesOverAllAlternatives) {
  const Grid<Rational> grid(2, 3, 3, q(1));
  for (std::uint64_t idx = 0; idx < grid.profile_count(); idx += 7) {
    const auto v = grid.profile(idx);
    const auto best = efficient_alternative(v);
    for (std::size_t a = 0; a < 3; ++a) {
      const Outcome<Rational> o{Alternative{a}, {q(0), q(0)}};
      EXPECT_GE(absolute_inefficiency(v, o), q(0));
      EXPECT_LE(absolute_inefficiency(v, Outcome<Rational>{best, {q(0), q(0)}}), absolute_inefficiency(v, o));
    }
  }
}

TEST(Lottery, ValidateRejectsBadDistributions) {
  const Outcome<Rational> o{Alternative{0}, {q(0)}};
  EXPECT_THROW((RandomizedOutcome<Rational>{{{q(1, 2), o}}}.validate(1)), ContractError);
  EXPECT_THROW((RandomizedOutcome<Rational>{{{q(3, 2), o}, {q(-1, 2), o}}}.validate(1)), ContractError);
  EXPECT_THROW((RandomizedOutcome<Rational>{}.validate(1)), ContractError);
  EXPECT_NO_THROW((RandomizedOutcome<Rational>{{{q(1, 3), o}, {q(2, 3), o}}}.validate(1)));
  EXPECT_NO_THROW((RandomizedOutcome<double>{{{0.1, {Alternative{0}, {0.0}}}, {0.9, {Alternative{0}, {0.0}}}}}.validate(1)));
}

TEST(Spillover, Examples) {
  const auto v = profile(2, 2, {q(2, 5), q(-2, 5), q(-1, 10), q(1, 5)});
  EXPECT_EQ(spillover(v, vcg_mechanism<Rational>(), q(0)), q(3, 20));
  EXPECT_EQ(spillover(v, vcg_mechanism<Rational>(), q(1)), q(0));
  EXPECT_EQ(spillover(v, single_sink_mechanism<Rational>(0), q(0)), q(0));
  EXPECT_THROW(spillover(v, vcg_mechanism<Rational>(), q(2)), ArgumentError);
}

TEST(Scalar, ParsesDecimalsExactly) {
  EXPECT_EQ(parse_scalar<Rational>("0.1"), q(1, 10));
  EXPECT_EQ(parse_scalar<Rational>("-2.5e-1"), q(-1, 4));
  EXPECT_EQ(parse_scalar<Rational>("6/8"), q(3, 4));
  EXPECT_EQ(parse_scalar<Rational>("1e3"), q(1000));
  EXPECT_DOUBLE_EQ(parse_scalar<double>("1/4"), 0.25);
  EXPECT_THROW(parse_scalar<Rational>("abc"), ParseError);
  EXPECT_THROW(parse_scalar<Rational>("1/0"), ParseError);
  EXPECT_THROW(parse_scalar<double>(""), ParseError);
  EXPECT_EQ(format_with_decimal(q(1, 7)), "1/7 (0.1428571429)");
}

TEST(Grid, LevelsAndIndexing) {
  const Grid<Rational> grid(2, 2, 3, q(1));
  EXPECT_EQ(grid.profile_count(), 81u);
  EXPECT_EQ(grid.level_values(), (std::vector<Rational>{q(-1, 2), q(0), q(1, 2)}));
  EXPECT_EQ(grid.profile(0), profile(2, 2, std::vector<Rational>(4, q(-1, 2))));
  EXPECT_EQ(grid.profile(52), profile(2, 2, {q(0), q(1, 2), q(1, 2), q(0)}));
  EXPECT_EQ(grid.profile(68), profile(2, 2, {q(1, 2), q(0), q(0), q(1, 2)}));
  EXPECT_THROW(grid.profile(81), ArgumentError);
}

TEST(Grid, IndexRoundTrip) {
  const Grid<Rational> grid(2, 3, 3, q(2));
  for (std::uint64_t idx = 0; idx < grid.profile_count(); ++idx) {
    ASSERT_EQ(grid.index_of(grid.profile(idx)), idx);
  }
  EXPECT_FALSE(grid.index_of(profile(2, 3, {q(1, 3), q(0), q(0), q(0), q(0), q(0)}, q(2))).has_value());
}

TEST(Grid, EnumerateProfilesInIndexOrder) {
  const Grid<Rational> grid(2, 2, 3, q(1));
  const auto all = enumerate_profiles(grid);
  ASSERT_EQ(all.size(), 81u);
  EXPECT_EQ(all[52], grid.profile(52));
  EXPECT_THROW(enumerate_profiles(grid, 80), ResourceError);
}

TEST(Grid, BudgetAndOverflow) {
  EXPECT_THROW(Grid<Rational>(40, 40, 1000, q(1)), ResourceError);
  const Grid<Rational> big(3, 3, 5, q(1));
  EXPECT_THROW(big.require_enumerable(1000), ResourceError);
  EXPECT_THROW(Grid<Rational>(2, 2, 1, q(1)), ArgumentError);
}

// With the smallest-index tie-break an indifferent non-sink agent always picks
// the first alternative, so the sink preferring the second loses all of M.
TEST(GridSupremum, NrsTieProfileCostsFullRange) {
  const auto v = profile(2, 2, {q(-1, 2), q(-1, 2), q(-1, 2), q(1, 2)});
  const auto o = nrs_mechanism<Rational>()(v);
  EXPECT_EQ(absolute_inefficiency(v, o), q(1, 2));
  EXPECT_EQ(sample_inefficiency_metric<Rational>()(v, o), q(1, 4));
}

TEST(GridSupremum, NrsStrictProfileAtThreeLevels) {
  // agent 1 moves the choice by exactly half the range when removed
  const auto v = profile(2, 2, {q(1, 2), q(-1, 2), q(0), q(1, 2)});
  EXPECT_EQ(sample_inefficiency_metric<Rational>()(v, nrs_mechanism<Rational>()(v)), (q(1) - q(1, 2)) / 4);
}

TEST(GridSupremum, NrsReachesCeilingAtEveryLevel) {
  for (std::size_t k = 2; k <= 6; ++k) {
    const Grid<Rational> grid(2, 2, k, q(1));
    const auto sup = grid_supremum(grid, nrs_mechanism<Rational>(), sample_inefficiency_metric<Rational>());
    EXPECT_EQ(sup.value, q(1, 4)) << "k=" << k;
    const auto& w = sup.argmax;
    const bool tie = w.value(0, 0) == w.value(0, 1) || w.value(1, 0) == w.value(1, 1);
    EXPECT_TRUE(tie) << "k=" << k;
  }
}

TEST(GridSupremum, SingleSinkTwoLevels) {
  const Grid<Rational> grid(2, 2, 2, q(1));
  const auto sup = grid_supremum(grid, single_sink_mechanism<Rational>(0), sample_inefficiency_metric<Rational>());
  EXPECT_EQ(sup.value, q(1, 2));
  const auto vcg_sup = grid_supremum(grid, vcg_mechanism<Rational>(), absolute_inefficiency_metric<Rational>());
  EXPECT_EQ(vcg_sup.value, q(0));
}

TEST(GridSupremum, IndependentOfWorkers) {
  const Grid<Rational> grid(2, 3, 3, q(1));
  const auto one = grid_supremum(grid, nrs_mechanism<Rational>(), sample_inefficiency_metric<Rational>(), {1});
  const auto four = grid_supremum(grid, nrs_mechanism<Rational>(), sample_inefficiency_metric<Rational>(), {4});
  EXPECT_EQ(one.value, four.value);
  EXPECT_EQ(one.argmax_index, four.argmax_index);
}

TEST(GridSupremum, NonDecreasingInAlternatives) {
  const auto m2 = grid_supremum(Grid<Rational>(2, 2, 3, q(1)), nrs_mechanism<Rational>(),
                                sample_inefficiency_metric<Rational>(), {2});
  const auto m3 = grid_supremum(Grid<Rational>(2, 3, 3, q(1)), nrs_mechanism<Rational>(),
                                sample_inefficiency_metric<Rational>(), {2});
  EXPECT_LE(m2.value, m3.value);
}

TEST(ProfileIo, RoundTrip) {
  const auto v = three_agent_profile();
  std::stringstream s;
  write_profile(s, v);
  EXPECT_EQ(read_profile<Rational>(s), v);
}

TEST(ProfileIo, CommentsAndDecimals) {
  std::istringstream in("# header follows\n2 2 1\n0.4 -0.4\n\n-1/10 0.2\n");
  EXPECT_EQ(read_profile<Rational>(in), profile(2, 2, {q(2, 5), q(-2, 5), q(-1, 10), q(1, 5)}));
}

TEST(ProfileIo, ErrorsCarryLineNumbers) {
  std::istringstream short_row("2 2 1\n0 0\n0\n");
  try {
    read_profile<Rational>(short_row);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::istringstream out_of_range("1 2 1\n1 0\n");
  EXPECT_THROW(read_profile<Rational>(out_of_range), ParseError);
  std::istringstream empty("");
  EXPECT_THROW(read_profile<Rational>(empty), ParseError);
}

TEST(Determinism, RepeatedCallsAgree) {
  const auto v = three_agent_profile();
  const auto a = nrs_mechanism<Rational>()(v);
  const auto b = nrs_mechanism<Rational>()(v);
  EXPECT_EQ(a.allocation(3), b.allocation(3));
  EXPECT_EQ(a.expected_payments(3), b.expected_payments(3));
}
