#include <gtest/gtest.h>

#include <random>

#include "sinkmech/grid.hpp"
#include "sinkmech/mechanisms.hpp"
#include "sinkmech/verify.hpp"

using namespace sinkmech;

namespace {

Rational q(long p, long d = 1) { return ratio<Rational>(p, d); }

ValuationProfile<Rational> profile(std::size_t n, std::size_t m, std::vector<Rational> v, Rational range = q(1)) {
  return ValuationProfile<Rational>(n, m, range, std::move(v));
}

ValuationProfile<Rational> vcg_example() { return profile(2, 2, {q(2, 5), q(-2, 5), q(-1, 10), q(1, 5)}); }

// Exhaustive argmax with smallest-index ties, written independently of core.
std::size_t brute_argmax(const ValuationProfile<Rational>& v) {
  std::size_t best = 0;
  Rational best_w;
  for (std::size_t a = 0; a < v.alternatives(); ++a) {
    Rational w = 0;
    for (std::size_t i = 0; i < v.agents(); ++i) w += v.value(i, a);
    if (a == 0 || w > best_w) {
      best_w = w;
      best = a;
    }
  }
  return best;
}

}  // namespace

TEST(AffineMaximizer, UnitWeightsMatchEfficient) {
  const Grid<Rational> grid(2, 3, 3, q(1));
  const auto am = AffineMaximizer<Rational>::neutral({q(1), q(1)}, 3);
  EXPECT_TRUE(am.is_neutral());
  for (std::uint64_t idx = 0; idx < grid.profile_count(); ++idx) {
    const auto v = grid.profile(idx);
    ASSERT_EQ(affine_maximizer_choose(am, v), efficient_alternative(v));
  }
}

TEST(AffineMaximizer, ZeroWeightAgentIgnored) {
  const auto am = AffineMaximizer<Rational>::neutral({q(1), q(0)}, 2);
  for (const auto& second : {std::vector<Rational>{q(1, 2), q(-1, 2)}, std::vector<Rational>{q(0), q(0)}}) {
    const auto v = profile(2, 2, {q(1, 10), q(1, 5), second[0], second[1]});
    EXPECT_EQ(affine_maximizer_choose(am, v).index, 1u);
  }
}

TEST(AffineMaximizer, WeightedScores) {
  const auto am = AffineMaximizer<Rational>::neutral({q(2), q(1)}, 2);
  const auto v = profile(2, 2, {q(3, 10), q(-3, 10), q(-2, 5), q(2, 5)});
  EXPECT_EQ(am.score(v, 0), q(1, 5));
  EXPECT_EQ(am.score(v, 1), q(-1, 5));
  EXPECT_EQ(affine_maximizer_choose(am, v).index, 0u);
}

TEST(AffineMaximizer, OffsetAndValidation) {
  const AffineMaximizer<Rational> am({q(1), q(1)}, {q(0), q(1)});
  EXPECT_FALSE(am.is_neutral());
  EXPECT_EQ(affine_maximizer_choose(am, vcg_example()).index, 1u);
  EXPECT_THROW(AffineMaximizer<Rational>::neutral({q(0), q(0)}, 2), ArgumentError);
  EXPECT_THROW(AffineMaximizer<Rational>::neutral({q(1), q(-1)}, 2), ArgumentError);
  const auto three = AffineMaximizer<Rational>::neutral({q(1), q(1), q(1)}, 2);
  EXPECT_THROW(affine_maximizer_choose(three, vcg_example()), ArgumentError);
}

TEST(Vcg, ClarkeExample) {
  const auto o = vcg(vcg_example());
  EXPECT_EQ(o.alternative.index, 0u);
  EXPECT_EQ(o.payments, (std::vector<Rational>{q(3, 10), q(0)}));
  EXPECT_EQ(o.surplus(), q(3, 10));
}

TEST(Vcg, SingleAgentAndAgreement) {
  const auto lone = vcg(profile(1, 3, {q(0), q(1, 2), q(-1, 2)}));
  EXPECT_EQ(lone.alternative.index, 1u);
  EXPECT_EQ(lone.payments, std::vector<Rational>{q(0)});
  const auto agree = vcg(profile(3, 2, {q(1, 2), q(0), q(1, 4), q(0), q(1, 10), q(-1, 10)}));
  EXPECT_EQ(agree.alternative.index, 0u);
  for (const auto& p : agree.payments) EXPECT_EQ(p, q(0));
}

TEST(Vcg, EfficientAndNonnegativeOnGrid) {
  const Grid<Rational> grid(3, 2, 3, q(1));
  for (std::uint64_t idx = 0; idx < grid.profile_count(); ++idx) {
    const auto v = grid.profile(idx);
    const auto o = vcg(v);
    ASSERT_EQ(o.alternative.index, brute_argmax(v));
    for (const auto& p : o.payments) ASSERT_GE(p, q(0));
  }
}

TEST(SingleSink, ThirdAgentSinkIgnoresItsRow) {
  for (const auto& row : {std::vector<Rational>{q(1, 2), q(-1, 2)}, std::vector<Rational>{q(-1, 2), q(1, 2)}}) {
    const auto v = profile(3, 2, {q(2, 5), q(-2, 5), q(-1, 10), q(1, 5), row[0], row[1]});
    const auto o = single_sink(SinkSpec{2}, v);
    EXPECT_EQ(o.alternative.index, 0u);
    EXPECT_EQ(o.payments, (std::vector<Rational>{q(3, 10), q(0), q(-3, 10)}));
  }
}

TEST(SingleSink, TwoAgents) {
  const auto o = single_sink(SinkSpec{0}, vcg_example());
  EXPECT_EQ(o.alternative.index, 1u);
  EXPECT_EQ(o.payments, (std::vector<Rational>{q(0), q(0)}));
  EXPECT_THROW(single_sink(SinkSpec{0}, profile(1, 2, {q(0), q(0)})), ArgumentError);
  EXPECT_THROW(single_sink(SinkSpec{2}, vcg_example()), ArgumentError);
}

TEST(SingleSink, PaymentsSumToZeroOnGrid) {
  const Grid<Rational> grid(3, 2, 3, q(1));
  for (std::size_t sink = 0; sink < 3; ++sink) {
    for (std::uint64_t idx = 0; idx < grid.profile_count(); ++idx) {
      ASSERT_EQ(single_sink(SinkSpec{sink}, grid.profile(idx)).surplus(), q(0));
    }
  }
}

TEST(SingleSink, FloatSurplusWithinTolerance) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> values(4 * 3);
    for (auto& x : values) x = u(rng);
    const ValuationProfile<double> v(4, 3, 1.0, values);
    EXPECT_LT(std::abs(single_sink(SinkSpec{1}, v).surplus()), 1e-12);
  }
}

TEST(SingleSink, ChoiceInvariantToSinkRow) {
  const Grid<Rational> grid(3, 3, 3, q(1));
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::uint64_t> pick_profile(0, grid.profile_count() - 1);
  std::uniform_int_distribution<std::uint64_t> pick_row(0, grid.row_count() - 1);
  for (int t = 0; t < 300; ++t) {
    const auto v = grid.profile(pick_profile(rng));
    const std::size_t sink = static_cast<std::size_t>(t % 3);
    const auto row = grid.row_values(pick_row(rng));
    const auto w = v.with_row(sink, row);
    ASSERT_EQ(single_sink(SinkSpec{sink}, v).alternative, single_sink(SinkSpec{sink}, w).alternative);
  }
}

TEST(SingleSink, NeutralOnUniqueArgmaxProfiles) {
  const Grid<Rational> grid(3, 3, 3, q(1));
  EXPECT_TRUE(check_neutrality(single_sink_mechanism<Rational>(0), grid, {4}).empty());
}

TEST(WorstCaseSingleSink, LosesNearlyM) {
  const auto v = worst_case_profile_single_sink(2, 2, q(1), q(1, 1000));
  const auto o = single_sink(SinkSpec{0}, v);
  EXPECT_GE(absolute_inefficiency(v, o), q(997, 1000));
  EXPECT_EQ(absolute_inefficiency(v, o), q(1) - q(5, 2) * q(1, 1000));
}

TEST(WorstCaseSingleSink, SampleInefficiencyApproachesOneOverN) {
  for (std::size_t n : {2u, 3u, 5u, 10u}) {
    Rational previous = 0;
    for (long d : {100L, 1000L, 10000L}) {
      const auto v = worst_case_profile_single_sink(n, 3, q(1), q(1, d));
      const auto loss = absolute_inefficiency(v, single_sink(SinkSpec{0}, v));
      EXPECT_GE(loss, q(1) - 3 * q(1, d));
      const auto sample = sample_inefficiency_normalize(loss, n, q(1));
      EXPECT_GT(sample, previous);
      EXPECT_LT(sample, q(1, static_cast<long>(n)));
      previous = sample;
    }
  }
}

TEST(WorstCaseSingleSink, OtherSinksAndRanges) {
  const auto v = worst_case_profile_single_sink(4, 2, q(3), q(1, 100), 2);
  EXPECT_GE(absolute_inefficiency(v, single_sink(SinkSpec{2}, v)), q(3) - q(3, 100));
}

TEST(WorstCaseSingleSink, RejectsBadMargin) {
  EXPECT_THROW(worst_case_profile_single_sink(2, 2, q(1), q(0)), ArgumentError);
  EXPECT_THROW(worst_case_profile_single_sink(2, 2, q(1), q(1, 4)), ArgumentError);
  EXPECT_THROW(worst_case_profile_single_sink(1, 2, q(1), q(1, 100)), ArgumentError);
}

TEST(UnequalWeights, ExceedsM) {
  const Rational eps = q(1, 1000);
  const auto v = unequal_weights_counterexample(3, 2, q(1), q(2), q(1), eps);
  const auto am = sink_affine_maximizer(3, 2, q(2), q(1));
  const Outcome<Rational> o{affine_maximizer_choose(am, v), {q(0), q(0), q(0)}};
  const auto loss = absolute_inefficiency(v, o);
  EXPECT_GT(loss, q(1));
  // M + (1 - w_low / w_high) M, minus the margins
  EXPECT_GE(loss, q(1) + (q(1) - q(1, 2)) - 3 * eps);
}

TEST(UnequalWeights, ExcessShrinksAsWeightsEqualize) {
  Rational previous = q(2);
  for (long low : {1L, 5L, 9L}) {
    const Rational w_low = q(low, 10);
    const auto v = unequal_weights_counterexample(4, 2, q(1), q(1), w_low, q(1, 1000));
    const auto am = sink_affine_maximizer(4, 2, q(1), w_low);
    const Outcome<Rational> o{affine_maximizer_choose(am, v), std::vector<Rational>(4, q(0))};
    const auto loss = absolute_inefficiency(v, o);
    EXPECT_LT(loss, previous);
    EXPECT_GT(loss, q(1));
    previous = loss;
  }
}

TEST(UnequalWeights, RejectsEqualWeights) {
  EXPECT_THROW(unequal_weights_counterexample(3, 2, q(1), q(1), q(1), q(1, 1000)), ArgumentError);
  EXPECT_THROW(unequal_weights_counterexample(3, 2, q(1), q(1), q(2), q(1, 1000)), ArgumentError);
  EXPECT_THROW(unequal_weights_counterexample(2, 2, q(1), q(2), q(1), q(1, 1000)), ArgumentError);
}

TEST(ConstantMechanism, AlwaysFirst) {
  const auto o = constant_mechanism<Rational>()(vcg_example());
  ASSERT_EQ(o.support.size(), 1u);
  EXPECT_EQ(o.support[0].outcome.alternative.index, 0u);
}
