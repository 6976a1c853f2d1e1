#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "sinkmech/experiments/experiment.hpp"
#include "sinkmech/experiments/ratings.hpp"
#include "sinkmech/randomized.hpp"

using namespace sinkmech;
using namespace sinkmech::experiments;

namespace {

const char* kMovies =
    "movieId,title,genres\n"
    "1,Toy Story (1995),Adventure|Animation|Children\n"
    "2,\"Heat, The (1995)\",Action|Crime\n";

const char* kRatings =
    "userId,movieId,rating,timestamp\n"
    "1,1,4.0,964982703\n"
    "1,2,0.5,964981247\n"
    "2,1,5.0,964982224\n"
    "2,2,3.5,964983815\n"
    "3,1,1.0,964982931\n"
    "3,2,2.5,964982400\n";

RatingMatrix movielens(const std::string& ratings, const std::optional<std::string>& genre = std::nullopt) {
  std::istringstream r(ratings);
  std::istringstream m(kMovies);
  return load_movielens(r, m, genre);
}

// Complete matrix with users x items entries drawn from a fixed pattern.
RatingMatrix synthetic(std::size_t users, std::size_t items) {
  std::vector<std::string> ids;
  for (std::size_t u = 0; u < users; ++u) ids.push_back(std::to_string(u));
  std::vector<ItemInfo> info;
  for (std::size_t j = 0; j < items; ++j) info.push_back({std::to_string(j), "", {}});
  RatingMatrix m(ids, info, 1.0, 5.0);
  for (std::size_t u = 0; u < users; ++u) {
    for (std::size_t j = 0; j < items; ++j) m.set(u, j, 1.0 + static_cast<double>((u * 7 + j * 3 + u * j) % 9) / 2.0);
  }
  return m;
}

}  // namespace

TEST(MovieLens, TinyFixtureRoundTrip) {
  const auto m = movielens(kRatings);
  ASSERT_EQ(m.user_count(), 3u);
  ASSERT_EQ(m.item_count(), 2u);
  EXPECT_EQ(m.lo(), 0.5);
  EXPECT_EQ(m.hi(), 5.0);
  EXPECT_TRUE(m.complete());
  const double expected[3][2] = {{4.0, 0.5}, {5.0, 3.5}, {1.0, 2.5}};
  for (std::size_t u = 0; u < 3; ++u) {
    for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(*m.at(u, j), expected[u][j]);
  }
  EXPECT_EQ(m.items()[1].title, "Heat, The (1995)");
  EXPECT_EQ(m.items()[0].genres.size(), 3u);
}

TEST(MovieLens, RejectsOutOfScaleWithLine) {
  try {
    movielens(std::string(kRatings) + "4,1,7,0\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 8u);
  }
  EXPECT_THROW(movielens(std::string(kRatings) + "4,99,3,0\n"), ParseError);
  EXPECT_THROW(movielens(std::string(kRatings) + "4,1\n"), ParseError);
  EXPECT_THROW(movielens(std::string(kRatings) + "4,1,abc,0\n"), ParseError);
}

TEST(MovieLens, GenreFilter) {
  const auto action = movielens(kRatings, "Action");
  EXPECT_EQ(action.item_count(), 1u);
  EXPECT_EQ(action.items()[0].id, "2");
  EXPECT_EQ(action.user_count(), 3u);
  EXPECT_THROW(movielens(kRatings, "Western"), ArgumentError);
}

TEST(MovieLens, MissingEntriesStayAbsent) {
  const auto m = movielens("userId,movieId,rating,timestamp\n1,1,3,0\n2,2,4,0\n");
  EXPECT_FALSE(m.complete());
  EXPECT_FALSE(m.at(0, 1).has_value());
  EXPECT_EQ(m.present_count(0), 1u);
}

TEST(Jester, MissingAndBoundaries) {
  std::istringstream in("3,-10.0,99,2.5\n0 99 99 99\n2\t10\t99\t-0.5\n");
  const auto m = load_jester(in);
  ASSERT_EQ(m.user_count(), 3u);
  ASSERT_EQ(m.item_count(), 3u);
  EXPECT_EQ(*m.at(0, 0), -10.0);
  EXPECT_FALSE(m.at(0, 1).has_value());
  for (std::size_t j = 0; j < 3; ++j) EXPECT_FALSE(m.at(1, j).has_value());
  EXPECT_EQ(*m.at(2, 0), 10.0);
  EXPECT_EQ(m.lo(), -10.0);
}

TEST(Jester, MalformedRows) {
  std::istringstream ragged("1,2,3\n1,2\n");
  EXPECT_THROW(load_jester(ragged), ParseError);
  std::istringstream out_of_range("1,11\n");
  EXPECT_THROW(load_jester(out_of_range), ParseError);
  std::istringstream junk("1,x\n");
  EXPECT_THROW(load_jester(junk), ParseError);
}

TEST(Impute, DropsSparseItemsAndFillsFromHistogram) {
  std::vector<std::string> users;
  for (int u = 0; u < 12; ++u) users.push_back(std::to_string(u));
  RatingMatrix m(users, {{"sparse", "", {}}, {"flat", "", {}}, {"mixed", "", {}}}, 1.0, 5.0);
  for (std::size_t u = 0; u < 9; ++u) m.set(u, 0, 2.0);
  for (std::size_t u = 0; u < 10; ++u) m.set(u, 1, 3.0);
  for (std::size_t u = 0; u < 11; ++u) m.set(u, 2, u % 2 ? 1.0 : 5.0);
  const auto out = impute(m, 10, 42);
  ASSERT_EQ(out.item_count(), 2u);
  EXPECT_EQ(out.items()[0].id, "flat");
  EXPECT_TRUE(out.complete());
  for (std::size_t u = 0; u < 12; ++u) {
    EXPECT_EQ(*out.at(u, 0), 3.0);
    const double v = *out.at(u, 1);
    EXPECT_TRUE(v == 1.0 || v == 5.0);
  }
  for (std::size_t u = 0; u < 11; ++u) EXPECT_EQ(*out.at(u, 1), u % 2 ? 1.0 : 5.0);
  EXPECT_THROW(impute(m, 13, 1), DataError);
}

TEST(Impute, CompleteMatrixUnchangedAndWorkerIndependent) {
  const auto m = synthetic(30, 6);
  const auto out = impute(m, 10, 5, 3);
  for (std::size_t u = 0; u < 30; ++u) {
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(*out.at(u, j), *m.at(u, j));
  }
  auto sparse = movielens("userId,movieId,rating,timestamp\n1,1,3,0\n2,2,4,0\n3,1,5,0\n");
  const auto a = impute(sparse, 1, 9, 1);
  const auto b = impute(sparse, 1, 9, 4);
  for (std::size_t u = 0; u < a.user_count(); ++u) {
    for (std::size_t j = 0; j < a.item_count(); ++j) EXPECT_EQ(*a.at(u, j), *b.at(u, j));
  }
}

TEST(Profile, CenteredValues) {
  const auto m = movielens(kRatings);
  const auto v = ratings_to_profile(m, {1}, {0, 1});
  EXPECT_DOUBLE_EQ(v.range(), 4.5);
  EXPECT_DOUBLE_EQ(v.value(0, 0), 2.25);
  EXPECT_DOUBLE_EQ(v.value(0, 1), 0.75);
  const auto custom = ratings_to_profile(m, {0}, {0, 1}, RangeRule{6.0});
  EXPECT_DOUBLE_EQ(custom.range(), 6.0);
  EXPECT_THROW(ratings_to_profile(m, {0}, {0, 1}, RangeRule{2.0}), ArgumentError);

  std::istringstream in("1,0,-10\n");
  const auto jester = load_jester(in);
  const auto j = ratings_to_profile(jester, {0}, {0, 1});
  EXPECT_DOUBLE_EQ(j.range(), 20.0);
  EXPECT_DOUBLE_EQ(j.value(0, 0), 0.0);
}

TEST(Theory, LineValues) {
  EXPECT_DOUBLE_EQ(theory_line(10), 0.05);
  EXPECT_DOUBLE_EQ(theory_line(210), 105.0 / 44100.0);
  EXPECT_DOUBLE_EQ(theory_line(3), 2.0 / 9.0);
}

TEST(Trial, MatchesRandomizedModule) {
  const auto m = synthetic(40, 5);
  std::mt19937_64 rng(17);
  for (int t = 0; t < 30; ++t) {
    const auto users = experiments::detail::sample_indices(40, 2 + t % 9, rng);
    const auto items = experiments::detail::sample_indices(5, 2 + t % 3, rng);
    const auto v = ratings_to_profile(m, users, items);
    const auto trial = nrs_trial(v);
    const double mixture = sample_inefficiency_normalize(absolute_inefficiency(v, nrs_mechanism<double>()(v)),
                                                         v.agents(), v.range());
    EXPECT_NEAR(trial.expected, mixture, 1e-12);
    EXPECT_GE(trial.worst, trial.expected - 1e-15);
    EXPECT_GE(trial.expected, 0.0);
    EXPECT_LE(trial.worst, 1.0);
  }
}

TEST(Trial, ConstantGroupIsEfficient) {
  std::vector<std::string> users{"a", "b", "c"};
  RatingMatrix m(users, {{"1", "", {}}, {"2", "", {}}}, 1.0, 5.0);
  for (std::size_t u = 0; u < 3; ++u) {
    m.set(u, 0, 4.0);
    m.set(u, 1, 4.0);
  }
  const auto t = nrs_trial(ratings_to_profile(m, {0, 1, 2}, {0, 1}));
  EXPECT_EQ(t.expected, 0.0);
  EXPECT_EQ(t.worst, 0.0);
}

TEST(Sampling, DistinctSortedIndices) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 50; ++t) {
    const auto idx = experiments::detail::sample_indices(30, 12, rng);
    ASSERT_EQ(idx.size(), 12u);
    for (std::size_t i = 1; i < idx.size(); ++i) ASSERT_LT(idx[i - 1], idx[i]);
    ASSERT_LT(idx.back(), 30u);
  }
  const auto [mean, sd] = experiments::detail::mean_std({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(mean, 2.5);
  EXPECT_NEAR(sd, std::sqrt(5.0 / 3.0), 1e-12);
}

TEST(Run, DeterministicAcrossWorkersAndRuns) {
  const auto m = synthetic(80, 7);
  ExperimentConfig config;
  config.dataset = "synthetic";
  config.sizes = {5, 20, 40};
  config.trials = 12;
  config.seed = 99;
  std::string first;
  for (std::size_t workers : {1u, 3u, 8u}) {
    config.workers = workers;
    std::ostringstream out;
    write_results_csv(out, {run_experiment(m, config)});
    if (first.empty()) first = out.str();
    EXPECT_EQ(out.str(), first) << "workers=" << workers;
  }
  const auto r = run_experiment(m, config);
  ASSERT_EQ(r.sizes.size(), 3u);
  for (const auto& s : r.sizes) {
    EXPECT_EQ(s.per_trial.size(), 12u);
    EXPECT_DOUBLE_EQ(s.theory_line, theory_line(s.n));
    EXPECT_GE(s.mean_worst, s.mean_expected);
    for (const auto& t : s.per_trial) {
      EXPECT_GE(t.expected, 0.0);
      EXPECT_LE(t.worst, 1.0);
      EXPECT_GE(t.worst, t.expected - 1e-15);
    }
  }
}

TEST(Run, Validation) {
  const auto m = synthetic(10, 3);
  ExperimentConfig config;
  config.sizes = {11};
  EXPECT_THROW(run_experiment(m, config), ArgumentError);
  config.sizes = {1};
  EXPECT_THROW(run_experiment(m, config), ArgumentError);
  config.sizes = {5};
  config.trials = 0;
  EXPECT_THROW(run_experiment(m, config), ArgumentError);
  config.trials = 1;
  config.alternatives = 4;
  EXPECT_THROW(run_experiment(m, config), ArgumentError);
  EXPECT_THROW(run_experiment(movielens("userId,movieId,rating,timestamp\n1,1,3,0\n2,2,4,0\n"), ExperimentConfig{}),
               ArgumentError);
}

TEST(Output, CsvTables) {
  std::ostringstream empty;
  write_results_csv(empty, {});
  EXPECT_EQ(empty.str(), std::string(kResultsHeader) + "\n");

  ExperimentConfig config;
  config.dataset = "synthetic";
  config.sizes = {4, 8};
  config.trials = 3;
  const auto r = run_experiment(synthetic(20, 4), config);
  std::ostringstream out;
  write_results_csv(out, {r});
  const auto text = out.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  std::istringstream in(text);
  const auto back = read_results_csv(in);
  ASSERT_EQ(back.size(), 1u);
  ASSERT_EQ(back[0].sizes.size(), 2u);
  EXPECT_EQ(back[0].dataset, "synthetic");
  EXPECT_NEAR(back[0].sizes[1].mean_expected, r.sizes[1].mean_expected, 1e-9);
  std::istringstream bad("not,a,header\n");
  EXPECT_THROW(read_results_csv(bad), ParseError);
}

TEST(Output, SvgPolylinePerSeries) {
  auto count = [](const std::string& s, const std::string& what) {
    std::size_t n = 0;
    for (auto pos = s.find(what); pos != std::string::npos; pos = s.find(what, pos + 1)) ++n;
    return n;
  };
  ExperimentConfig config;
  config.sizes = {4, 8, 12};
  config.trials = 3;
  config.dataset = "one";
  const auto a = run_experiment(synthetic(20, 4), config);
  config.dataset = "two";
  const auto b = run_experiment(synthetic(20, 4), config);
  std::ostringstream one;
  write_results_svg(one, {a});
  EXPECT_EQ(count(one.str(), "<polyline"), 3u);
  std::ostringstream two;
  write_results_svg(two, {a, b});
  EXPECT_EQ(count(two.str(), "<polyline"), 5u);
  EXPECT_EQ(two.str().rfind("<svg", 0), 0u);
  std::ostringstream none;
  write_results_svg(none, {});
  EXPECT_EQ(count(none.str(), "<polyline"), 1u);
}
