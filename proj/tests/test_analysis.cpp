#include <gtest/gtest.h>

#include "sgrs/analysis.hpp"

using namespace sgrs;

namespace {

RunRecord run_with_steps(std::vector<std::size_t> steps) {
  RunRecord r;
  for (auto s : steps) r.episodes.push_back(EpisodeRecord{s, 0.0, 0.0, 0, false});
  return r;
}

}  // namespace

TEST(MovingAverage, PartialPrefixThenFullWindow) {
  const std::vector<double> x{4, 2, 6, 8, 10};
  const auto m = moving_average(x, 3);
  ASSERT_EQ(m.size(), 5u);
  EXPECT_DOUBLE_EQ(m[0], 4.0);
  EXPECT_DOUBLE_EQ(m[1], 3.0);
  EXPECT_DOUBLE_EQ(m[2], 4.0);
  EXPECT_DOUBLE_EQ(m[3], 16.0 / 3.0);
  EXPECT_DOUBLE_EQ(m[4], 8.0);
  EXPECT_EQ(moving_average(x, 1), x);
  EXPECT_THROW(moving_average(x, 0), DomainError);
  EXPECT_THROW(moving_average(std::vector<double>{}, 2), DomainError);
}

TEST(MovingAverage, PreservesLengthAndRange) {
  SeededRng rng(12);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> x(1 + rng.uniform_index(50));
    for (auto& v : x) v = rng.uniform01() * 1000.0;
    const auto m = moving_average(x, 1 + rng.uniform_index(12));
    ASSERT_EQ(m.size(), x.size());
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    for (double v : m) {
      EXPECT_GE(v, *lo - 1e-9);
      EXPECT_LE(v, *hi + 1e-9);
    }
  }
}

TEST(TimeToThreshold, FirstCrossingOrCensored) {
  const std::vector<double> c{900, 400, 600, 45, 30};
  EXPECT_EQ(time_to_threshold(c, 500).episode_index, 1u);
  EXPECT_EQ(time_to_threshold(c, 50).episode_index, 3u);
  EXPECT_EQ(time_to_threshold(c, 400).episode_index, 1u);
  const auto never = time_to_threshold(c, 10);
  EXPECT_TRUE(never.censored);
  EXPECT_EQ(never.episode_index, c.size());
}

TEST(TimeToThreshold, MonotoneInThreshold) {
  SeededRng rng(21);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> c(30);
    for (auto& v : c) v = rng.uniform01() * 100.0;
    double prev_thr = 0.0;
    std::size_t prev = time_to_threshold(c, prev_thr).episode_index;
    for (double thr = 5.0; thr <= 100.0; thr += 5.0) {
      const auto idx = time_to_threshold(c, thr).episode_index;
      EXPECT_LE(idx, prev);
      prev = idx;
    }
  }
}

TEST(Asymptote, TailMean) {
  std::vector<double> c(100);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = static_cast<double>(i);
  EXPECT_DOUBLE_EQ(asymptotic_performance(c), (95 + 96 + 97 + 98 + 99) / 5.0);
  const std::vector<double> short_curve{10, 20, 30};
  EXPECT_DOUBLE_EQ(asymptotic_performance(short_curve), 30.0);
  EXPECT_DOUBLE_EQ(asymptotic_performance(short_curve, 1.0), 20.0);
  EXPECT_THROW(asymptotic_performance(short_curve, 0.0), DomainError);
}

TEST(Analysis, SamplesAndMeanCurve) {
  const std::vector<RunRecord> runs{run_with_steps({100, 40, 20}), run_with_steps({100, 100, 60})};
  EXPECT_EQ(threshold_sample(runs, 50), (std::vector<double>{1, 3}));
  EXPECT_EQ(mean_curve(runs), (std::vector<double>{100, 70, 40}));
  EXPECT_EQ(threshold_sample(runs, 50, 2), (std::vector<double>{2, 3}));
  const std::vector<RunRecord> ragged{run_with_steps({1, 2}), run_with_steps({1})};
  EXPECT_THROW(mean_curve(ragged), DomainError);
}

TEST(Analysis, DefaultPlans) {
  EXPECT_EQ(default_threshold_plan("four_rooms").thresholds, (std::vector<double>{500, 300, 100, 50}));
  EXPECT_EQ(default_threshold_plan("four_rooms").smooth_window, 1u);
  EXPECT_EQ(default_threshold_plan("pinball").smooth_window, 10u);
  EXPECT_THROW(default_threshold_plan("atari"), ConfigError);
}

TEST(Analysis, TwoGroupsGiveOneWelchPair) {
  const std::vector<std::vector<double>> g{{1, 2, 3, 4, 5}, {2, 3, 4, 5, 6}};
  const auto rep = compare_groups(g, {"hsrs", "sarsa"});
  EXPECT_FALSE(rep.has_anova);
  ASSERT_EQ(rep.pairs.size(), 1u);
  EXPECT_NEAR(rep.pairs[0].test.p, 0.346593507087, 1e-6);
  EXPECT_EQ(rep.pairs[0].adjusted_p, rep.pairs[0].test.p);
}

TEST(GridSearch, SinglePointAndTieBreak) {
  auto base = ExperimentConfig::defaults("four_rooms");
  base.method = Method::Hsrs;
  base.subgoals = SubgoalSeries{{CellMatcher{{3, 6}}, CellMatcher{{7, 9}}}};
  base.episodes = 5;
  base.runs = 2;
  const std::vector<double> one{0.3};
  const auto r = grid_search_eta(base, one, {}, 1);
  EXPECT_EQ(r.best_eta, 0.3);
  ASSERT_EQ(r.table.size(), 1u);
  EXPECT_EQ(r.table[0].mean_curve.size(), 5u);

  const std::vector<double> grid{10.0, 1.0, 0.1};
  const auto tie = grid_search_eta(base, grid, [](std::span<const RunRecord>) { return 1.0; }, 1);
  EXPECT_EQ(tie.best_eta, 0.1);
  const nlohmann::json j = tie;
  EXPECT_EQ(j["table"].size(), 3u);
  EXPECT_THROW(grid_search_eta(base, std::vector<double>{}, {}, 1), ConfigError);
}
