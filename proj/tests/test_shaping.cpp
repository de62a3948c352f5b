#include <gtest/gtest.h>

#include "sgrs/map.hpp"
#include "sgrs/shaping.hpp"

using namespace sgrs;

namespace {

StateVec cell(int r, int c) { return StateVec::grid({r, c}, 13); }

std::shared_ptr<const SubgoalSeries> hallways() {
  return std::make_shared<const SubgoalSeries>(SubgoalSeries{{CellMatcher{{3, 6}}, CellMatcher{{7, 9}}}});
}

}  // namespace

TEST(SubgoalShaper, RewardsOnlyInOrderAchievements) {
  SubgoalShaper sh(hallways(), 0.5, 0.9);
  sh.reset(cell(1, 1));
  EXPECT_DOUBLE_EQ(sh.step(cell(1, 2)), 0.0);
  // Second subgoal first: no credit, the series is ordered.
  EXPECT_DOUBLE_EQ(sh.step(cell(7, 9)), 0.0);
  EXPECT_EQ(sh.subgoals_achieved(), 0u);
  // First subgoal: F = gamma * eta * 1 - eta * 0.
  EXPECT_DOUBLE_EQ(sh.step(cell(3, 6)), 0.9 * 0.5);
  EXPECT_EQ(sh.subgoals_achieved(), 1u);
  // Later steps without progress: F = gamma * Phi - Phi = (gamma - 1) * eta.
  EXPECT_DOUBLE_EQ(sh.step(cell(3, 7)), (0.9 - 1.0) * 0.5);
  // Revisiting an achieved subgoal adds nothing.
  EXPECT_DOUBLE_EQ(sh.step(cell(3, 6)), (0.9 - 1.0) * 0.5);
  EXPECT_DOUBLE_EQ(sh.step(cell(7, 9)), 0.9 * 1.0 - 0.5);
  EXPECT_EQ(sh.subgoals_achieved(), 2u);
  EXPECT_DOUBLE_EQ(sh.potential(), 1.0);
}

TEST(SubgoalShaper, ResetClearsHistory) {
  SubgoalShaper sh(hallways(), 1.0, 1.0);
  sh.reset(cell(1, 1));
  sh.step(cell(3, 6));
  sh.reset(cell(1, 1));
  EXPECT_EQ(sh.subgoals_achieved(), 0u);
  EXPECT_DOUBLE_EQ(sh.potential(), 0.0);
}

TEST(SubgoalShaper, UndiscountedShapingTelescopes) {
  // With gamma = 1 the summed shaping over an episode is Phi(h_T) - Phi(h_0).
  SubgoalShaper sh(hallways(), 0.01, 1.0);
  sh.reset(cell(1, 1));
  double total = 0.0;
  for (auto s : {cell(2, 1), cell(3, 6), cell(3, 7), cell(7, 9), cell(8, 9), cell(7, 9)}) total += sh.step(s);
  EXPECT_NEAR(total, 0.02, 1e-15);
}

TEST(NaiveShaper, PaysAgainOnEveryReturn) {
  NaiveShaper sh(hallways(), 1.0, 1.0);
  sh.reset(cell(1, 1));
  EXPECT_DOUBLE_EQ(sh.step(cell(3, 6)), 1.0);
  EXPECT_DOUBLE_EQ(sh.step(cell(3, 7)), -1.0);
  EXPECT_DOUBLE_EQ(sh.step(cell(3, 6)), 1.0);
  EXPECT_DOUBLE_EQ(sh.step(cell(7, 9)), 0.0);
  EXPECT_EQ(sh.subgoals_achieved(), 2u);
}

TEST(NaiveShaper, ResetAtSubgoalStartsWithItsPotential) {
  NaiveShaper sh(hallways(), 2.0, 0.5);
  sh.reset(cell(3, 6));
  EXPECT_DOUBLE_EQ(sh.potential(), 2.0);
  EXPECT_DOUBLE_EQ(sh.step(cell(3, 5)), -2.0);
}

TEST(Shaping, RejectsBadParameters) {
  EXPECT_THROW(SubgoalShaper(hallways(), 0.0, 0.9), ConfigError);
  EXPECT_THROW(SubgoalShaper(hallways(), 1.0, 1.5), ConfigError);
  EXPECT_THROW(SubgoalShaper(std::make_shared<const SubgoalSeries>(), 1.0, 0.9), ConfigError);
  EXPECT_THROW(NaiveShaper(std::make_shared<const SubgoalSeries>(), 1.0, 0.9), ConfigError);
}

TEST(RandomSeries, GridDrawsDistinctFreeCells) {
  const auto map = env_map(FourRoomsConfig::canonical());
  SeededRng rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    const auto s = random_series(map, 3, rng);
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s.source, SubgoalSource::Random);
    EXPECT_NO_THROW(validate_series(SubgoalFile{"four_rooms", s}, map));
    const auto a = std::get<CellMatcher>(s[0]).cell, b = std::get<CellMatcher>(s[1]).cell,
               c = std::get<CellMatcher>(s[2]).cell;
    EXPECT_TRUE(a != b && b != c && a != c);
    EXPECT_NE(a, map.grid()->goal);
  }
}

TEST(RandomSeries, ArenaDrawsDiscsInFreeSpace) {
  const auto map = env_map(PinballConfig::default_arena());
  SeededRng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const auto s = random_series(map, 2, rng);
    EXPECT_NO_THROW(validate_series(SubgoalFile{"pinball", s}, map));
    EXPECT_EQ(std::get<DiscMatcher>(s[0]).radius, map.arena()->target_radius);
  }
}

TEST(RandomSeries, SeedDeterminesDraw) {
  const auto map = env_map(FourRoomsConfig::canonical());
  SeededRng a(99), b(99);
  EXPECT_EQ(random_series(map, 2, a), random_series(map, 2, b));
  EXPECT_THROW(random_series(map, 0, a), ConfigError);
}
