#include <gtest/gtest.h>

#include "sgrs/map.hpp"
#include "sgrs/pinball.hpp"

using namespace sgrs;

namespace {

PinballConfig empty_arena() {
  PinballConfig c;
  c.obstacles.clear();
  c.start = {0.5, 0.5};
  c.target_center = {0.1, 0.9};
  c.drag = 1.0;
  return c;
}

}  // namespace

TEST(Pinball, FreeFlightAdvancesByVelocity) {
  const PinballDynamics dyn(empty_arena());
  const auto s = dyn.step({0.5, 0.5, 0.0, 0.0}, PinballAction::PushRight);
  EXPECT_NEAR(s.ball.vx, 0.2, 1e-15);
  EXPECT_NEAR(s.ball.x, 0.5 + 0.2 * 0.05, 1e-12);
  EXPECT_NEAR(s.ball.y, 0.5, 1e-15);
  EXPECT_FALSE(s.terminal);
}

TEST(Pinball, DragScalesVelocity) {
  auto cfg = empty_arena();
  cfg.drag = 0.9;
  const PinballDynamics dyn(cfg);
  const auto s = dyn.step({0.5, 0.5, 0.4, -0.2}, PinballAction::None);
  EXPECT_NEAR(s.ball.vx, 0.36, 1e-15);
  EXPECT_NEAR(s.ball.vy, -0.18, 1e-15);
}

TEST(Pinball, VelocityIsClamped) {
  const PinballDynamics dyn(empty_arena());
  const auto s = dyn.step({0.5, 0.5, 0.95, -1.0}, PinballAction::PushRight);
  EXPECT_EQ(s.ball.vx, 1.0);
  EXPECT_EQ(s.ball.vy, -1.0);
}

TEST(Pinball, ElasticBounceOffWall) {
  const PinballDynamics dyn(empty_arena());
  // Radius 0.02: the ball touches the right wall when x reaches 0.98.
  const auto s = dyn.step({0.97, 0.5, 1.0, 0.0}, PinballAction::None);
  EXPECT_NEAR(s.ball.vx, -1.0, 1e-12);
  EXPECT_NEAR(s.ball.x, 0.98 - 0.04, 1e-9);
}

TEST(Pinball, ObliqueBounceKeepsSpeed) {
  const PinballDynamics dyn(empty_arena());
  const auto s = dyn.step({0.5, 0.97, 0.3, 0.8}, PinballAction::None);
  EXPECT_NEAR(std::hypot(s.ball.vx, s.ball.vy), std::hypot(0.3, 0.8), 1e-12);
  EXPECT_LT(s.ball.vy, 0.0);
  EXPECT_NEAR(s.ball.vx, 0.3, 1e-12);
}

TEST(Pinball, TargetTerminatesWithGoalReward) {
  auto cfg = empty_arena();
  cfg.target_center = {0.52, 0.5};
  const PinballDynamics dyn(cfg);
  const auto s = dyn.step({0.5, 0.5, 0.0, 0.0}, PinballAction::PushRight);
  EXPECT_TRUE(s.terminal);
  EXPECT_EQ(s.reward, 10000.0);
}

TEST(Pinball, BallNeverEntersObstacles) {
  Pinball env;
  SeededRng rng(3);
  const auto& cfg = env.config();
  for (int episode = 0; episode < 5; ++episode) {
    env.reset();
    for (int t = 0; t < 2000; ++t) {
      const auto r = env.step(rng.uniform_index(kPinballActionCount), rng);
      const Vec2 p{env.ball().x, env.ball().y};
      ASSERT_FALSE(cfg.inside_obstacle(p));
      ASSERT_GE(cfg.clearance(p), cfg.ball_radius - 1e-9) << "t=" << t;
      if (r.terminal) break;
    }
  }
}

TEST(Pinball, DeterministicGivenActions) {
  Pinball a, b;
  SeededRng r1(9), r2(9), actions(4);
  for (int t = 0; t < 500; ++t) {
    const auto act = actions.uniform_index(kPinballActionCount);
    a.step(act, r1);
    b.step(act, r2);
  }
  EXPECT_EQ(a.ball().x, b.ball().x);
  EXPECT_EQ(a.ball().vy, b.ball().vy);
}

TEST(Pinball, DefaultArenaIsValidAndRingShaped) {
  const auto cfg = PinballConfig::default_arena();
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_TRUE(cfg.is_free(cfg.start));
  EXPECT_TRUE(cfg.is_free(cfg.target_center));
  EXPECT_FALSE(cfg.is_free({0.5, 0.5}));
  // Branch-point gaps on the lower and right sides are passable.
  EXPECT_TRUE(cfg.is_free({0.5, 0.125}));
  EXPECT_TRUE(cfg.is_free({0.875, 0.5}));
}

TEST(Pinball, ShippedArenaFileMatchesDefault) {
  const auto file = PinballConfig::load(std::string(SGRS_DATA_DIR) + "/pinball_default.json");
  EXPECT_EQ(nlohmann::json(file), nlohmann::json(PinballConfig::default_arena()));
}

TEST(Pinball, ConfigJsonRoundTrip) {
  const auto cfg = PinballConfig::default_arena();
  const nlohmann::json j = cfg;
  EXPECT_EQ(nlohmann::json(j.get<PinballConfig>()), j);
}

TEST(Pinball, RejectsInvalidConfigs) {
  auto bad = PinballConfig::default_arena();
  bad.start = {0.5, 0.5};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = PinballConfig::default_arena();
  bad.drag = 0.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = PinballConfig::default_arena();
  bad.obstacles.push_back(Polygon{{{0.3, 0.3}, {0.4, 0.4}, {0.4, 0.3}, {0.3, 0.4}}});
  EXPECT_THROW(bad.validate(), ConfigError);
  EXPECT_THROW(nlohmann::json::parse(R"({"obstacles": [[[0, 0], [1]]]})").get<PinballConfig>(), ConfigError);
}

TEST(MapDescriptor, ArenaJsonRoundTrip) {
  const auto m = env_map(PinballConfig::default_arena());
  const nlohmann::json j = m;
  EXPECT_EQ(j.get<MapDescriptor>(), m);
  EXPECT_EQ(j.at("kind"), "arena");
}
