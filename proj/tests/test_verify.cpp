#include <gtest/gtest.h>

#include "sgrs/verify.hpp"

using namespace sgrs;

namespace {

// Two-state chain: 0 -a0-> 1 (reward 1) or 0 -a1-> 0 (reward 0); 1 is terminal.
FiniteMdp tiny() {
  FiniteMdp m;
  m.states = 2;
  m.actions = 2;
  m.gamma = 0.9;
  m.terminal = {false, true};
  m.out.resize(4);
  m.out[0] = {{1, 1.0, 1.0}};
  m.out[1] = {{0, 1.0, 0.0}};
  return m;
}

}  // namespace

TEST(Verify, HistoryPotentialCountsInOrder) {
  HistoryPotential phi{PotentialKind::SubgoalHistory, {2, 3}, {}, 0.5};
  const std::vector<std::size_t> h1{1, 3, 2}, h2{2, 1, 3}, h3{2, 3, 2};
  EXPECT_DOUBLE_EQ(phi(0, h1), 0.5);
  EXPECT_DOUBLE_EQ(phi(0, h2), 1.0);
  EXPECT_DOUBLE_EQ(phi(0, h3), 1.0);
  EXPECT_DOUBLE_EQ(phi(0, std::span<const std::size_t>{}), 0.0);
  HistoryPotential naive{PotentialKind::NaiveState, {2, 3}, {}, 0.5};
  EXPECT_DOUBLE_EQ(naive(0, h1), 0.5);
  EXPECT_DOUBLE_EQ(naive(0, h2), 0.5);
  const std::vector<std::size_t> h4{2, 1};
  EXPECT_DOUBLE_EQ(naive(0, h4), 0.0);
}

TEST(Verify, DecompositionHoldsOnHandBuiltMdp) {
  const auto m = tiny();
  const TabularPolicy pi{0.3, 0.7, 0.5, 0.5};
  const HistoryPotential phi{PotentialKind::SubgoalHistory, {1}, {}, 2.0};
  EXPECT_LE(verify_return_decomposition(m, pi, phi, 6), 1e-12);
  const HistoryPotential table{PotentialKind::Table, {}, {0.7, -3.0}, 1.0};
  EXPECT_LE(verify_return_decomposition(m, pi, table, 6), 1e-12);
}

TEST(Verify, ArgmaxInvarianceOnHandBuiltMdp) {
  const auto m = tiny();
  const auto check = verify_argmax_invariance(m, HistoryPotential{PotentialKind::SubgoalHistory, {1}, {}, 5.0}, 5);
  EXPECT_GT(check.histories, 0u);
  EXPECT_EQ(check.mismatches, 0u);
  EXPECT_LE(check.max_value_error, 1e-12);
}

TEST(Verify, RandomCasesSatisfyBothIdentities) {
  SeededRng rng(2024);
  for (int i = 0; i < 20; ++i) {
    for (auto kind : {PotentialKind::SubgoalHistory, PotentialKind::NaiveState, PotentialKind::Table}) {
      const auto vc = random_verification_case(rng, kind);
      EXPECT_LE(vc.mdp.states, 6u);
      EXPECT_LE(vc.mdp.actions, 3u);
      EXPECT_LE(vc.horizon, 8u);
      EXPECT_LE(verify_return_decomposition(vc.mdp, vc.policy, vc.phi, vc.horizon), 1e-9);
      const auto c = verify_argmax_invariance(vc.mdp, vc.phi, vc.horizon);
      EXPECT_EQ(c.mismatches, 0u);
    }
  }
}

TEST(Verify, ExplosiveTreesAreRefused) {
  FiniteMdp m;
  m.states = 4;
  m.actions = 3;
  m.terminal.assign(4, false);
  m.out.resize(12);
  for (auto& o : m.out) o = {{0, 0.5, 0.0}, {1, 0.5, 0.0}};
  const TabularPolicy pi(12, 1.0 / 3.0);
  EXPECT_THROW(verify_return_decomposition(m, pi, HistoryPotential{}, 8), ResourceError);
}

TEST(Verify, MalformedMdpIsRejected) {
  auto m = tiny();
  m.out[0] = {{1, 0.4, 0.0}};
  EXPECT_THROW(m.validate(), ConfigError);
}

TEST(Verify, WiewioraEquivalenceOnSmallGrid) {
  const auto cfg = FourRoomsConfig::parse("#####\n#S..#\n#...#\n#..G#\n#####\n");
  SeededRng rng(6);
  const auto exp = grid_experience(cfg, 2000, rng);
  std::vector<double> phi(25);
  for (auto& p : phi) p = rng.uniform01() * 4.0 - 2.0;
  EXPECT_LE(verify_wiewiora_equivalence(25, 4, exp, phi, 0.1, 0.95), 1e-9);
  EXPECT_LE(verify_wiewiora_equivalence(25, 4, exp, phi, 0.5, 1.0, 0.3), 1e-9);
  EXPECT_THROW(verify_wiewiora_equivalence(24, 4, exp, phi, 0.1, 0.95), ConfigError);
}
