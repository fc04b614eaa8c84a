#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "qnpg/environments.hpp"

using namespace qnpg;

namespace {

EnvState state_of(EnvKind kind, std::array<double, 4> s) {
  EnvState st;
  st.kind = kind;
  st.s = s;
  return st;
}

} // namespace

TEST(Reset, RangesAndDeterminism) {
  for (EnvKind kind : {EnvKind::CartPole, EnvKind::Acrobot}) {
    const double bound = kind == EnvKind::CartPole ? 0.05 : 0.1;
    Rng rng(7);
    for (int i = 0; i < 1000; ++i) {
      const auto st = reset(kind, rng);
      EXPECT_EQ(st.step_count, 0);
      EXPECT_FALSE(st.done);
      for (double x : st.s) {
        EXPECT_GE(x, -bound);
        EXPECT_LE(x, bound);
      }
    }
    Rng a(99), b(99);
    EXPECT_EQ(reset(kind, a).s, reset(kind, b).s);
  }
}

TEST(CartPole, PushRightFromRest) {
  const auto [next, r] = step(state_of(EnvKind::CartPole, {0, 0, 0, 0}), 1);
  EXPECT_DOUBLE_EQ(next.s[0], 0.0);
  EXPECT_GT(next.s[1], 0.0);
  EXPECT_LT(next.s[3], 0.0); // the pole tips backwards
  EXPECT_DOUBLE_EQ(r.reward, 1.0);
  EXPECT_FALSE(r.done);
  EXPECT_EQ(next.step_count, 1);
}

TEST(CartPole, BalancedEpisodeRunsToHorizon) {
  // Push towards the side the pole is falling to, with a little centring.
  EnvState st = state_of(EnvKind::CartPole, {0, 0, 0, 0});
  double total = 0.0;
  int steps = 0;
  while (!st.done) {
    const double u = st.s[2] + 0.5 * st.s[3] + 0.01 * st.s[0] + 0.1 * st.s[1];
    auto [next, r] = step(st, u > 0.0 ? 1u : 0u);
    total += r.reward;
    st = next;
    ++steps;
  }
  EXPECT_EQ(steps, 200);
  EXPECT_DOUBLE_EQ(total, 200.0);
}

TEST(CartPole, TerminatesWhenThePoleFalls) {
  EnvState st = state_of(EnvKind::CartPole, {0, 0, 0, 0});
  int steps = 0;
  while (!st.done) {
    st = step(st, 1).first;
    ++steps;
  }
  EXPECT_LT(steps, 200);
  EXPECT_TRUE(std::abs(st.s[2]) > 12.0 * std::numbers::pi / 180.0 || std::abs(st.s[0]) > 2.4);
}

TEST(Step, Rejections) {
  auto st = state_of(EnvKind::CartPole, {0, 0, 0, 0});
  EXPECT_THROW(step(st, 2), std::invalid_argument);
  EXPECT_THROW(step(state_of(EnvKind::Acrobot, {0, 0, 0, 0}), 3), std::invalid_argument);
  st.done = true;
  EXPECT_THROW(step(st, 0), std::logic_error);
}

TEST(Acrobot, HangingRestRewardAndStillness) {
  EnvState st = state_of(EnvKind::Acrobot, {0, 0, 0, 0});
  for (int i = 0; i < 20; ++i) {
    auto [next, r] = step(st, 1); // zero torque
    EXPECT_DOUBLE_EQ(r.reward, -3.0);
    for (double x : next.s) EXPECT_NEAR(x, 0.0, 1e-12);
    st = next;
  }
}

TEST(Acrobot, RewardStaysInRangeAndHorizonIs500) {
  Rng rng(3);
  EnvState st = reset(EnvKind::Acrobot, rng);
  int steps = 0;
  while (!st.done) {
    auto [next, r] = step(st, static_cast<std::size_t>((steps / 3) % 3));
    EXPECT_GE(r.reward, -3.0);
    EXPECT_LE(r.reward, 0.0 + 1e-12 + (r.done ? 1.0 : 0.0));
    for (int i = 0; i < 2; ++i) {
      EXPECT_GT(next.s[static_cast<std::size_t>(i)], -std::numbers::pi);
      EXPECT_LE(next.s[static_cast<std::size_t>(i)], std::numbers::pi);
    }
    st = next;
    ++steps;
  }
  EXPECT_LE(steps, 500);
}

TEST(Features, Shapes) {
  EXPECT_EQ(features(state_of(EnvKind::CartPole, {0, 0, 0, 0})), (std::array<double, 4>{0, 0, 0, 0}));
  const auto top = features(state_of(EnvKind::Acrobot, {0.3, -0.2, 4 * std::numbers::pi, -9 * std::numbers::pi}));
  EXPECT_DOUBLE_EQ(top[0], 0.3);
  EXPECT_DOUBLE_EQ(top[1], -0.2);
  EXPECT_DOUBLE_EQ(top[2], 1.0);
  EXPECT_DOUBLE_EQ(top[3], -1.0);
}

TEST(Determinism, SameSeedAndActionsSameTrajectory) {
  for (EnvKind kind : {EnvKind::CartPole, EnvKind::Acrobot}) {
    Rng a(5), b(5);
    EnvState sa = reset(kind, a), sb = reset(kind, b);
    int t = 0;
    while (!sa.done) {
      const auto action = static_cast<std::size_t>((t * 7 + 3) % static_cast<int>(action_count(kind)));
      auto [na, ra] = step(sa, action);
      auto [nb, rb] = step(sb, action);
      EXPECT_EQ(na.s, nb.s);
      EXPECT_EQ(ra.reward, rb.reward);
      sa = na;
      sb = nb;
      ++t;
    }
    EXPECT_TRUE(sb.done);
  }
}
