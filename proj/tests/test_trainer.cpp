#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "qnpg/trainer.hpp"

using namespace qnpg;

namespace {

TrajectoryStep make_step(double reward, Eigen::VectorXd g) {
  TrajectoryStep s;
  s.reward = reward;
  s.log_grad = std::move(g);
  return s;
}

Episode episode_of(std::vector<double> rewards, const Eigen::VectorXd &g) {
  Episode e;
  for (double r : rewards) e.steps.push_back(make_step(r, g));
  return e;
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.env = EnvKind::CartPole;
  c.ansatz = {2, 1, Encoding::YZ};
  c.policy = {PolicyKind::Softmax, Partition::single_qubit(0), {BetaSchedule::Kind::Constant, 2.0, 0}};
  c.optimizer.eta = 0.05;
  c.batch_size = 3;
  c.episodes = 9;
  c.seeds = {1};
  c.diagnostics_every = 1;
  return c;
}

} // namespace

TEST(Returns, SingleEpisodeUndiscounted) {
  TrajectoryBatch b;
  b.episodes.push_back(episode_of({1, 1, 1}, Eigen::Vector2d(1, 0)));
  returns_and_baseline(b, 1.0);
  EXPECT_EQ(b.episodes[0].returns, (std::vector<double>{3, 2, 1}));
  EXPECT_EQ(b.baseline, (std::vector<double>{3, 2, 1}));
}

TEST(Returns, DiscountedRecursion) {
  TrajectoryBatch b;
  b.episodes.push_back(episode_of({1, 2, 4}, Eigen::Vector2d(1, 0)));
  returns_and_baseline(b, 0.5);
  const auto &g = b.episodes[0].returns;
  EXPECT_DOUBLE_EQ(g[2], 4.0);
  EXPECT_DOUBLE_EQ(g[1], 2.0 + 0.5 * 4.0);
  EXPECT_DOUBLE_EQ(g[0], 1.0 + 0.5 * g[1]);
  EXPECT_THROW(returns_and_baseline(b, 0.0), std::invalid_argument);
}

TEST(Returns, BaselineAveragesOnlyEpisodesStillRunning) {
  TrajectoryBatch b;
  b.episodes.push_back(episode_of({1, 1, 1}, Eigen::Vector2d(1, 0)));
  b.episodes.push_back(episode_of({1}, Eigen::Vector2d(1, 0)));
  returns_and_baseline(b, 1.0);
  EXPECT_EQ(b.baseline, (std::vector<double>{2, 2, 1}));
}

TEST(PolicyGradient, SingleEpisodeWithItsOwnBaselineIsZero) {
  TrajectoryBatch b;
  b.episodes.push_back(episode_of({1, 1, 1}, Eigen::Vector2d(1, -2)));
  returns_and_baseline(b, 1.0);
  EXPECT_TRUE(policy_gradient(b).isZero());
}

TEST(PolicyGradient, IdenticalEpisodesCancel) {
  TrajectoryBatch b;
  for (int i = 0; i < 4; ++i) b.episodes.push_back(episode_of({1, 0.5}, Eigen::Vector3d(0.3, -1, 2)));
  returns_and_baseline(b, 0.9);
  EXPECT_LT(policy_gradient(b).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PolicyGradient, TwoOneStepEpisodesByHand) {
  // Returns 2 and 0, baseline 1: (1/2)[(2-1)(1,0) + (0-1)(0,1)] = (0.5, -0.5).
  TrajectoryBatch b;
  b.episodes.push_back(episode_of({2}, Eigen::Vector2d(1, 0)));
  b.episodes.push_back(episode_of({0}, Eigen::Vector2d(0, 1)));
  returns_and_baseline(b, 1.0);
  const Eigen::VectorXd g = policy_gradient(b);
  EXPECT_DOUBLE_EQ(g(0), 0.5);
  EXPECT_DOUBLE_EQ(g(1), -0.5);
}

TEST(PolicyGradient, RequiresReturns) {
  TrajectoryBatch b;
  b.episodes.push_back(episode_of({1}, Eigen::Vector2d(1, 0)));
  EXPECT_THROW(policy_gradient(b), std::logic_error);
  EXPECT_THROW(policy_gradient(TrajectoryBatch{}), std::invalid_argument);
}

TEST(CollectBatch, EpisodesEndWithinHorizonAndReplay) {
  const auto ansatz = reuploading_ansatz(4, 4);
  const PolicySpec policy{PolicyKind::Softmax, Partition::single_qubit(0), {}};
  const Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ansatz.n_params()));
  const auto a = collect_batch(EnvKind::CartPole, policy, ansatz, theta, 2, 1.0, 17, 0, GradientMethod::Adjoint);
  const auto b = collect_batch(EnvKind::CartPole, policy, ansatz, theta, 2, 1.0, 17, 0, GradientMethod::Adjoint);
  ASSERT_EQ(a.episodes.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_LE(a.episodes[i].steps.size(), 200u);
    ASSERT_EQ(a.episodes[i].steps.size(), b.episodes[i].steps.size());
    for (std::size_t t = 0; t < a.episodes[i].steps.size(); ++t) {
      EXPECT_EQ(a.episodes[i].steps[t].action, b.episodes[i].steps[t].action);
      EXPECT_EQ(a.episodes[i].steps[t].features, b.episodes[i].steps[t].features);
    }
  }
  // Episode i draws from substream (seed, first_episode + i), so a batch that
  // starts one episode later reproduces the second episode first.
  const auto shifted =
      collect_batch(EnvKind::CartPole, policy, ansatz, theta, 1, 1.0, 17, 1, GradientMethod::Adjoint);
  EXPECT_EQ(shifted.episodes[0].steps.size(), a.episodes[1].steps.size());
}

TEST(CollectBatch, ZeroInitSoftmaxSamplesUniformly) {
  // Zero parameters give preferences (p, 1 - p) on one qubit, and the two
  // softmax weights differ by beta |1 - 2p|. The phase-only encoding keeps
  // p = 1/2 exactly, so the sampled actions must look like fair coin flips.
  const auto ansatz = reuploading_ansatz(4, 4, 4, Encoding::Phase);
  const PolicySpec policy{PolicyKind::Softmax, Partition::single_qubit(0), {}};
  const Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ansatz.n_params()));
  std::size_t ones = 0, total = 0;
  for (std::uint64_t first = 0; total < 1000; first += 10) {
    const auto b = collect_batch(EnvKind::CartPole, policy, ansatz, theta, 10, 1.0, 3, first, GradientMethod::Adjoint);
    for (const auto &e : b.episodes)
      for (const auto &s : e.steps) {
        EXPECT_NEAR(s.probs(0), 0.5, 1e-12);
        ones += s.action;
        ++total;
      }
  }
  const double n = static_cast<double>(total);
  EXPECT_NEAR(static_cast<double>(ones), n / 2.0, 3.0 * std::sqrt(n / 4.0));
}

TEST(Train, ZeroEpisodesGivesEmptyCurve) {
  auto c = small_config();
  c.episodes = 0;
  const auto r = train(c, 1);
  EXPECT_TRUE(r.curve.empty());
  EXPECT_TRUE(r.theta.isZero());
}

TEST(Train, CurveLengthAndDeterminism) {
  auto c = small_config();
  c.episodes = 7; // last batch is short
  const auto a = train(c, 4);
  const auto b = train(c, 4);
  EXPECT_EQ(a.curve.size(), 7u);
  EXPECT_EQ(a.curve, b.curve);
  EXPECT_EQ(a.theta, b.theta);
  EXPECT_FALSE(a.aborted);
  const auto other = train(c, 5);
  EXPECT_NE(a.curve, other.curve);
}

TEST(Train, DiagnosticsHoldLoewnerAndMatchCounts) {
  auto c = small_config();
  c.policy.kind = PolicyKind::Born;
  c.optimizer.kind = OptimizerKind::Natural;
  c.optimizer.metric = Metric::Quantum;
  c.optimizer.phi = 0.5;
  const auto r = train(c, 2);
  ASSERT_EQ(r.diagnostics.size(), 3u);
  const auto k = static_cast<std::uint64_t>(r.theta.size());
  std::uint64_t expected_metric = 0;
  std::size_t first = 0;
  for (const auto &d : r.diagnostics) {
    EXPECT_TRUE(d.loewner_ok) << d.min_eig_gap;
    EXPECT_GE(d.eps_gap, -1e-8);
    EXPECT_GE(d.w_norm_classical + 1e-8, d.w_norm_quantum);
    EXPECT_EQ(d.executions_classical % (3 * 2 * k * (k + 1) / 2), 0u);
    EXPECT_EQ(d.executions_quantum % (4 * k * (k + 1) / 2), 0u);
    expected_metric += d.executions_quantum;
    EXPECT_EQ(d.episode, static_cast<int>(first));
    first += 3;
  }
  EXPECT_EQ(r.executions_metric, expected_metric);
}

TEST(Train, PropagatesInvalidConfig) {
  auto c = small_config();
  c.batch_size = 0;
  EXPECT_THROW(train(c, 1), std::invalid_argument);
  c = small_config();
  c.policy.partition = Partition::modulo(2, 3);
  EXPECT_THROW(train(c, 1), std::invalid_argument);
}
