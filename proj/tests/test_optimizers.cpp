#include <gtest/gtest.h>

#include "qnpg/optimizers.hpp"

using namespace qnpg;

namespace {

OptimizerConfig natural(double eta, double phi, double eps) {
  OptimizerConfig c;
  c.kind = OptimizerKind::Natural;
  c.eta = eta;
  c.phi = phi;
  c.eps = eps;
  return c;
}

FisherMatrix metric(const Eigen::MatrixXd &m) { return {FisherKind::Classical, m, 0.0, 0}; }

} // namespace

TEST(Adam, FirstStepMovesByEtaAlongGradientSign) {
  OptimizerConfig c;
  c.eta = 0.01;
  const Eigen::Vector3d theta(0.0, 1.0, -1.0);
  const Eigen::Vector3d g(3.0, -0.2, 1e-3);
  auto [state, next] = adam_step(OptimizerState::zeros(3), theta, g, c);
  EXPECT_EQ(state.step, 1);
  const Eigen::Vector3d delta = next - theta;
  EXPECT_NEAR(delta(0), 0.01, 1e-8);
  EXPECT_NEAR(delta(1), -0.01, 1e-8);
  EXPECT_NEAR(delta(2), 0.01, 1e-7);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  OptimizerConfig c;
  const Eigen::Vector2d theta(0.4, -0.2);
  auto [state, next] = adam_step(OptimizerState::zeros(2), theta, Eigen::Vector2d::Zero(), c);
  EXPECT_TRUE(next.isApprox(theta));
}

TEST(Adam, RejectsBadInputs) {
  OptimizerConfig c;
  EXPECT_THROW(adam_step(OptimizerState::zeros(2), Eigen::Vector2d::Zero(), Eigen::Vector3d::Zero(), c),
               std::invalid_argument);
  const Eigen::Vector2d bad(std::numeric_limits<double>::quiet_NaN(), 0.0);
  EXPECT_THROW(adam_step(OptimizerState::zeros(2), Eigen::Vector2d::Zero(), bad, c), std::invalid_argument);
}

TEST(NaturalStep, DiagonalInverseSquareRoot) {
  const Eigen::Vector2d next = natural_step(Eigen::Vector2d::Zero(), Eigen::Vector2d(1, 1),
                                            metric(Eigen::Vector2d(4, 1).asDiagonal()), natural(0.1, 0.5, 0.0));
  EXPECT_NEAR(next(0), 0.05, 1e-14);
  EXPECT_NEAR(next(1), 0.1, 1e-14);
}

TEST(NaturalStep, PhiZeroIsVanillaAscent) {
  const Eigen::Vector3d theta(1, 2, 3);
  const Eigen::Vector3d g(0.5, -1, 2);
  const Eigen::Matrix3d f{{5, 1, 0}, {1, 2, 0}, {0, 0, 1}};
  EXPECT_TRUE(natural_step(theta, g, metric(f), natural(0.2, 0.0, 0.1)).isApprox(theta + 0.2 * g));
}

TEST(NaturalStep, IdentityMetricWithoutRegularization) {
  const Eigen::Vector2d theta(0.1, 0.2);
  const Eigen::Vector2d g(-1, 4);
  for (double phi : {0.5, 1.0})
    EXPECT_TRUE(natural_step(theta, g, metric(Eigen::Matrix2d::Identity()), natural(0.3, phi, 0.0))
                    .isApprox(theta + 0.3 * g));
}

TEST(NaturalStep, RegularizationDampsFlatDirections) {
  const Eigen::Vector2d next = natural_step(Eigen::Vector2d::Zero(), Eigen::Vector2d(1, 1),
                                            metric(Eigen::Vector2d(1, 0).asDiagonal()), natural(1.0, 1.0, 0.1));
  EXPECT_NEAR(next(0), 1.0 / 1.1, 1e-14);
  EXPECT_NEAR(next(1), 10.0, 1e-12);
}

TEST(NaturalStep, SingularMetricNeedsRegularization) {
  EXPECT_THROW(natural_step(Eigen::Vector2d::Zero(), Eigen::Vector2d(1, 1),
                            metric(Eigen::Vector2d(1, 0).asDiagonal()), natural(1.0, 1.0, 0.0)),
               std::domain_error);
}

TEST(NaturalStep, RejectsAdamConfig) {
  EXPECT_THROW(natural_step(Eigen::Vector2d::Zero(), Eigen::Vector2d(1, 1), metric(Eigen::Matrix2d::Identity()),
                            OptimizerConfig{}),
               std::invalid_argument);
}

TEST(OptimizerConfig, Validation) {
  EXPECT_NO_THROW(natural(0.1, 0.5, 0.1).validate());
  EXPECT_THROW(natural(0.0, 0.5, 0.1).validate(), std::invalid_argument);
  EXPECT_THROW(natural(0.1, 1.5, 0.1).validate(), std::invalid_argument);
  EXPECT_THROW(natural(0.1, 0.5, -1.0).validate(), std::invalid_argument);
}

TEST(OptimizerConfig, Labels) {
  EXPECT_EQ(optimizer_label(OptimizerConfig{}), "Adam");
  EXPECT_EQ(optimizer_label(natural(0.1, 1.0, 0.1)), "NPG");
  EXPECT_EQ(optimizer_label(natural(0.1, 0.5, 0.1)), "NPG phi=0.5");
  auto q = natural(0.1, 0.5, 0.1);
  q.metric = Metric::Quantum;
  EXPECT_EQ(optimizer_label(q), "GQNPG phi=0.5");
  q.phi = 1.0;
  EXPECT_EQ(optimizer_label(q), "GQNPG");
}
