#include <gtest/gtest.h>

#include "qnpg/properties.hpp"

using namespace qnpg;

namespace {

void expect_pass(const PropertyResult &r) { EXPECT_TRUE(r.passed) << r.name << ": " << r.detail; }

} // namespace

TEST(Properties, QfimShiftMatchesExact) { expect_pass(check_qfim_oracle()); }
TEST(Properties, ShiftRuleMatchesFiniteDifferences) { expect_pass(check_shift_vs_fd_expectation()); }
TEST(Properties, LogPolicyGradientMatchesFiniteDifferences) { expect_pass(check_shift_vs_fd_log_policy()); }
TEST(Properties, ClassicalFisherBelowQuantumFisher) { expect_pass(check_loewner()); }
TEST(Properties, SingleQubitFishersCoincide) { expect_pass(check_equality_case()); }
TEST(Properties, InverseSquareRootNormOrdering) { expect_pass(check_sqrt_norm()); }
TEST(Properties, FullInverseNormOrderingCanFail) { expect_pass(check_inverse_norm_counterexample()); }
TEST(Properties, ApproximationErrorGapNonNegative) { expect_pass(check_error_gap()); }
TEST(Properties, SmoothnessWithinAnalyticBounds) { expect_pass(check_smoothness()); }
TEST(Properties, ExecutionCounts) { expect_pass(check_execution_counts()); }

TEST(Properties, SuiteIsDeterministic) {
  const auto a = run_property_suite();
  const auto b = run_property_suite();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    EXPECT_EQ(a[i].detail, b[i].detail);
  }
}
