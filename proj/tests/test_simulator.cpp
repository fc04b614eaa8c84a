#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "qnpg/simulator.hpp"

using namespace qnpg;

namespace {

constexpr double pi = std::numbers::pi;

AnsatzSpec single_ry() { return AnsatzSpec(1, 0, {{GateKind::RotY, 0, 0, VariationalIndex{0}}}); }

double max_abs_diff(std::span<const Complex> a, std::span<const Complex> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::vector<double> uniform_values(std::mt19937_64 &rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto &x : v) x = d(rng);
  return v;
}

} // namespace

TEST(PrepareState, HadamardOnZeroGivesPlus) {
  const AnsatzSpec h(1, 0, {{GateKind::Hadamard, 0}});
  const auto psi = prepare_state(h, std::span<const double>{}, std::span<const double>{});
  EXPECT_NEAR(psi[0].real(), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(psi[1].real(), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(PrepareState, ZeroRotationIsIdentity) {
  const std::vector<double> theta{0.0};
  const auto psi = prepare_state(single_ry(), theta, std::span<const double>{});
  EXPECT_NEAR(std::abs(psi[0] - Complex(1.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(psi[1]), 0.0, 1e-15);
}

TEST(PrepareState, QuarterTurnRotY) {
  const std::vector<double> theta{pi / 2};
  const auto psi = prepare_state(single_ry(), theta, std::span<const double>{});
  EXPECT_NEAR(psi[0].real(), std::cos(pi / 4), 1e-15);
  EXPECT_NEAR(psi[1].real(), std::sin(pi / 4), 1e-15);
  EXPECT_NEAR(psi[0].imag(), 0.0, 1e-15);
}

TEST(PrepareState, PreservesNormOnRandomCircuits) {
  std::mt19937_64 rng(11);
  for (std::size_t n = 1; n <= 5; ++n) {
    for (std::size_t layers = 0; layers <= 3; ++layers) {
      const auto ansatz = reuploading_ansatz(n, layers);
      const auto theta = uniform_values(rng, ansatz.n_params(), -pi, pi);
      const auto x = uniform_values(rng, 4, -2.0, 2.0);
      EXPECT_NEAR(prepare_state(ansatz, theta, x).norm_sq(), 1.0, 1e-12) << n << " qubits, " << layers;
    }
  }
}

TEST(PrepareState, RejectsWrongLengths) {
  const auto ansatz = reuploading_ansatz(2, 1);
  const std::vector<double> theta(ansatz.n_params() - 1, 0.0);
  const std::vector<double> x(4, 0.0);
  EXPECT_THROW(prepare_state(ansatz, theta, x), std::invalid_argument);
  const std::vector<double> good(ansatz.n_params(), 0.0);
  const std::vector<double> short_x(1, 0.0);
  EXPECT_THROW(prepare_state(ansatz, good, short_x), std::invalid_argument);
}

TEST(AnsatzSpec, ParameterCountIsTwoNTimesLayersPlusOne) {
  for (std::size_t n = 1; n <= 4; ++n)
    for (std::size_t layers = 0; layers <= 5; ++layers)
      EXPECT_EQ(reuploading_ansatz(n, layers).n_params(), 2 * n * (layers + 1));
}

TEST(AnsatzSpec, OpensWithHadamardWall) {
  EXPECT_TRUE(reuploading_ansatz(4, 4).has_hadamard_prefix());
  EXPECT_FALSE(single_ry().has_hadamard_prefix());
}

TEST(AnsatzSpec, RejectsMalformedPrograms) {
  EXPECT_THROW(AnsatzSpec(1, 0, {{GateKind::RotY, 1, 0, VariationalIndex{0}}}), std::invalid_argument);
  EXPECT_THROW(AnsatzSpec(2, 0, {{GateKind::CZ, 1, 1}}), std::invalid_argument);
  EXPECT_THROW(AnsatzSpec(1, 0, {{GateKind::RotX, 0}}), std::invalid_argument);
  EXPECT_THROW(AnsatzSpec(1, 0, {{GateKind::RotY, 0, 0, VariationalIndex{1}}}), std::invalid_argument);
  EXPECT_THROW(AnsatzSpec(1, 0,
                          {{GateKind::RotY, 0, 0, VariationalIndex{0}},
                           {GateKind::RotZ, 0, 0, VariationalIndex{0}}}),
               std::invalid_argument);
  EXPECT_THROW(AnsatzSpec(0, 0, {}), std::invalid_argument);
}

TEST(AnsatzSpec, PhaseEncodingZeroParametersIsUniformForAnyFeatures) {
  std::mt19937_64 rng(5);
  for (std::size_t n = 1; n <= 4; ++n) {
    const auto ansatz = reuploading_ansatz(n, 3, 4, Encoding::Phase);
    const std::vector<double> theta(ansatz.n_params(), 0.0);
    for (int trial = 0; trial < 10; ++trial) {
      const auto x = uniform_values(rng, 4, -3.0, 3.0);
      const auto psi = prepare_state(ansatz, theta, x);
      for (const auto &a : psi.amplitudes()) EXPECT_NEAR(std::norm(a), 1.0 / psi.dim(), 1e-12);
    }
  }
}

TEST(AnsatzSpec, YzEncodingZeroParametersDependsOnFeatures) {
  const auto ansatz = reuploading_ansatz(2, 1);
  const std::vector<double> theta(ansatz.n_params(), 0.0);
  const std::vector<double> x{0.4, -0.9, 0.0, 0.0};
  const auto psi = prepare_state(ansatz, theta, x);
  double spread = 0.0;
  for (const auto &a : psi.amplitudes()) spread = std::max(spread, std::abs(std::norm(a) - 0.25));
  EXPECT_GT(spread, 1e-3);
  const std::vector<double> zero(4, 0.0);
  const auto flat = prepare_state(ansatz, theta, zero);
  for (const auto &a : flat.amplitudes()) EXPECT_NEAR(std::norm(a), 0.25, 1e-12);
}

TEST(PartitionProbs, UniformTwoQubitsSingleMeasured) {
  const AnsatzSpec hh(2, 0, {{GateKind::Hadamard, 0}, {GateKind::Hadamard, 1}});
  const auto psi = prepare_state(hh, std::span<const double>{}, std::span<const double>{});
  const auto p = partition_probs(psi, Partition::single_qubit(0));
  ASSERT_EQ(p.size(), 2u);
  EXPECT_NEAR(p[0], 0.5, 1e-14);
  EXPECT_NEAR(p[1], 0.5, 1e-14);
}

TEST(PartitionProbs, RotYThirdTurn) {
  const std::vector<double> theta{pi / 3};
  const auto psi = prepare_state(single_ry(), theta, std::span<const double>{});
  const auto p = partition_probs(psi, Partition::single_qubit(0));
  EXPECT_NEAR(p[0], 0.75, 1e-14);
  EXPECT_NEAR(p[1], 0.25, 1e-14);
}

TEST(PartitionProbs, ModuloThreeOnTwoQubits) {
  const AnsatzSpec hh(2, 0, {{GateKind::Hadamard, 0}, {GateKind::Hadamard, 1}});
  const auto psi = prepare_state(hh, std::span<const double>{}, std::span<const double>{});
  const auto p = partition_probs(psi, Partition::modulo(2, 3));
  ASSERT_EQ(p.size(), 3u);
  EXPECT_NEAR(p[0], 0.5, 1e-14);
  EXPECT_NEAR(p[1], 0.25, 1e-14);
  EXPECT_NEAR(p[2], 0.25, 1e-14);
}

TEST(PartitionProbs, SumsToOne) {
  std::mt19937_64 rng(3);
  const auto ansatz = reuploading_ansatz(4, 2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto psi = prepare_state(ansatz, uniform_values(rng, ansatz.n_params(), -pi, pi),
                                   uniform_values(rng, 4, -1.0, 1.0));
    for (const auto &part : {Partition::single_qubit(2), Partition::modulo(4, 3), Partition::modulo(3, 2)}) {
      double s = 0.0;
      for (double x : partition_probs(psi, part)) {
        EXPECT_GE(x, 0.0);
        s += x;
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(Partition, SizesForTheTwoDefaults) {
  const auto single = Partition::single_qubit(0);
  EXPECT_EQ(single.basis_states_for(0, 4), 8u);
  EXPECT_EQ(single.basis_states_for(1, 4), 8u);
  const auto mod3 = Partition::modulo(4, 3);
  EXPECT_EQ(mod3.basis_states_for(0, 4), 6u);
  EXPECT_EQ(mod3.basis_states_for(1, 4), 5u);
  EXPECT_EQ(mod3.basis_states_for(2, 4), 5u);
  EXPECT_EQ(mod3.max_partition_size(4), 6u);
}

TEST(Partition, RejectsBadMaps) {
  EXPECT_THROW(Partition({}, {}), std::invalid_argument);
  EXPECT_THROW(Partition({0, 0}, {0, 1, 0, 1}), std::invalid_argument);
  EXPECT_THROW(Partition({0}, {0, 1, 0}), std::invalid_argument);
  EXPECT_THROW(Partition({0}, {0, 2}), std::invalid_argument);
  EXPECT_THROW(Partition::modulo(2, 0), std::invalid_argument);
  Statevector psi(2);
  EXPECT_THROW(partition_probs(psi, Partition::single_qubit(3)), std::invalid_argument);
}

TEST(Overlap, Basics) {
  Statevector zero(1);
  Statevector one(1, {0.0, 1.0});
  Statevector plus(1, {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)});
  EXPECT_NEAR(overlap_sq(plus, plus), 1.0, 1e-15);
  EXPECT_NEAR(overlap_sq(zero, one), 0.0, 1e-15);
  EXPECT_NEAR(overlap_sq(plus, zero), 0.5, 1e-15);
  EXPECT_THROW(overlap_sq(zero, Statevector(2)), std::invalid_argument);
}

TEST(StateDerivative, RotYAtZero) {
  const std::vector<double> theta{0.0};
  const auto d = state_derivative(single_ry(), theta, std::span<const double>{}, 0);
  EXPECT_NEAR(std::abs(d[0]), 0.0, 1e-15);
  EXPECT_NEAR(d[1].real(), 0.5, 1e-15);
  EXPECT_THROW(state_derivative(single_ry(), theta, std::span<const double>{}, 1), std::out_of_range);
}

TEST(StateDerivative, SingleRotationHasNormOneHalf) {
  std::mt19937_64 rng(8);
  for (GateKind kind : {GateKind::RotX, GateKind::RotY, GateKind::RotZ}) {
    const AnsatzSpec a(1, 0, {{GateKind::Hadamard, 0}, {kind, 0, 0, VariationalIndex{0}}});
    const auto theta = uniform_values(rng, 1, -pi, pi);
    const auto d = state_derivative(a, theta, std::span<const double>{}, 0);
    double n = 0.0;
    for (const auto &c : d) n += std::norm(c);
    EXPECT_NEAR(std::sqrt(n), 0.5, 1e-14);
  }
}

TEST(StateDerivative, MatchesCentralDifferences) {
  std::mt19937_64 rng(21);
  const auto ansatz = reuploading_ansatz(4, 2);
  const auto theta = uniform_values(rng, ansatz.n_params(), -pi, pi);
  const auto x = uniform_values(rng, 4, -1.0, 1.0);
  const auto jac = state_jacobian(ansatz, theta, x);
  // Five-point stencil: truncation error O(h^4).
  const double h = 1e-3;
  double worst = 0.0;
  for (std::size_t j = 0; j < ansatz.n_params(); ++j) {
    auto at = [&](double delta) {
      auto t = theta;
      t[j] += delta;
      return prepare_state(ansatz, t, x);
    };
    const auto p2 = at(2 * h), p1 = at(h), m1 = at(-h), m2 = at(-2 * h);
    const auto d = state_derivative(ansatz, theta, x, j);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const Complex fd = (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h);
      worst = std::max(worst, std::abs(fd - d[i]));
    }
    EXPECT_LT(max_abs_diff(d, jac[j]), 1e-13);
  }
  EXPECT_LT(worst, 1e-8);
}
