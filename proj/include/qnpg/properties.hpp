// Self-checks over random instances: oracle agreement, the Fisher-matrix
// inequalities, smoothness constants and execution counts. Every check uses a
// fixed seed so a report is reproducible.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qnpg/fisher.hpp"
#include "qnpg/policies.hpp"
#include "qnpg/random.hpp"
#include "qnpg/simulator.hpp"
#include "qnpg/trainer.hpp"

namespace qnpg {

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail; ///< measured margins, one line
};

namespace props {

inline std::string num(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

inline Eigen::VectorXd uniform_vector(Rng &rng, Eigen::Index n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
  return v;
}

inline Eigen::VectorXd normal_vector(Rng &rng, Eigen::Index n) {
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng.engine());
  return v;
}

inline std::vector<double> random_features(Rng &rng, std::size_t n) {
  std::vector<double> f(n);
  for (auto &x : f) x = rng.uniform(-std::numbers::pi, std::numbers::pi);
  return f;
}

/// Reuploading circuit with 1..max_qubits qubits and 0..max_layers layers.
inline AnsatzSpec random_ansatz(Rng &rng, std::size_t max_qubits, std::size_t max_layers) {
  const auto n = 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_qubits));
  const auto l = static_cast<std::size_t>(rng.uniform() * static_cast<double>(max_layers + 1));
  const Encoding enc = rng.uniform() < 0.5 ? Encoding::Phase : Encoding::YZ;
  return reuploading_ansatz(n, l, 4, enc);
}

inline Partition random_partition(Rng &rng, std::size_t n_qubits) {
  if (n_qubits == 1 || rng.uniform() < 0.5)
    return Partition::single_qubit(static_cast<std::size_t>(rng.uniform() * static_cast<double>(n_qubits)));
  const std::size_t actions = rng.uniform() < 0.5 ? 2 : 3;
  return Partition::modulo(n_qubits, actions);
}

/// Five-point central difference.
template <class F> double central_difference(F &&f, double h) {
  return (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h);
}

/// The 4-qubit, 4-layer circuit with a qubit-0 Born policy used for the matrix checks.
inline AnsatzSpec cartpole_ansatz() { return reuploading_ansatz(4, 4); }
inline PolicySpec cartpole_born() { return PolicySpec{PolicyKind::Born, Partition::single_qubit(0), {}}; }

struct FisherPair {
  Eigen::MatrixXd classical; ///< exhaustive over actions
  Eigen::MatrixXd quantum;
};

inline std::vector<FisherPair> born_fisher_sample(std::uint64_t seed, int count) {
  Rng rng(seed);
  const AnsatzSpec ansatz = cartpole_ansatz();
  const PolicySpec policy = cartpole_born();
  std::vector<FisherPair> out;
  for (int i = 0; i < count; ++i) {
    const Eigen::VectorXd theta =
        uniform_vector(rng, static_cast<Eigen::Index>(ansatz.n_params()), -std::numbers::pi, std::numbers::pi);
    const auto f = random_features(rng, ansatz.n_features());
    const auto ev = evaluate_policy(policy, ansatz, as_span(theta), f, 1.0, GradientMethod::Adjoint);
    out.push_back({classical_fim_at(ev), quantum_fim_at(ansatz, as_span(theta), f)});
  }
  return out;
}

} // namespace props

// ---------------------------------------------------------------------------

inline PropertyResult check_qfim_oracle(std::uint64_t seed = 11, int instances = 20) {
  Rng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    const AnsatzSpec ansatz = props::random_ansatz(rng, 4, 3);
    const Eigen::VectorXd theta = props::uniform_vector(rng, static_cast<Eigen::Index>(ansatz.n_params()),
                                                        -std::numbers::pi, std::numbers::pi);
    const std::vector<std::vector<double>> visited = {props::random_features(rng, ansatz.n_features()),
                                                      props::random_features(rng, ansatz.n_features())};
    const auto shift = quantum_fim_shift(ansatz, theta, visited);
    const auto exact = quantum_fim_exact(ansatz, theta, visited);
    worst = std::max(worst, (shift.entries - exact.entries).cwiseAbs().maxCoeff());
  }
  return {"qfim_shift_matches_exact", worst < 1e-8,
          "max |shift - exact| = " + props::num(worst) + " over " + std::to_string(instances) +
              " ansatze (limit 1e-8)"};
}

inline PropertyResult check_shift_vs_fd_expectation(std::uint64_t seed = 12, int instances = 50) {
  Rng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    const AnsatzSpec ansatz = props::random_ansatz(rng, 4, 3);
    if (ansatz.n_params() == 0) continue;
    const Partition part = props::random_partition(rng, ansatz.n_qubits());
    std::vector<double> theta(ansatz.n_params());
    for (auto &t : theta) t = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const auto f = props::random_features(rng, ansatz.n_features());
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(ansatz.n_params()));
    const auto a = static_cast<std::size_t>(rng.uniform() * static_cast<double>(part.n_actions()));
    const double shift = parameter_shift_derivative(ansatz, theta, f, part, a, j);
    const double fd = props::central_difference(
        [&](double h) {
          auto t = theta;
          t[j] += h;
          return partition_probs(prepare_state(ansatz, t, f), part)[a];
        },
        1e-3);
    worst = std::max(worst, std::abs(shift - fd));
  }
  return {"shift_rule_matches_fd_expectation", worst < 1e-8,
          "max |shift - fd| = " + props::num(worst) + " (limit 1e-8)"};
}

inline PropertyResult check_shift_vs_fd_log_policy(std::uint64_t seed = 13, int instances = 50) {
  Rng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < instances; ++i) {
    const AnsatzSpec ansatz = props::random_ansatz(rng, 4, 3);
    if (ansatz.n_params() == 0) continue;
    const PolicyKind kind = i % 2 == 0 ? PolicyKind::Softmax : PolicyKind::Born;
    const PolicySpec policy{kind, props::random_partition(rng, ansatz.n_qubits()), {}};
    const double beta = rng.uniform(0.5, 3.0);
    std::vector<double> theta(ansatz.n_params());
    for (auto &t : theta) t = rng.uniform(-std::numbers::pi, std::numbers::pi);
    const auto f = props::random_features(rng, ansatz.n_features());
    const auto ev = evaluate_policy(policy, ansatz, theta, f, beta, GradientMethod::ParameterShift);
    Eigen::Index a = 0;
    ev.probs.maxCoeff(&a); // keeps log pi well conditioned
    const auto j = static_cast<std::size_t>(rng.uniform() * static_cast<double>(ansatz.n_params()));
    const double fd = props::central_difference(
        [&](double h) {
          auto t = theta;
          t[j] += h;
          return std::log(action_distribution(policy, prepare_state(ansatz, t, f), beta)(a));
        },
        1e-3);
    worst = std::max(worst, std::abs(ev.log_grads(a, static_cast<Eigen::Index>(j)) - fd));
  }
  return {"shift_rule_matches_fd_log_policy", worst < 1e-6,
          "max |shift - fd| = " + props::num(worst) + " (limit 1e-6)"};
}

inline PropertyResult check_loewner(std::uint64_t seed = 14, int points = 100) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto &p : props::born_fisher_sample(seed, points))
    worst = std::min(worst, min_eigenvalue(p.quantum - p.classical));
  return {"loewner_classical_below_quantum", worst >= -1e-6,
          "min eig(QFIM - F) = " + props::num(worst) + " over " + std::to_string(points) +
              " points (limit -1e-6)"};
}

inline PropertyResult check_equality_case(std::uint64_t seed = 15, int points = 20) {
  Rng rng(seed);
  const AnsatzSpec ansatz(1, 0, {{GateKind::RotY, 0, 0, VariationalIndex{0}}});
  const PolicySpec policy{PolicyKind::Born, Partition::single_qubit(0), {}};
  double gap = 0.0, off = 0.0;
  for (int i = 0; i < points; ++i) {
    const std::vector<double> theta = {rng.uniform(-std::numbers::pi, std::numbers::pi)};
    const auto ev = evaluate_policy(policy, ansatz, theta, {}, 1.0);
    const double fc = classical_fim_at(ev)(0, 0);
    const double fq = quantum_fim_at(ansatz, theta, {})(0, 0);
    gap = std::max(gap, std::abs(fc - fq));
    off = std::max({off, std::abs(fc - 1.0), std::abs(fq - 1.0)});
  }
  return {"equality_case_single_qubit", gap < 1e-8 && off < 1e-8,
          "max |F - QFIM| = " + props::num(gap) + ", max |F - 1| = " + props::num(off) + " (limit 1e-8)"};
}

inline PropertyResult check_sqrt_norm(std::uint64_t seed = 16, int points = 20, int vectors = 1000,
                                      double eps = 0.1) {
  Rng rng(seed + 1000);
  double worst = -std::numeric_limits<double>::infinity(); // max of ||Fq v|| - ||Fc v||
  for (const auto &p : props::born_fisher_sample(seed, points)) {
    const Eigen::MatrixXd pc = detail::regularized_inverse_power(p.classical, 0.5, eps);
    const Eigen::MatrixXd pq = detail::regularized_inverse_power(p.quantum, 0.5, eps);
    for (int i = 0; i < vectors; ++i) {
      const Eigen::VectorXd v = props::normal_vector(rng, p.classical.rows());
      worst = std::max(worst, (pq * v).norm() - (pc * v).norm());
    }
  }
  return {"sqrt_norm_quantum_below_classical", worst <= 1e-8,
          "max(||QFIM^-1/2 v|| - ||F^-1/2 v||) = " + props::num(worst) + " (limit 1e-8, eps " +
              props::num(eps) + ")"};
}

/// Looks for A <= B and v with ||B^{-1} v|| > ||A^{-1} v||, i.e. the phi = 1
/// analogue of the square-root norm ordering failing.
inline PropertyResult check_inverse_norm_counterexample(std::uint64_t seed = 17, int trials = 10000) {
  Rng rng(seed);
  double best = -std::numeric_limits<double>::infinity();
  int found = 0;
  for (int t = 0; t < trials; ++t) {
    Eigen::MatrixXd x(2, 2), y(2, 2);
    for (Eigen::Index i = 0; i < 4; ++i) {
      x(i) = rng.uniform(-1.0, 1.0);
      y(i) = rng.uniform(-1.0, 1.0);
    }
    const Eigen::MatrixXd a = x * x.transpose() + 0.01 * Eigen::MatrixXd::Identity(2, 2);
    const Eigen::MatrixXd b = a + y * y.transpose();
    const Eigen::VectorXd v = props::normal_vector(rng, 2);
    const double excess = (matrix_power(b, -1.0) * v).norm() - (matrix_power(a, -1.0) * v).norm();
    best = std::max(best, excess);
    if (excess > 1e-8) ++found;
  }
  return {"inverse_norm_ordering_can_fail", found >= 1,
          std::to_string(found) + " of " + std::to_string(trials) +
              " random pairs violate ||B^-1 v|| <= ||A^-1 v||; largest excess " + props::num(best)};
}

inline PropertyResult check_error_gap(std::uint64_t seed = 16, int points = 20, int vectors = 1000,
                                      double eps = 0.1) {
  Rng rng(seed + 1000);
  double worst[2] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  const double phis[2] = {0.5, 1.0};
  for (const auto &p : props::born_fisher_sample(seed, points)) {
    Eigen::MatrixXd diff[2];
    for (int k = 0; k < 2; ++k)
      diff[k] = detail::regularized_inverse_power(p.classical, phis[k], eps) -
                detail::regularized_inverse_power(p.quantum, phis[k], eps);
    for (int i = 0; i < vectors; ++i) {
      const Eigen::VectorXd v = props::normal_vector(rng, p.classical.rows());
      for (int k = 0; k < 2; ++k) worst[k] = std::min(worst[k], v.dot(diff[k] * v));
    }
  }
  return {"error_gap_nonnegative", worst[0] >= -1e-8 && worst[1] >= -1e-8,
          "min gap phi=0.5: " + props::num(worst[0]) + ", phi=1: " + props::num(worst[1]) +
              " (limit -1e-8)"};
}

inline PropertyResult check_smoothness(std::uint64_t seed = 18, int pairs = 200) {
  Rng rng(seed);
  const AnsatzSpec ansatz = props::cartpole_ansatz();
  const auto k = static_cast<Eigen::Index>(ansatz.n_params());
  std::vector<ThetaPair> sample;
  for (int i = 0; i < pairs; ++i)
    sample.push_back({props::uniform_vector(rng, k, -std::numbers::pi, std::numbers::pi),
                      props::uniform_vector(rng, k, -std::numbers::pi, std::numbers::pi)});
  const auto f = props::random_features(rng, ansatz.n_features());

  bool ok = true;
  std::string detail;
  const Partition partitions[2] = {Partition::single_qubit(0), Partition::modulo(4, 3)};
  for (const PolicyKind kind : {PolicyKind::Softmax, PolicyKind::Born}) {
    for (const auto &part : partitions) {
      const PolicySpec policy{kind, part, {}};
      const auto est = smoothness_estimate(policy, ansatz, sample, f, 1.0);
      for (std::size_t a = 0; a < est.size(); ++a) {
        const double bound = smoothness_bound(policy, ansatz.n_qubits(), a);
        ok = ok && est[a] <= bound + 1e-6;
        detail += std::string(detail.empty() ? "" : "; ") + (kind == PolicyKind::Born ? "born" : "softmax") +
                  "|A|=" + std::to_string(part.n_actions()) + " a=" + std::to_string(a) + " " +
                  props::num(est[a]) + "<=" + props::num(bound);
      }
    }
  }
  return {"smoothness_within_analytic_bounds", ok, detail};
}

inline PropertyResult check_execution_counts() {
  bool ok = true;
  std::string detail;
  for (const std::uint64_t k : {2u, 4u, 8u}) {
    const std::uint64_t entries = k * (k + 1) / 2;
    const std::uint64_t q2 = execution_count(ExecutionKind::Quantum, k, 4, 2, 8);
    const std::uint64_t q3 = execution_count(ExecutionKind::Quantum, k, 4, 3, 6);
    const std::uint64_t cs2 = execution_count(ExecutionKind::ClassicalSoftmax, k, 4, 2, 8);
    const std::uint64_t cs3 = execution_count(ExecutionKind::ClassicalSoftmax, k, 4, 3, 6);
    const std::uint64_t cb8 = execution_count(ExecutionKind::ClassicalBorn, k, 4, 2, 8);
    const std::uint64_t cb6 = execution_count(ExecutionKind::ClassicalBorn, k, 4, 3, 6);
    ok = ok && q2 == 4 * entries && q3 == q2 && cs2 == 8 * entries && cs3 == 12 * entries &&
         cb8 == 24 * entries && cb6 == 18 * entries && q2 < cs2 && q3 < cs3;
    detail += std::string(detail.empty() ? "" : "; ") + "k=" + std::to_string(k) + " quantum " +
              std::to_string(q2) + " (|A|=2,3), softmax " + std::to_string(cs2) + "/" + std::to_string(cs3) +
              " (|A|=2/3), born " + std::to_string(cb8) + "/" + std::to_string(cb6) + " (|V|=8/6)";
  }

  // The estimators report the same counts per visited state.
  const AnsatzSpec ansatz = reuploading_ansatz(2, 0); // k = 4
  const PolicySpec policy{PolicyKind::Softmax, Partition::single_qubit(0), {}};
  const TrajectoryBatch batch =
      collect_batch(EnvKind::CartPole, policy, ansatz, Eigen::VectorXd::Zero(4), 2, 1.0, 5);
  const auto steps = static_cast<std::uint64_t>(batch.total_steps());
  const auto visited = batch.visited_features();
  const std::uint64_t fc = classical_fim(batch).executions;
  const std::uint64_t fq = quantum_fim_exact(ansatz, Eigen::VectorXd::Zero(4), visited).executions;
  const bool estimators_ok = fc == steps * 4 * 2 * 10 && fq == visited.size() * 4 * 10;
  ok = ok && estimators_ok;
  detail += "; estimators " + std::string(estimators_ok ? "agree" : "DISAGREE");
  return {"execution_counts", ok, detail};
}

inline std::vector<PropertyResult> run_property_suite() {
  return {check_qfim_oracle(),         check_shift_vs_fd_expectation(),
          check_shift_vs_fd_log_policy(), check_loewner(),
          check_equality_case(),       check_sqrt_norm(),
          check_inverse_norm_counterexample(), check_error_gap(),
          check_smoothness(),          check_execution_counts()};
}

} // namespace qnpg
