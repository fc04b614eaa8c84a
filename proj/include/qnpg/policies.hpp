// Born and Softmax policies read out of a parameterized circuit.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qnpg/simulator.hpp"

namespace qnpg {

enum class PolicyKind { Born, Softmax };

struct BetaSchedule {
  enum class Kind { Constant, LinearAnneal };
  Kind kind = Kind::Constant;
  double beta_final = 1.0;
  /// LinearAnneal only: episodes over which beta ramps from 1 to beta_final.
  int over_episodes = 0;
};

struct PolicySpec {
  PolicyKind kind = PolicyKind::Softmax;
  Partition partition = Partition::single_qubit(0);
  BetaSchedule beta{}; // ignored by Born policies

  [[nodiscard]] std::size_t n_actions() const noexcept { return partition.n_actions(); }
};

/// Constant -> beta_final; LinearAnneal -> 1 + (beta_final - 1) * episode / over,
/// clamped at beta_final.
inline double beta_at(const BetaSchedule &schedule, int episode, int total_episodes) {
  if (total_episodes <= 0) throw std::invalid_argument("beta_at: total_episodes must be > 0");
  if (episode < 0 || episode > total_episodes)
    throw std::invalid_argument("beta_at: episode outside [0, total_episodes]");
  if (schedule.kind == BetaSchedule::Kind::Constant) return schedule.beta_final;
  if (schedule.over_episodes <= 0) return schedule.beta_final;
  const double frac = std::min(1.0, static_cast<double>(episode) / schedule.over_episodes);
  return 1.0 + (schedule.beta_final - 1.0) * frac;
}

inline Eigen::VectorXd softmax(const Eigen::VectorXd &preferences, double beta) {
  const Eigen::VectorXd z = beta * preferences;
  const Eigen::VectorXd e = (z.array() - z.maxCoeff()).exp();
  return e / e.sum();
}

/// Policy over actions given the action preferences <P_a>.
inline Eigen::VectorXd action_distribution_from(PolicyKind kind,
                                                const Eigen::VectorXd &preferences, double beta) {
  if (preferences.size() == 0) throw std::invalid_argument("action_distribution: empty partition");
  if (kind == PolicyKind::Born) return preferences;
  if (!(beta > 0.0)) throw std::invalid_argument("action_distribution: softmax needs beta > 0");
  return softmax(preferences, beta);
}

inline Eigen::VectorXd action_distribution(const PolicySpec &policy, const Statevector &psi,
                                           double beta) {
  const auto probs = partition_probs(psi, policy.partition);
  return action_distribution_from(policy.kind, Eigen::Map<const Eigen::VectorXd>(
                                                   probs.data(), static_cast<Eigen::Index>(probs.size())),
                                  beta);
}

// ---------------------------------------------------------------------------
// Derivatives of the projector expectations

enum class GradientMethod {
  ParameterShift, ///< 1/2 [<P>(theta + pi/2 e_j) - <P>(theta - pi/2 e_j)]
  Adjoint,        ///< reverse sweep; same values, O(|A|) circuit passes
};

struct ExpectationJacobian {
  Eigen::VectorXd values;   ///< <P_a>, one entry per action
  Eigen::MatrixXd jacobian; ///< d<P_a>/d theta_j, |A| x k
};

namespace detail {

inline Eigen::VectorXd probs_vector(const Statevector &psi, const Partition &partition) {
  const auto p = partition_probs(psi, partition);
  return Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
}

inline ExpectationJacobian jacobian_shift(const AnsatzSpec &ansatz, std::span<const double> theta,
                                          std::span<const double> features,
                                          const Partition &partition) {
  constexpr double shift = std::numbers::pi / 2.0;
  const auto gates = ansatz.gates();
  std::vector<double> angles(gates.size());
  for (std::size_t g = 0; g < gates.size(); ++g) angles[g] = slot_angle(gates[g], theta, features);

  ExpectationJacobian out;
  out.jacobian.setZero(static_cast<Eigen::Index>(partition.n_actions()),
                       static_cast<Eigen::Index>(ansatz.n_params()));
  Statevector prefix(ansatz.n_qubits());
  auto run_suffix = [&](Statevector psi, std::size_t g, double angle) {
    apply_gate(psi, gates[g], angle);
    for (std::size_t h = g + 1; h < gates.size(); ++h) apply_gate(psi, gates[h], angles[h]);
    return probs_vector(psi, partition);
  };
  for (std::size_t g = 0; g < gates.size(); ++g) {
    if (const auto *v = std::get_if<VariationalIndex>(&gates[g].slot)) {
      const Eigen::VectorXd plus = run_suffix(prefix, g, angles[g] + shift);
      const Eigen::VectorXd minus = run_suffix(prefix, g, angles[g] - shift);
      out.jacobian.col(static_cast<Eigen::Index>(v->value)) = 0.5 * (plus - minus);
    }
    apply_gate(prefix, gates[g], angles[g]);
  }
  out.values = probs_vector(prefix, partition);
  return out;
}

inline ExpectationJacobian jacobian_adjoint(const AnsatzSpec &ansatz, std::span<const double> theta,
                                            std::span<const double> features,
                                            const Partition &partition) {
  const auto gates = ansatz.gates();
  std::vector<double> angles(gates.size());
  for (std::size_t g = 0; g < gates.size(); ++g) angles[g] = slot_angle(gates[g], theta, features);

  Statevector phi(ansatz.n_qubits());
  for (std::size_t g = 0; g < gates.size(); ++g) apply_gate(phi, gates[g], angles[g]);

  const std::size_t n_actions = partition.n_actions();
  ExpectationJacobian out;
  out.values = probs_vector(phi, partition);
  out.jacobian.setZero(static_cast<Eigen::Index>(n_actions),
                       static_cast<Eigen::Index>(ansatz.n_params()));

  // lambda_a = P_a |psi>, pulled back through the circuit alongside phi.
  std::vector<Statevector> lambda(n_actions, Statevector(ansatz.n_qubits()));
  for (std::size_t a = 0; a < n_actions; ++a) {
    auto amps = lambda[a].amplitudes();
    for (std::size_t i = 0; i < phi.dim(); ++i)
      amps[i] = partition.action_of_basis(i) == a ? phi[i] : Complex{};
  }
  for (std::size_t g = gates.size(); g-- > 0;) {
    if (const auto *v = std::get_if<VariationalIndex>(&gates[g].slot)) {
      Statevector gphi = phi;
      apply_generator(gphi, gates[g]);
      for (std::size_t a = 0; a < n_actions; ++a) {
        double acc = 0.0;
        const auto l = lambda[a].amplitudes();
        const auto d = gphi.amplitudes();
        for (std::size_t i = 0; i < l.size(); ++i) acc += (std::conj(l[i]) * d[i]).real();
        out.jacobian(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(v->value)) = 2.0 * acc;
      }
    }
    apply_gate(phi, gates[g], angles[g], /*adjoint=*/true);
    for (auto &l : lambda) apply_gate(l, gates[g], angles[g], /*adjoint=*/true);
  }
  return out;
}

} // namespace detail

inline ExpectationJacobian expectation_jacobian(const AnsatzSpec &ansatz,
                                                std::span<const double> theta,
                                                std::span<const double> features,
                                                const Partition &partition,
                                                GradientMethod method = GradientMethod::ParameterShift) {
  detail::check_inputs(ansatz, theta, features);
  partition.check_fits(ansatz.n_qubits());
  return method == GradientMethod::ParameterShift
             ? detail::jacobian_shift(ansatz, theta, features, partition)
             : detail::jacobian_adjoint(ansatz, theta, features, partition);
}

/// Two-evaluation shift rule for a single parameter and action.
inline double parameter_shift_derivative(const AnsatzSpec &ansatz, std::span<const double> theta,
                                         std::span<const double> features,
                                         const Partition &partition, std::size_t action,
                                         std::size_t j) {
  if (j >= ansatz.n_params())
    throw std::out_of_range("parameter_shift_derivative: parameter index out of range");
  if (action >= partition.n_actions())
    throw std::out_of_range("parameter_shift_derivative: action out of range");
  std::vector<double> shifted(theta.begin(), theta.end());
  shifted[j] = theta[j] + std::numbers::pi / 2.0;
  const double plus = partition_probs(prepare_state(ansatz, shifted, features), partition)[action];
  shifted[j] = theta[j] - std::numbers::pi / 2.0;
  const double minus = partition_probs(prepare_state(ansatz, shifted, features), partition)[action];
  return 0.5 * (plus - minus);
}

// ---------------------------------------------------------------------------
// Log-policy gradients

/// Below this the Born log-gradient of a sampled action is treated as degenerate.
inline constexpr double kDegenerateProbability = 1e-12;

struct PolicyEvaluation {
  Eigen::VectorXd preferences; ///< <P_a>
  Eigen::VectorXd probs;       ///< pi(a | s, theta)
  Eigen::MatrixXd jacobian;    ///< d<P_a>/d theta, |A| x k
  /// Row a is grad log pi(a | s, theta). Born rows of degenerate actions are zero.
  Eigen::MatrixXd log_grads;
};

inline PolicyEvaluation evaluate_policy(const PolicySpec &policy, const AnsatzSpec &ansatz,
                                        std::span<const double> theta,
                                        std::span<const double> features, double beta,
                                        GradientMethod method = GradientMethod::ParameterShift) {
  auto ej = expectation_jacobian(ansatz, theta, features, policy.partition, method);
  PolicyEvaluation out;
  out.preferences = std::move(ej.values);
  out.jacobian = std::move(ej.jacobian);
  out.probs = action_distribution_from(policy.kind, out.preferences, beta);
  if (policy.kind == PolicyKind::Born) {
    out.log_grads = out.jacobian;
    for (Eigen::Index a = 0; a < out.log_grads.rows(); ++a) {
      const double p = out.preferences(a);
      if (p < kDegenerateProbability)
        out.log_grads.row(a).setZero();
      else
        out.log_grads.row(a) /= p;
    }
  } else {
    const Eigen::RowVectorXd mean = out.probs.transpose() * out.jacobian;
    out.log_grads = beta * (out.jacobian.rowwise() - mean);
  }
  return out;
}

inline Eigen::VectorXd log_policy_gradient(const PolicySpec &policy, const AnsatzSpec &ansatz,
                                           std::span<const double> theta,
                                           std::span<const double> features, std::size_t action,
                                           double beta,
                                           GradientMethod method = GradientMethod::ParameterShift) {
  if (action >= policy.n_actions())
    throw std::out_of_range("log_policy_gradient: action out of range");
  const auto ev = evaluate_policy(policy, ansatz, theta, features, beta, method);
  if (policy.kind == PolicyKind::Born &&
      ev.preferences(static_cast<Eigen::Index>(action)) < kDegenerateProbability)
    throw std::domain_error("log_policy_gradient: sampled action " + std::to_string(action) +
                            " has Born probability below 1e-12");
  return ev.log_grads.row(static_cast<Eigen::Index>(action)).transpose();
}

// ---------------------------------------------------------------------------
// Sine structure and smoothness

/// <P>(theta_j) = A sin(theta_j + B) + C with all other parameters fixed.
struct SineDecomposition {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;

  [[nodiscard]] double operator()(double angle) const { return A * std::sin(angle + B) + C; }
};

inline SineDecomposition sine_decompose(const AnsatzSpec &ansatz, std::span<const double> theta,
                                        std::span<const double> features,
                                        const Partition &partition, std::size_t action,
                                        std::size_t j) {
  if (j >= ansatz.n_params()) throw std::out_of_range("sine_decompose: parameter index out of range");
  if (action >= partition.n_actions()) throw std::out_of_range("sine_decompose: action out of range");
  std::vector<double> probe(theta.begin(), theta.end());
  auto eval = [&](double angle) {
    probe[j] = angle;
    return partition_probs(prepare_state(ansatz, probe, features), partition)[action];
  };
  const double t = theta[j];
  const double f0 = eval(t);
  const double f1 = eval(t + std::numbers::pi / 2.0);
  const double f2 = eval(t + std::numbers::pi);
  SineDecomposition out;
  out.C = 0.5 * (f0 + f2);
  const double s = 0.5 * (f0 - f2); // A sin(t + B)
  const double c = f1 - out.C;      // A cos(t + B)
  out.A = std::hypot(s, c);
  if (out.A > 0.0) out.B = std::remainder(std::atan2(s, c) - t, 2.0 * std::numbers::pi);
  return out;
}

/// Analytic Lipschitz bound on the policy gradient for action `action`: |A| M^2
/// with M = 1 for Softmax over projector preferences, |V_a| / 4 for the
/// clipped Born gradient.
inline double smoothness_bound(const PolicySpec &policy, std::size_t n_qubits, std::size_t action) {
  if (policy.kind == PolicyKind::Softmax) return static_cast<double>(policy.n_actions());
  return static_cast<double>(policy.partition.basis_states_for(action, n_qubits)) / 4.0;
}

struct ThetaPair {
  Eigen::VectorXd first;
  Eigen::VectorXd second;
};

/// Largest ||g(theta) - g(theta')|| / ||theta - theta'|| over the pairs, per
/// action. g is grad log pi for Softmax and the clipped gradient grad <P_a>
/// for Born. Coincident pairs are skipped.
inline std::vector<double> smoothness_estimate(const PolicySpec &policy, const AnsatzSpec &ansatz,
                                               std::span<const ThetaPair> pairs,
                                               std::span<const double> features, double beta = 1.0) {
  if (pairs.empty()) throw std::invalid_argument("smoothness_estimate: need at least one pair");
  std::vector<double> best(policy.n_actions(), 0.0);
  auto gradients = [&](const Eigen::VectorXd &theta) {
    const auto ev = evaluate_policy(policy, ansatz, as_span(theta), features, beta,
                                    GradientMethod::Adjoint);
    return policy.kind == PolicyKind::Born ? ev.jacobian : ev.log_grads;
  };
  for (const auto &[a_theta, b_theta] : pairs) {
    const double dist = (a_theta - b_theta).norm();
    if (dist < 1e-12) continue;
    const Eigen::MatrixXd ga = gradients(a_theta);
    const Eigen::MatrixXd gb = gradients(b_theta);
    for (std::size_t a = 0; a < best.size(); ++a)
      best[a] = std::max(best[a], (ga.row(static_cast<Eigen::Index>(a)) -
                                   gb.row(static_cast<Eigen::Index>(a))).norm() / dist);
  }
  return best;
}

} // namespace qnpg
