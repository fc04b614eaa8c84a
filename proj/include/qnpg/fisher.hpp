// Classical and quantum Fisher information, matrix powers and the Löwner
// order comparisons between them.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "qnpg/simulator.hpp"
#include "qnpg/trajectory.hpp"

namespace qnpg {

enum class FisherKind { Classical, QuantumShift, QuantumExact };

struct FisherMatrix {
  FisherKind kind = FisherKind::Classical;
  Eigen::MatrixXd entries;
  double epsilon = 0.0;          ///< regularisation already added to the diagonal
  std::uint64_t executions = 0;  ///< circuit evaluations the estimate costs on hardware

  [[nodiscard]] Eigen::Index size() const noexcept { return entries.rows(); }
};

// ---------------------------------------------------------------------------
// Execution accounting

enum class ExecutionKind { ClassicalBorn, ClassicalSoftmax, Quantum };

/// Circuit executions per visited state for one information-matrix estimate.
/// Only the upper triangle, k(k+1)/2 entries, is counted.
///   ClassicalBorn    3 * partition_size * k(k+1)/2
///   ClassicalSoftmax 4 * n_actions * k(k+1)/2
///   Quantum          4 * k(k+1)/2   (four overlaps per entry)
inline std::uint64_t execution_count(ExecutionKind kind, std::uint64_t k, std::uint64_t n_qubits,
                                     std::uint64_t n_actions, std::uint64_t partition_size) {
  if (k == 0 || n_qubits == 0 || n_actions == 0 || partition_size == 0)
    throw std::invalid_argument("execution_count: all arguments must be positive");
  const std::uint64_t entries = k * (k + 1) / 2;
  switch (kind) {
  case ExecutionKind::ClassicalBorn:
    return 3 * partition_size * entries;
  case ExecutionKind::ClassicalSoftmax:
    return 4 * n_actions * entries;
  case ExecutionKind::Quantum:
    return 4 * entries;
  }
  return 0;
}

inline ExecutionKind classical_execution_kind(PolicyKind kind) {
  return kind == PolicyKind::Born ? ExecutionKind::ClassicalBorn : ExecutionKind::ClassicalSoftmax;
}

// ---------------------------------------------------------------------------
// Estimators

enum class FimMode {
  Sampled,    ///< outer products of the sampled actions' log-gradients
  Exhaustive, ///< sum over all actions weighted by pi(a | s)
};

inline FisherMatrix classical_fim(const TrajectoryBatch &batch, FimMode mode = FimMode::Sampled) {
  const std::size_t steps = batch.total_steps();
  if (steps == 0) throw std::invalid_argument("classical_fim: batch has no steps");
  Eigen::Index k = 0;
  for (const auto &e : batch.episodes)
    if (!e.steps.empty()) {
      k = e.steps.front().log_grad.size();
      break;
    }
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(k, k);
  for (const auto &e : batch.episodes) {
    for (const auto &s : e.steps) {
      if (s.log_grad.size() != k)
        throw std::invalid_argument("classical_fim: inconsistent log-gradient lengths");
      if (mode == FimMode::Sampled) {
        f.selfadjointView<Eigen::Lower>().rankUpdate(s.log_grad);
      } else {
        if (s.action_log_grads.rows() != s.probs.size() || s.action_log_grads.cols() != k)
          throw std::invalid_argument("classical_fim: exhaustive mode needs per-action gradients");
        for (Eigen::Index a = 0; a < s.probs.size(); ++a)
          f.selfadjointView<Eigen::Lower>().rankUpdate(
              s.action_log_grads.row(a).transpose(), s.probs(a));
      }
    }
  }
  f = f.selfadjointView<Eigen::Lower>();
  f /= static_cast<double>(steps);

  FisherMatrix out;
  out.kind = FisherKind::Classical;
  out.entries = std::move(f);
  if (k > 0)
    out.executions = steps * execution_count(classical_execution_kind(batch.policy_kind),
                                             static_cast<std::uint64_t>(k), batch.n_qubits,
                                             batch.n_actions, batch.partition_size);
  return out;
}

/// Exhaustive-action classical FIM at a single input: sum_a pi_a g_a g_a^T.
inline Eigen::MatrixXd classical_fim_at(const PolicyEvaluation &ev) {
  const Eigen::Index k = ev.log_grads.cols();
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index a = 0; a < ev.probs.size(); ++a)
    f.selfadjointView<Eigen::Lower>().rankUpdate(ev.log_grads.row(a).transpose(), ev.probs(a));
  return f.selfadjointView<Eigen::Lower>();
}

namespace detail {

inline void check_visited(std::span<const std::vector<double>> visited, const char *who) {
  if (visited.empty()) throw std::invalid_argument(std::string(who) + ": no visited features");
}

inline std::uint64_t quantum_executions(std::size_t k, std::size_t n_visited) {
  return k == 0 ? 0 : n_visited * execution_count(ExecutionKind::Quantum, k, 1, 1, 1);
}

} // namespace detail

/// Pure-state QFIM 4 Re[<d_i psi|d_j psi> - <d_i psi|psi><psi|d_j psi>] at one input.
inline Eigen::MatrixXd quantum_fim_at(const AnsatzSpec &ansatz, std::span<const double> theta,
                                      std::span<const double> features) {
  const Statevector psi = prepare_state(ansatz, theta, features);
  const auto jac = state_jacobian(ansatz, theta, features);
  const std::size_t k = jac.size();
  const std::size_t dim = psi.dim();
  Eigen::MatrixXcd d(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t i = 0; i < dim; ++i)
      d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = jac[j][i];
  const Eigen::Map<const Eigen::VectorXcd> p(psi.amplitudes().data(), static_cast<Eigen::Index>(dim));
  const Eigen::VectorXcd berry = d.adjoint() * p; // <d_i psi|psi>
  Eigen::MatrixXcd g = d.adjoint() * d;
  g.noalias() -= berry * berry.adjoint();
  return 4.0 * g.real();
}

/// Data-dependent QFIM averaged over visited inputs, from analytic state derivatives.
inline FisherMatrix quantum_fim_exact(const AnsatzSpec &ansatz, std::span<const double> theta,
                                      std::span<const std::vector<double>> visited) {
  detail::check_visited(visited, "quantum_fim_exact");
  const auto k = static_cast<Eigen::Index>(ansatz.n_params());
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(k, k);
  for (const auto &x : visited) f += quantum_fim_at(ansatz, theta, x);
  f /= static_cast<double>(visited.size());
  f = 0.5 * (f + f.transpose()).eval();
  return {FisherKind::QuantumExact, std::move(f), 0.0,
          detail::quantum_executions(ansatz.n_params(), visited.size())};
}

inline FisherMatrix quantum_fim_exact(const AnsatzSpec &ansatz, const Eigen::VectorXd &theta,
                                      std::span<const std::vector<double>> visited) {
  return quantum_fim_exact(ansatz, as_span(theta), visited);
}

/// Four-overlap shift estimator:
/// F_ij = -1/2 ( |<psi|psi(+i+j)>|^2 - |<psi|psi(+i-j)>|^2 - |<psi|psi(-i+j)>|^2 + |<psi|psi(-i-j)>|^2 )
/// with shifts of pi/2 along e_i and e_j.
inline FisherMatrix quantum_fim_shift(const AnsatzSpec &ansatz, std::span<const double> theta,
                                      std::span<const std::vector<double>> visited) {
  detail::check_visited(visited, "quantum_fim_shift");
  const std::size_t k = ansatz.n_params();
  constexpr double h = std::numbers::pi / 2.0;
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  std::vector<double> shifted(theta.begin(), theta.end());
  for (const auto &x : visited) {
    const Statevector psi = prepare_state(ansatz, theta, x);
    auto overlap_at = [&](std::size_t i, double si, std::size_t j, double sj) {
      std::copy(theta.begin(), theta.end(), shifted.begin());
      shifted[i] += si;
      shifted[j] += sj;
      return overlap_sq(psi, prepare_state(ansatz, shifted, x));
    };
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i; j < k; ++j) {
        const double value = -0.5 * (overlap_at(i, h, j, h) - overlap_at(i, h, j, -h) -
                                     overlap_at(i, -h, j, h) + overlap_at(i, -h, j, -h));
        const auto ii = static_cast<Eigen::Index>(i);
        const auto jj = static_cast<Eigen::Index>(j);
        f(ii, jj) += value;
        if (i != j) f(jj, ii) += value;
      }
    }
  }
  f /= static_cast<double>(visited.size());
  return {FisherKind::QuantumShift, std::move(f), 0.0, detail::quantum_executions(k, visited.size())};
}

inline FisherMatrix quantum_fim_shift(const AnsatzSpec &ansatz, const Eigen::VectorXd &theta,
                                      std::span<const std::vector<double>> visited) {
  return quantum_fim_shift(ansatz, as_span(theta), visited);
}

// ---------------------------------------------------------------------------
// Matrix functions

inline FisherMatrix regularize(const FisherMatrix &f, double eps) {
  if (!(eps >= 0.0)) throw std::invalid_argument("regularize: eps must be >= 0");
  FisherMatrix out = f;
  out.entries.diagonal().array() += eps;
  out.epsilon = f.epsilon + eps;
  return out;
}

/// Eigenvalues below this are floored before a negative power.
inline constexpr double kEigenFloor = 1e-12;

namespace detail {

inline void check_symmetric(const Eigen::MatrixXd &m, const char *who, double tol = 1e-10) {
  if (m.rows() != m.cols()) throw std::invalid_argument(std::string(who) + ": matrix is not square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol * scale)
    throw std::invalid_argument(std::string(who) + ": matrix is not symmetric");
}

inline Eigen::MatrixXd power_impl(const Eigen::MatrixXd &m, double exponent, double epsilon) {
  detail::check_symmetric(m, "matrix_power", 1e-8);
  const Eigen::Index k = m.rows();
  if (exponent == 0.0) return Eigen::MatrixXd::Identity(k, k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success) throw std::runtime_error("matrix_power: eigensolver failed");
  Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(0.0);
  if (exponent < 0.0) {
    if (lambda.size() > 0 && lambda.minCoeff() <= kEigenFloor && epsilon == 0.0)
      throw std::domain_error(
          "matrix_power: matrix is singular; regularize it (eps > 0) before a negative power");
    lambda = lambda.cwiseMax(kEigenFloor);
  }
  const Eigen::VectorXd powered = lambda.array().pow(exponent);
  const Eigen::MatrixXd &q = es.eigenvectors();
  Eigen::MatrixXd out = q * powered.asDiagonal() * q.transpose();
  return 0.5 * (out + out.transpose());
}

} // namespace detail

/// Q diag(max(lambda, 0)^exponent) Q^T.
inline Eigen::MatrixXd matrix_power(const FisherMatrix &f, double exponent) {
  return detail::power_impl(f.entries, exponent, f.epsilon);
}

inline Eigen::MatrixXd matrix_power(const Eigen::MatrixXd &m, double exponent) {
  return detail::power_impl(m, exponent, 0.0);
}

inline double min_eigenvalue(const Eigen::MatrixXd &m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// A <= B in the Löwner order: min eig(B - A) >= -tol.
inline bool loewner_leq(const Eigen::MatrixXd &a, const Eigen::MatrixXd &b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("loewner_leq: dimension mismatch");
  detail::check_symmetric(a, "loewner_leq", 1e-8);
  detail::check_symmetric(b, "loewner_leq", 1e-8);
  return min_eigenvalue(b - a) >= -tol;
}

/// (F + eps I)^{-phi} grad
inline Eigen::VectorXd natural_direction(const FisherMatrix &f, const Eigen::VectorXd &grad,
                                         double phi, double eps) {
  if (grad.size() != f.size())
    throw std::invalid_argument("natural_direction: gradient length " + std::to_string(grad.size()) +
                                " does not match the " + std::to_string(f.size()) + "x" +
                                std::to_string(f.size()) + " metric");
  if (phi == 0.0) return grad;
  return matrix_power(regularize(f, eps), -phi) * grad;
}

namespace detail {

inline Eigen::MatrixXd regularized_inverse_power(const Eigen::MatrixXd &m, double phi, double eps) {
  FisherMatrix f{FisherKind::Classical, m, 0.0, 0};
  return matrix_power(regularize(f, eps), -phi);
}

inline void check_pair(const Eigen::MatrixXd &fc, const Eigen::MatrixXd &fq,
                       const Eigen::VectorXd &v, const char *who) {
  if (fc.rows() != fq.rows() || fc.cols() != fq.cols() || fc.rows() != v.size())
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
  check_symmetric(fc, who, 1e-8);
  check_symmetric(fq, who, 1e-8);
}

} // namespace detail

/// v^T (Fc_reg^{-phi} - Fq_reg^{-phi}) v; nonnegative whenever Fc <= Fq.
inline double approximation_error_gap(const Eigen::MatrixXd &fc, const Eigen::MatrixXd &fq,
                                      const Eigen::VectorXd &v, double phi, double eps) {
  detail::check_pair(fc, fq, v, "approximation_error_gap");
  const Eigen::MatrixXd diff = detail::regularized_inverse_power(fc, phi, eps) -
                               detail::regularized_inverse_power(fq, phi, eps);
  return v.dot(diff * v);
}

/// (||Fc_reg^{-phi} v||, ||Fq_reg^{-phi} v||)
inline std::pair<double, double> norm_comparison(const Eigen::MatrixXd &fc,
                                                 const Eigen::MatrixXd &fq,
                                                 const Eigen::VectorXd &v, double phi, double eps) {
  detail::check_pair(fc, fq, v, "norm_comparison");
  return {(detail::regularized_inverse_power(fc, phi, eps) * v).norm(),
          (detail::regularized_inverse_power(fq, phi, eps) * v).norm()};
}

} // namespace qnpg
