// REINFORCE with a per-timestep mean-return baseline, driven by Adam or a
// natural-gradient update, plus Fisher-comparison diagnostics.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qnpg/environments.hpp"
#include "qnpg/fisher.hpp"
#include "qnpg/optimizers.hpp"
#include "qnpg/policies.hpp"
#include "qnpg/random.hpp"
#include "qnpg/simulator.hpp"
#include "qnpg/trajectory.hpp"

namespace qnpg {

struct AnsatzShape {
  std::size_t n_qubits = 4;
  std::size_t n_layers = 4;
  Encoding encoding = Encoding::YZ;

  [[nodiscard]] AnsatzSpec build() const { return reuploading_ansatz(n_qubits, n_layers, 4, encoding); }
};

/// Measurement used by each environment: one qubit for CartPole, all qubits
/// with int(b) mod 3 for Acrobot.
inline Partition default_partition(EnvKind env, std::size_t n_qubits) {
  return env == EnvKind::CartPole ? Partition::single_qubit(0) : Partition::modulo(n_qubits, 3);
}

struct ExperimentConfig {
  std::string name = "experiment";
  EnvKind env = EnvKind::CartPole;
  PolicySpec policy{};
  AnsatzShape ansatz{};
  OptimizerConfig optimizer{};
  int batch_size = 10;
  int episodes = 500;
  double gamma = 0.99;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  int diagnostics_every = 10; ///< in gradient steps; 0 disables
  GradientMethod gradient = GradientMethod::ParameterShift;
  FisherKind quantum_estimator = FisherKind::QuantumExact;

  void validate() const {
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (episodes < 0) throw std::invalid_argument("episodes must be >= 0");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
    if (diagnostics_every < 0) throw std::invalid_argument("diagnostics_every must be >= 0");
    if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
    if (policy.n_actions() != action_count(env))
      throw std::invalid_argument("policy has " + std::to_string(policy.n_actions()) +
                                  " actions but " + to_string(env) + " needs " +
                                  std::to_string(action_count(env)));
    policy.partition.check_fits(ansatz.n_qubits);
    if (policy.kind == PolicyKind::Softmax && !(policy.beta.beta_final > 0.0))
      throw std::invalid_argument("beta_final must be > 0");
    if (quantum_estimator == FisherKind::Classical)
      throw std::invalid_argument("quantum_estimator must be a quantum kind");
    optimizer.validate();
  }
};

// ---------------------------------------------------------------------------

/// Samples batch_size complete episodes under pi_theta. Episode i draws from
/// the substream (seed, first_episode + i), so episodes do not depend on order.
inline TrajectoryBatch collect_batch(EnvKind env, const PolicySpec &policy, const AnsatzSpec &ansatz,
                                     const Eigen::VectorXd &theta, int batch_size, double beta,
                                     std::uint64_t seed, std::uint64_t first_episode = 0,
                                     GradientMethod method = GradientMethod::ParameterShift) {
  if (theta.size() != static_cast<Eigen::Index>(ansatz.n_params()))
    throw std::invalid_argument("collect_batch: theta length does not match the ansatz");
  if (batch_size < 1) throw std::invalid_argument("collect_batch: batch_size must be >= 1");
  TrajectoryBatch batch;
  batch.policy_kind = policy.kind;
  batch.n_qubits = ansatz.n_qubits();
  batch.n_actions = policy.n_actions();
  batch.partition_size = policy.partition.max_partition_size(ansatz.n_qubits());
  batch.episodes.resize(static_cast<std::size_t>(batch_size));
  const auto theta_span = as_span(theta);

  for (int i = 0; i < batch_size; ++i) {
    Rng rng = Rng::substream(seed, first_episode + static_cast<std::uint64_t>(i));
    EnvState state = reset(env, rng);
    auto &episode = batch.episodes[static_cast<std::size_t>(i)];
    while (!state.done) {
      const auto f = features(state);
      TrajectoryStep st;
      st.features.assign(f.begin(), f.end());
      auto ev = evaluate_policy(policy, ansatz, theta_span, st.features, beta, method);

      const double u = rng.uniform();
      double cumulative = 0.0;
      std::size_t action = static_cast<std::size_t>(ev.probs.size()) - 1;
      for (Eigen::Index a = 0; a < ev.probs.size(); ++a) {
        cumulative += ev.probs(a);
        if (u < cumulative) {
          action = static_cast<std::size_t>(a);
          break;
        }
      }
      while (ev.probs(static_cast<Eigen::Index>(action)) <= 0.0 && action > 0) --action;
      if (policy.kind == PolicyKind::Born &&
          ev.preferences(static_cast<Eigen::Index>(action)) < kDegenerateProbability)
        throw std::domain_error("collect_batch: sampled a degenerate Born action");

      st.action = action;
      st.log_grad = ev.log_grads.row(static_cast<Eigen::Index>(action)).transpose();
      st.probs = std::move(ev.probs);
      st.action_log_grads = std::move(ev.log_grads);
      auto [next, result] = step(state, action);
      st.reward = result.reward;
      episode.steps.push_back(std::move(st));
      state = next;
    }
  }
  return batch;
}

/// Fills G_t = r_t + gamma G_{t+1} and b_t, the mean of G_t over episodes
/// still running at t.
inline TrajectoryBatch &returns_and_baseline(TrajectoryBatch &batch, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("returns_and_baseline: gamma must lie in (0, 1]");
  batch.gamma = gamma;
  std::size_t longest = 0;
  for (auto &e : batch.episodes) {
    const std::size_t T = e.steps.size();
    e.returns.assign(T, 0.0);
    double g = 0.0;
    for (std::size_t t = T; t-- > 0;) {
      g = e.steps[t].reward + gamma * g;
      e.returns[t] = g;
    }
    longest = std::max(longest, T);
  }
  std::vector<double> sum(longest, 0.0);
  std::vector<std::size_t> alive(longest, 0);
  for (const auto &e : batch.episodes)
    for (std::size_t t = 0; t < e.returns.size(); ++t) {
      sum[t] += e.returns[t];
      ++alive[t];
    }
  batch.baseline.assign(longest, 0.0);
  for (std::size_t t = 0; t < longest; ++t) batch.baseline[t] = sum[t] / static_cast<double>(alive[t]);
  return batch;
}

/// (1/N) sum_i sum_t (G_t - b_t) grad log pi(a_t | s_t)
inline Eigen::VectorXd policy_gradient(const TrajectoryBatch &batch) {
  if (batch.episodes.empty() || batch.total_steps() == 0)
    throw std::invalid_argument("policy_gradient: empty batch");
  Eigen::VectorXd g;
  for (const auto &e : batch.episodes) {
    if (e.returns.size() != e.steps.size())
      throw std::logic_error("policy_gradient: returns_and_baseline has not been run");
    for (std::size_t t = 0; t < e.steps.size(); ++t) {
      if (g.size() == 0) g = Eigen::VectorXd::Zero(e.steps[t].log_grad.size());
      g += (e.returns[t] - batch.baseline[t]) * e.steps[t].log_grad;
    }
  }
  return g / static_cast<double>(batch.episodes.size());
}

// ---------------------------------------------------------------------------
// Diagnostics

struct DiagnosticsRecord {
  int update = 0;
  int episode = 0; ///< first episode of the batch
  double mean_return = 0.0;
  double w_norm_classical = 0.0; ///< ||F_reg^{-phi} g||
  double w_norm_quantum = 0.0;   ///< ||QFIM_reg^{-phi} g||
  double eps_gap = 0.0;          ///< sum_steps v^T (F_reg^{-phi} - QFIM_reg^{-phi}) v
  double min_eig_gap = 0.0;      ///< min eig(QFIM - F)
  bool loewner_ok = false;       ///< F <= QFIM within 1e-6
  std::uint64_t executions_classical = 0;
  std::uint64_t executions_quantum = 0;
};

/// Both metrics from the same batch: exhaustive-action classical FIM and the
/// exact data-dependent QFIM. Returns and baseline must already be filled.
inline DiagnosticsRecord regret_diagnostics(const TrajectoryBatch &batch, const Eigen::VectorXd &theta,
                                            const AnsatzSpec &ansatz,
                                            [[maybe_unused]] const PolicySpec &policy,
                                            double phi, double eps) {
  if (batch.total_steps() == 0) throw std::invalid_argument("regret_diagnostics: empty batch");
  const auto visited = batch.visited_features();
  const FisherMatrix fc = classical_fim(batch, FimMode::Exhaustive);
  const FisherMatrix fq = quantum_fim_exact(ansatz, theta, visited);
  const Eigen::VectorXd g = policy_gradient(batch);

  DiagnosticsRecord rec;
  double total = 0.0;
  for (const auto &e : batch.episodes) total += e.total_reward();
  rec.mean_return = total / static_cast<double>(batch.episodes.size());

  const Eigen::MatrixXd pc = matrix_power(regularize(fc, eps), -phi);
  const Eigen::MatrixXd pq = matrix_power(regularize(fq, eps), -phi);
  rec.w_norm_classical = (pc * g).norm();
  rec.w_norm_quantum = (pq * g).norm();
  const Eigen::MatrixXd diff = pc - pq;
  for (const auto &e : batch.episodes)
    for (const auto &s : e.steps) rec.eps_gap += s.log_grad.dot(diff * s.log_grad);
  rec.min_eig_gap = min_eigenvalue(fq.entries - fc.entries);
  rec.loewner_ok = rec.min_eig_gap >= -1e-6;
  rec.executions_classical = fc.executions;
  rec.executions_quantum = fq.executions;
  return rec;
}

// ---------------------------------------------------------------------------
// Training loop

struct TrainResult {
  std::vector<double> curve; ///< undiscounted return of every episode, in order
  std::vector<DiagnosticsRecord> diagnostics;
  Eigen::VectorXd theta;
  std::uint64_t executions_classical = 0; ///< summed over diagnostics checkpoints
  std::uint64_t executions_quantum = 0;
  std::uint64_t executions_metric = 0; ///< cost of the metric that drove the updates
  bool aborted = false;
  std::string abort_reason;
};

using ProgressFn = std::function<void(int update, int episodes_done, double mean_return)>;

inline TrainResult train(const ExperimentConfig &config, std::uint64_t seed,
                         const ProgressFn &progress = {}) {
  config.validate();
  const AnsatzSpec ansatz = config.ansatz.build();
  const auto k = static_cast<Eigen::Index>(ansatz.n_params());
  TrainResult result;
  result.theta = Eigen::VectorXd::Zero(k);
  OptimizerState adam = OptimizerState::zeros(k);

  int done = 0;
  for (int update = 0; done < config.episodes; ++update) {
    const int n = std::min(config.batch_size, config.episodes - done);
    const double beta = beta_at(config.policy.beta, done, config.episodes);
    TrajectoryBatch batch = collect_batch(config.env, config.policy, ansatz, result.theta, n, beta,
                                          seed, static_cast<std::uint64_t>(done), config.gradient);
    returns_and_baseline(batch, config.gamma);
    double batch_total = 0.0;
    for (const auto &e : batch.episodes) {
      result.curve.push_back(e.total_reward());
      batch_total += e.total_reward();
    }
    const Eigen::VectorXd grad = policy_gradient(batch);

    if (config.diagnostics_every > 0 && update % config.diagnostics_every == 0) {
      DiagnosticsRecord rec = regret_diagnostics(batch, result.theta, ansatz, config.policy,
                                                 config.optimizer.phi, config.optimizer.eps);
      rec.update = update;
      rec.episode = done;
      result.executions_classical += rec.executions_classical;
      result.executions_quantum += rec.executions_quantum;
      result.diagnostics.push_back(rec);
    }

    Eigen::VectorXd next;
    if (config.optimizer.kind == OptimizerKind::Adam) {
      auto [state, theta] = adam_step(adam, result.theta, grad, config.optimizer);
      adam = std::move(state);
      next = std::move(theta);
    } else {
      FisherMatrix metric;
      if (config.optimizer.metric == Metric::Classical) {
        metric = classical_fim(batch, FimMode::Sampled);
      } else {
        const auto visited = batch.visited_features();
        metric = config.quantum_estimator == FisherKind::QuantumShift
                     ? quantum_fim_shift(ansatz, result.theta, visited)
                     : quantum_fim_exact(ansatz, result.theta, visited);
      }
      result.executions_metric += metric.executions;
      next = natural_step(result.theta, grad, metric, config.optimizer);
    }
    done += n;
    if (!next.allFinite()) {
      result.aborted = true;
      result.abort_reason = "non-finite parameters after update " + std::to_string(update);
      break;
    }
    result.theta = std::move(next);
    if (progress) progress(update, done, batch_total / n);
  }
  return result;
}

} // namespace qnpg
