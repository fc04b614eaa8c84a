// Sampled episodes and the per-step quantities the estimators consume.
#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "qnpg/policies.hpp"

namespace qnpg {

struct TrajectoryStep {
  std::vector<double> features;
  std::size_t action = 0;
  double reward = 0.0;
  Eigen::VectorXd log_grad;         ///< grad log pi(action | s, theta)
  Eigen::VectorXd probs;            ///< pi(. | s, theta)
  Eigen::MatrixXd action_log_grads; ///< grad log pi(a | s, theta) for every a, |A| x k
};

struct Episode {
  std::vector<TrajectoryStep> steps;
  std::vector<double> returns; ///< discounted G_t

  [[nodiscard]] double total_reward() const {
    double s = 0.0;
    for (const auto &st : steps) s += st.reward;
    return s;
  }
};

struct TrajectoryBatch {
  std::vector<Episode> episodes;
  std::vector<double> baseline; ///< b_t over episodes alive at t
  double gamma = 1.0;

  // What the estimate would cost on hardware depends on the policy and circuit.
  PolicyKind policy_kind = PolicyKind::Softmax;
  std::size_t n_qubits = 0;
  std::size_t n_actions = 0;
  std::size_t partition_size = 0; ///< max_a |V_a|

  [[nodiscard]] std::size_t total_steps() const {
    std::size_t n = 0;
    for (const auto &e : episodes) n += e.steps.size();
    return n;
  }

  [[nodiscard]] std::vector<std::vector<double>> visited_features() const {
    std::vector<std::vector<double>> out;
    out.reserve(total_steps());
    for (const auto &e : episodes)
      for (const auto &s : e.steps) out.push_back(s.features);
    return out;
  }
};

} // namespace qnpg
