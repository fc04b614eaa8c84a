// Parameter updates: Adam and the (generalised) natural gradient family.
#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "qnpg/fisher.hpp"

namespace qnpg {

enum class OptimizerKind { Adam, Natural };
enum class Metric { Classical, Quantum };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double eta = 0.01;
  double phi = 1.0;                  // Natural only
  Metric metric = Metric::Classical; // Natural only
  double eps = 0.1;                  // Natural only
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const {
    if (!(eta > 0.0)) throw std::invalid_argument("optimizer: eta must be > 0");
    if (!(phi >= 0.0 && phi <= 1.0)) throw std::invalid_argument("optimizer: phi must lie in [0, 1]");
    if (!(eps >= 0.0)) throw std::invalid_argument("optimizer: eps must be >= 0");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
      throw std::invalid_argument("optimizer: Adam decay rates must lie in [0, 1)");
    if (!(adam_eps > 0.0)) throw std::invalid_argument("optimizer: adam_eps must be > 0");
  }
};

/// Adam, NPG, NPG phi=0.5, GQNPG, GQNPG phi=0.5 (other phi values are spelled out).
inline std::string optimizer_label(const OptimizerConfig &c) {
  if (c.kind == OptimizerKind::Adam) return "Adam";
  std::string name = c.metric == Metric::Classical ? "NPG" : "GQNPG";
  if (c.phi == 1.0) return name;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", c.phi);
  return name + " phi=" + buf;
}

struct OptimizerState {
  long step = 0;
  Eigen::VectorXd m;
  Eigen::VectorXd v;

  static OptimizerState zeros(Eigen::Index k) {
    return {0, Eigen::VectorXd::Zero(k), Eigen::VectorXd::Zero(k)};
  }
};

/// Bias-corrected Adam applied as ascent: theta + eta * m_hat / (sqrt(v_hat) + eps).
inline std::pair<OptimizerState, Eigen::VectorXd>
adam_step(const OptimizerState &state, const Eigen::VectorXd &theta, const Eigen::VectorXd &grad,
          const OptimizerConfig &config) {
  if (grad.size() != theta.size() || state.m.size() != theta.size() || state.v.size() != theta.size())
    throw std::invalid_argument("adam_step: length mismatch");
  if (!grad.allFinite()) throw std::invalid_argument("adam_step: non-finite gradient component");
  OptimizerState next;
  next.step = state.step + 1;
  next.m = config.adam_beta1 * state.m + (1.0 - config.adam_beta1) * grad;
  next.v = config.adam_beta2 * state.v + (1.0 - config.adam_beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(next.step));
  const double c2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(next.step));
  const Eigen::ArrayXd m_hat = next.m.array() / c1;
  const Eigen::ArrayXd v_hat = next.v.array() / c2;
  Eigen::VectorXd updated = theta.array() + config.eta * m_hat / (v_hat.sqrt() + config.adam_eps);
  return {std::move(next), std::move(updated)};
}

/// theta + eta * (F + eps I)^{-phi} grad
inline Eigen::VectorXd natural_step(const Eigen::VectorXd &theta, const Eigen::VectorXd &grad,
                                    const FisherMatrix &f, const OptimizerConfig &config) {
  if (config.kind != OptimizerKind::Natural)
    throw std::invalid_argument("natural_step: optimizer is not a natural-gradient variant");
  if (theta.size() != grad.size()) throw std::invalid_argument("natural_step: length mismatch");
  return theta + config.eta * natural_direction(f, grad, config.phi, config.eps);
}

} // namespace qnpg
