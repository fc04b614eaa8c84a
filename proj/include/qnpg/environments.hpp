// CartPole and Acrobot with the classic Barto/Sutton dynamics. Both expose
// four features to the policy.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

#include "qnpg/random.hpp"

namespace qnpg {

enum class EnvKind { CartPole, Acrobot };

inline std::string to_string(EnvKind kind) {
  return kind == EnvKind::CartPole ? "cartpole" : "acrobot";
}

inline std::size_t action_count(EnvKind kind) { return kind == EnvKind::CartPole ? 2 : 3; }
inline int horizon(EnvKind kind) { return kind == EnvKind::CartPole ? 200 : 500; }

/// CartPole: (x, x_dot, pole angle, pole angular velocity).
/// Acrobot: (theta1, theta2, theta1_dot, theta2_dot).
struct EnvState {
  EnvKind kind = EnvKind::CartPole;
  std::array<double, 4> s{};
  int step_count = 0;
  bool done = false;
};

struct StepResult {
  std::array<double, 4> features{};
  double reward = 0.0;
  bool done = false;
};

namespace cartpole {
inline constexpr double gravity = 9.8;
inline constexpr double cart_mass = 1.0;
inline constexpr double pole_mass = 0.1;
inline constexpr double total_mass = cart_mass + pole_mass;
inline constexpr double half_length = 0.5;
inline constexpr double pole_mass_length = pole_mass * half_length;
inline constexpr double force_mag = 10.0;
inline constexpr double dt = 0.02;
inline constexpr double x_limit = 2.4;
inline constexpr double angle_limit = 12.0 * 2.0 * std::numbers::pi / 360.0;
} // namespace cartpole

namespace acrobot {
inline constexpr double link_mass = 1.0;
inline constexpr double link_length = 1.0;
inline constexpr double link_com = 0.5;
inline constexpr double link_moi = 1.0;
inline constexpr double gravity = 9.8;
inline constexpr double dt = 0.2;
inline constexpr double max_vel_1 = 4.0 * std::numbers::pi;
inline constexpr double max_vel_2 = 9.0 * std::numbers::pi;
inline constexpr double goal_height = 1.0;

inline double height(const std::array<double, 4> &s) {
  return -std::cos(s[0]) - std::cos(s[0] + s[1]);
}

/// Time derivative of (theta1, theta2, dtheta1, dtheta2) under torque on joint 2.
inline std::array<double, 4> derivative(const std::array<double, 4> &s, double torque) {
  constexpr double m1 = link_mass, m2 = link_mass, l1 = link_length;
  constexpr double lc1 = link_com, lc2 = link_com, i1 = link_moi, i2 = link_moi, g = gravity;
  constexpr double half_pi = std::numbers::pi / 2.0;
  const auto [t1, t2, dt1, dt2] = s;
  const double d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * std::cos(t2)) + i1 + i2;
  const double d2 = m2 * (lc2 * lc2 + l1 * lc2 * std::cos(t2)) + i2;
  const double phi2 = m2 * lc2 * g * std::cos(t1 + t2 - half_pi);
  const double phi1 = -m2 * l1 * lc2 * dt2 * dt2 * std::sin(t2) -
                      2.0 * m2 * l1 * lc2 * dt2 * dt1 * std::sin(t2) +
                      (m1 * lc1 + m2 * l1) * g * std::cos(t1 - half_pi) + phi2;
  const double ddt2 = (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dt1 * dt1 * std::sin(t2) - phi2) /
                      (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
  const double ddt1 = -(d2 * ddt2 + phi1) / d1;
  return {dt1, dt2, ddt1, ddt2};
}

inline std::array<double, 4> rk4(const std::array<double, 4> &s, double torque, double h) {
  auto axpy = [](const std::array<double, 4> &x, double a, const std::array<double, 4> &y) {
    return std::array<double, 4>{x[0] + a * y[0], x[1] + a * y[1], x[2] + a * y[2], x[3] + a * y[3]};
  };
  const auto k1 = derivative(s, torque);
  const auto k2 = derivative(axpy(s, h / 2.0, k1), torque);
  const auto k3 = derivative(axpy(s, h / 2.0, k2), torque);
  const auto k4 = derivative(axpy(s, h, k3), torque);
  std::array<double, 4> out{};
  for (std::size_t i = 0; i < 4; ++i)
    out[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}
} // namespace acrobot

/// Wraps to (-pi, pi].
inline double wrap_angle(double x) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double y = std::fmod(x + std::numbers::pi, two_pi);
  if (y <= 0.0) y += two_pi;
  return y - std::numbers::pi;
}

inline EnvState reset(EnvKind kind, Rng &rng) {
  EnvState st;
  st.kind = kind;
  const double half_width = kind == EnvKind::CartPole ? 0.05 : 0.1;
  for (auto &x : st.s) x = rng.uniform(-half_width, half_width);
  return st;
}

inline std::array<double, 4> features(const EnvState &st) {
  if (st.kind == EnvKind::CartPole) return st.s;
  return {st.s[0], st.s[1], st.s[2] / acrobot::max_vel_1, st.s[3] / acrobot::max_vel_2};
}

inline std::pair<EnvState, StepResult> step(const EnvState &st, std::size_t action) {
  if (st.done) throw std::logic_error("step: episode is over; reset the environment first");
  if (action >= action_count(st.kind))
    throw std::invalid_argument("step: invalid action " + std::to_string(action) + " for " +
                                to_string(st.kind));
  EnvState next = st;
  next.step_count = st.step_count + 1;
  StepResult out;
  if (st.kind == EnvKind::CartPole) {
    using namespace cartpole;
    const auto [x, x_dot, angle, angle_dot] = st.s;
    const double force = action == 1 ? force_mag : -force_mag;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    const double temp = (force + pole_mass_length * angle_dot * angle_dot * s) / total_mass;
    const double angle_acc =
        (gravity * s - c * temp) / (half_length * (4.0 / 3.0 - pole_mass * c * c / total_mass));
    const double x_acc = temp - pole_mass_length * angle_acc * c / total_mass;
    next.s = {x + dt * x_dot, x_dot + dt * x_acc, wrap_angle(angle + dt * angle_dot),
              angle_dot + dt * angle_acc};
    out.reward = 1.0;
    next.done = std::abs(next.s[0]) > x_limit || std::abs(next.s[2]) > angle_limit ||
                next.step_count >= horizon(EnvKind::CartPole);
  } else {
    using namespace acrobot;
    const double torque = static_cast<double>(action) - 1.0;
    auto s = rk4(st.s, torque, dt);
    s[0] = wrap_angle(s[0]);
    s[1] = wrap_angle(s[1]);
    s[2] = std::clamp(s[2], -max_vel_1, max_vel_1);
    s[3] = std::clamp(s[3], -max_vel_2, max_vel_2);
    next.s = s;
    const double h = height(s);
    out.reward = -1.0 + h;
    next.done = h > goal_height || next.step_count >= horizon(EnvKind::Acrobot);
  }
  out.features = features(next);
  out.done = next.done;
  return {next, out};
}

} // namespace qnpg
