// Exact statevector simulation of data-reuploading parameterized circuits.
//
// Basis ordering is little-endian: bit i of a basis index is the value of
// qubit i. All functions are pure; a Statevector is a plain value type.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace qnpg {

using Complex = std::complex<double>;

class Statevector {
public:
  /// |0...0> on n qubits.
  explicit Statevector(std::size_t n_qubits)
      : n_qubits_(n_qubits), amplitudes_(std::size_t{1} << n_qubits) {
    if (n_qubits == 0 || n_qubits > 30)
      throw std::invalid_argument("Statevector: n_qubits must be in [1, 30]");
    amplitudes_[0] = 1.0;
  }

  Statevector(std::size_t n_qubits, std::vector<Complex> amplitudes)
      : n_qubits_(n_qubits), amplitudes_(std::move(amplitudes)) {
    if (n_qubits == 0 || n_qubits > 30)
      throw std::invalid_argument("Statevector: n_qubits must be in [1, 30]");
    if (amplitudes_.size() != (std::size_t{1} << n_qubits))
      throw std::invalid_argument("Statevector: expected 2^" +
                                  std::to_string(n_qubits) + " amplitudes, got " +
                                  std::to_string(amplitudes_.size()));
  }

  [[nodiscard]] std::size_t n_qubits() const noexcept { return n_qubits_; }
  [[nodiscard]] std::size_t dim() const noexcept { return amplitudes_.size(); }
  [[nodiscard]] std::span<const Complex> amplitudes() const noexcept {
    return amplitudes_;
  }
  [[nodiscard]] std::span<Complex> amplitudes() noexcept { return amplitudes_; }
  [[nodiscard]] const Complex &operator[](std::size_t i) const { return amplitudes_[i]; }

  [[nodiscard]] double norm_sq() const noexcept {
    double s = 0.0;
    for (const auto &a : amplitudes_) s += std::norm(a);
    return s;
  }

  /// Applies the 2x2 matrix [[m00, m01], [m10, m11]] to qubit q.
  void apply_1q(std::size_t q, Complex m00, Complex m01, Complex m10, Complex m11) {
    const std::size_t stride = std::size_t{1} << q;
    const std::size_t n = amplitudes_.size();
    for (std::size_t base = 0; base < n; base += 2 * stride) {
      for (std::size_t i = base; i < base + stride; ++i) {
        const Complex a0 = amplitudes_[i];
        const Complex a1 = amplitudes_[i + stride];
        amplitudes_[i] = m00 * a0 + m01 * a1;
        amplitudes_[i + stride] = m10 * a0 + m11 * a1;
      }
    }
  }

  void apply_diag(std::size_t q, Complex d0, Complex d1) {
    const std::size_t mask = std::size_t{1} << q;
    for (std::size_t i = 0; i < amplitudes_.size(); ++i)
      amplitudes_[i] *= (i & mask) ? d1 : d0;
  }

  void apply_cz(std::size_t q1, std::size_t q2) {
    const std::size_t mask = (std::size_t{1} << q1) | (std::size_t{1} << q2);
    for (std::size_t i = 0; i < amplitudes_.size(); ++i)
      if ((i & mask) == mask) amplitudes_[i] = -amplitudes_[i];
  }

private:
  std::size_t n_qubits_;
  std::vector<Complex> amplitudes_;
};

// ---------------------------------------------------------------------------
// Gate program

struct VariationalIndex {
  std::size_t value;
  friend bool operator==(VariationalIndex, VariationalIndex) = default;
};
struct FeatureIndex {
  std::size_t value;
  friend bool operator==(FeatureIndex, FeatureIndex) = default;
};
using Slot = std::variant<std::monostate, VariationalIndex, FeatureIndex>;

enum class GateKind { Hadamard, RotX, RotY, RotZ, CZ };

struct Gate {
  GateKind kind;
  std::size_t q0 = 0;
  std::size_t q1 = 0; // CZ only
  Slot slot{};

  [[nodiscard]] bool is_rotation() const noexcept {
    return kind == GateKind::RotX || kind == GateKind::RotY || kind == GateKind::RotZ;
  }
  [[nodiscard]] bool is_variational() const noexcept {
    return std::holds_alternative<VariationalIndex>(slot);
  }
};

/// How features enter the reuploading layers.
enum class Encoding {
  YZ,    ///< RotY(q, feature) then RotZ(q, feature)
  /// RotZ(q, feature) only. The zero-parameter state stays an equal
  /// superposition, but gradients started from zero never leave a small
  /// invariant subspace, so this variant does not learn from zero init.
  Phase,
};

/// A validated gate program with variational and feature slots.
class AnsatzSpec {
public:
  AnsatzSpec(std::size_t n_qubits, std::size_t n_layers, std::vector<Gate> gates)
      : n_qubits_(n_qubits), n_layers_(n_layers), gates_(std::move(gates)) {
    if (n_qubits == 0 || n_qubits > 30)
      throw std::invalid_argument("AnsatzSpec: n_qubits must be in [1, 30]");
    validate();
  }

  [[nodiscard]] std::size_t n_qubits() const noexcept { return n_qubits_; }
  [[nodiscard]] std::size_t n_layers() const noexcept { return n_layers_; }
  [[nodiscard]] std::size_t n_params() const noexcept { return param_gate_.size(); }
  /// Number of feature entries the program reads (max FeatureIndex + 1).
  [[nodiscard]] std::size_t n_features() const noexcept { return n_features_; }
  [[nodiscard]] std::span<const Gate> gates() const noexcept { return gates_; }
  /// True when the program opens with a Hadamard on every qubit, which makes
  /// the zero-parameter state an equal superposition.
  [[nodiscard]] bool has_hadamard_prefix() const noexcept {
    std::vector<bool> seen(n_qubits_, false);
    std::size_t count = 0;
    for (const Gate &g : gates_) {
      if (g.kind != GateKind::Hadamard || seen[g.q0]) break;
      seen[g.q0] = true;
      if (++count == n_qubits_) return true;
    }
    return false;
  }
  /// Position in gates() of the rotation driven by parameter j.
  [[nodiscard]] std::size_t gate_of_param(std::size_t j) const { return param_gate_.at(j); }

private:
  void validate() {
    std::size_t max_var = 0;
    bool any_var = false;
    for (std::size_t g = 0; g < gates_.size(); ++g) {
      const Gate &gate = gates_[g];
      if (gate.q0 >= n_qubits_ || (gate.kind == GateKind::CZ && gate.q1 >= n_qubits_))
        throw std::invalid_argument("AnsatzSpec: gate " + std::to_string(g) +
                                    " addresses a qubit out of range");
      if (gate.kind == GateKind::CZ && gate.q0 == gate.q1)
        throw std::invalid_argument("AnsatzSpec: CZ needs two distinct qubits");
      if (gate.is_rotation() && std::holds_alternative<std::monostate>(gate.slot))
        throw std::invalid_argument("AnsatzSpec: rotation gate " + std::to_string(g) +
                                    " has no angle slot");
      if (!gate.is_rotation() && !std::holds_alternative<std::monostate>(gate.slot))
        throw std::invalid_argument("AnsatzSpec: only rotations take an angle slot");
      if (const auto *v = std::get_if<VariationalIndex>(&gate.slot)) {
        max_var = std::max(max_var, v->value);
        any_var = true;
      }
      if (const auto *f = std::get_if<FeatureIndex>(&gate.slot))
        n_features_ = std::max(n_features_, f->value + 1);
    }
    const std::size_t k = any_var ? max_var + 1 : 0;
    constexpr auto unset = static_cast<std::size_t>(-1);
    param_gate_.assign(k, unset);
    for (std::size_t g = 0; g < gates_.size(); ++g) {
      if (const auto *v = std::get_if<VariationalIndex>(&gates_[g].slot)) {
        if (param_gate_[v->value] != unset)
          throw std::invalid_argument("AnsatzSpec: variational index " +
                                      std::to_string(v->value) + " used twice");
        param_gate_[v->value] = g;
      }
    }
    for (std::size_t j = 0; j < k; ++j)
      if (param_gate_[j] == unset)
        throw std::invalid_argument("AnsatzSpec: variational index " + std::to_string(j) +
                                    " is never used");
  }

  std::size_t n_qubits_;
  std::size_t n_layers_;
  std::vector<Gate> gates_;
  std::vector<std::size_t> param_gate_;
  std::size_t n_features_ = 0;
};


// ---------------------------------------------------------------------------
// Gate application

namespace detail {

inline double slot_angle(const Gate &gate, std::span<const double> theta,
                         std::span<const double> features) {
  if (const auto *v = std::get_if<VariationalIndex>(&gate.slot)) return theta[v->value];
  if (const auto *f = std::get_if<FeatureIndex>(&gate.slot)) return features[f->value];
  return 0.0;
}

/// Applies gate (or its adjoint) with the given rotation angle.
inline void apply_gate(Statevector &psi, const Gate &gate, double angle, bool adjoint = false) {
  using namespace std::complex_literals;
  if (adjoint) angle = -angle; // all rotations satisfy R(t)^dagger = R(-t)
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  switch (gate.kind) {
  case GateKind::Hadamard: {
    const double h = 0.5 * std::numbers::sqrt2;
    psi.apply_1q(gate.q0, h, h, h, -h);
    break;
  }
  case GateKind::RotX:
    psi.apply_1q(gate.q0, c, -1i * s, -1i * s, c);
    break;
  case GateKind::RotY:
    psi.apply_1q(gate.q0, c, -s, s, c);
    break;
  case GateKind::RotZ:
    psi.apply_diag(gate.q0, Complex(c, -s), Complex(c, s));
    break;
  case GateKind::CZ:
    psi.apply_cz(gate.q0, gate.q1);
    break;
  }
}

/// Multiplies by the rotation generator -i/2 * Pauli of a rotation gate.
inline void apply_generator(Statevector &psi, const Gate &gate) {
  using namespace std::complex_literals;
  switch (gate.kind) {
  case GateKind::RotX:
    psi.apply_1q(gate.q0, 0.0, -0.5i, -0.5i, 0.0);
    break;
  case GateKind::RotY: // -i/2 * [[0,-i],[i,0]]
    psi.apply_1q(gate.q0, 0.0, -0.5, 0.5, 0.0);
    break;
  case GateKind::RotZ:
    psi.apply_diag(gate.q0, -0.5i, 0.5i);
    break;
  default:
    throw std::logic_error("apply_generator: not a rotation gate");
  }
}

inline void check_inputs(const AnsatzSpec &ansatz, std::span<const double> theta,
                         std::span<const double> features) {
  if (theta.size() != ansatz.n_params())
    throw std::invalid_argument("theta has length " + std::to_string(theta.size()) +
                                " but the ansatz has " + std::to_string(ansatz.n_params()) +
                                " variational parameters");
  if (features.size() < ansatz.n_features())
    throw std::invalid_argument("features has length " + std::to_string(features.size()) +
                                " but the ansatz reads " +
                                std::to_string(ansatz.n_features()) + " features");
  for (double t : theta)
    if (!std::isfinite(t)) throw std::invalid_argument("theta contains a non-finite angle");
  for (std::size_t i = 0; i < ansatz.n_features(); ++i)
    if (!std::isfinite(features[i]))
      throw std::invalid_argument("features contain a non-finite angle");
}

} // namespace detail

/// Hardware-efficient reuploading circuit: Hadamard wall, then per layer a
/// variational RotY+RotZ on every qubit, a CZ ring and the feature encoding,
/// closed by a final variational RotY+RotZ layer. k = 2 n (L + 1).
/// Qubit q reads feature q mod n_features.
inline AnsatzSpec reuploading_ansatz(std::size_t n_qubits, std::size_t n_layers,
                                     std::size_t n_features = 4,
                                     Encoding encoding = Encoding::YZ) {
  if (n_features == 0) throw std::invalid_argument("reuploading_ansatz: n_features == 0");
  std::vector<Gate> gates;
  std::size_t next = 0;
  auto variational_wall = [&] {
    for (std::size_t q = 0; q < n_qubits; ++q) {
      gates.push_back({GateKind::RotY, q, 0, VariationalIndex{next++}});
      gates.push_back({GateKind::RotZ, q, 0, VariationalIndex{next++}});
    }
  };
  for (std::size_t q = 0; q < n_qubits; ++q) gates.push_back({GateKind::Hadamard, q});
  for (std::size_t layer = 0; layer < n_layers; ++layer) {
    variational_wall();
    if (n_qubits == 2) {
      gates.push_back({GateKind::CZ, 0, 1});
    } else if (n_qubits > 2) {
      for (std::size_t q = 0; q < n_qubits; ++q)
        gates.push_back({GateKind::CZ, q, (q + 1) % n_qubits});
    }
    for (std::size_t q = 0; q < n_qubits; ++q) {
      const FeatureIndex f{q % n_features};
      if (encoding == Encoding::YZ) gates.push_back({GateKind::RotY, q, 0, f});
      gates.push_back({GateKind::RotZ, q, 0, f});
    }
  }
  variational_wall();
  AnsatzSpec ansatz(n_qubits, n_layers, std::move(gates));
  if (encoding == Encoding::Phase) {
    // Zero parameters leave only diagonal gates after the Hadamards, so every
    // basis state must come out equally likely.
    const std::vector<double> theta(ansatz.n_params(), 0.0);
    std::vector<double> probe(n_features);
    for (std::size_t i = 0; i < n_features; ++i) probe[i] = 0.7 * static_cast<double>(i) - 1.3;
    Statevector psi(n_qubits);
    for (const Gate &g : ansatz.gates()) {
      double angle = 0.0;
      if (const auto *f = std::get_if<FeatureIndex>(&g.slot)) angle = probe[f->value];
      detail::apply_gate(psi, g, angle);
    }
    const double uniform = 1.0 / static_cast<double>(psi.dim());
    for (const auto &a : psi.amplitudes())
      if (std::abs(std::norm(a) - uniform) > 1e-10)
        throw std::logic_error("reuploading_ansatz: zero-parameter policy is not uniform");
  }
  return ansatz;
}

inline std::span<const double> as_span(const Eigen::VectorXd &v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

/// Runs the circuit on |0...0>.
inline Statevector prepare_state(const AnsatzSpec &ansatz, std::span<const double> theta,
                                 std::span<const double> features) {
  detail::check_inputs(ansatz, theta, features);
  Statevector psi(ansatz.n_qubits());
  for (const Gate &g : ansatz.gates())
    detail::apply_gate(psi, g, detail::slot_angle(g, theta, features));
  return psi;
}

inline Statevector prepare_state(const AnsatzSpec &ansatz, const Eigen::VectorXd &theta,
                                 std::span<const double> features) {
  return prepare_state(ansatz, as_span(theta), features);
}

/// Exact derivative d|psi>/d theta_j, obtained by inserting the generator
/// right after the parameterized gate.
inline std::vector<Complex> state_derivative(const AnsatzSpec &ansatz,
                                             std::span<const double> theta,
                                             std::span<const double> features,
                                             std::size_t j) {
  detail::check_inputs(ansatz, theta, features);
  if (j >= ansatz.n_params())
    throw std::out_of_range("state_derivative: parameter index " + std::to_string(j) +
                            " out of range [0, " + std::to_string(ansatz.n_params()) + ")");
  const std::size_t target = ansatz.gate_of_param(j);
  Statevector psi(ansatz.n_qubits());
  const auto gates = ansatz.gates();
  for (std::size_t g = 0; g < gates.size(); ++g) {
    detail::apply_gate(psi, gates[g], detail::slot_angle(gates[g], theta, features));
    if (g == target) detail::apply_generator(psi, gates[g]);
  }
  const auto amps = psi.amplitudes();
  return {amps.begin(), amps.end()};
}

/// All k state derivatives in one sweep: the prefix state is shared and only
/// the suffix is replayed per parameter.
inline std::vector<std::vector<Complex>> state_jacobian(const AnsatzSpec &ansatz,
                                                        std::span<const double> theta,
                                                        std::span<const double> features) {
  detail::check_inputs(ansatz, theta, features);
  const auto gates = ansatz.gates();
  std::vector<double> angles(gates.size());
  for (std::size_t g = 0; g < gates.size(); ++g)
    angles[g] = detail::slot_angle(gates[g], theta, features);

  std::vector<std::vector<Complex>> out(ansatz.n_params());
  Statevector prefix(ansatz.n_qubits());
  for (std::size_t g = 0; g < gates.size(); ++g) {
    detail::apply_gate(prefix, gates[g], angles[g]);
    const auto *v = std::get_if<VariationalIndex>(&gates[g].slot);
    if (!v) continue;
    Statevector d = prefix;
    detail::apply_generator(d, gates[g]);
    for (std::size_t h = g + 1; h < gates.size(); ++h)
      detail::apply_gate(d, gates[h], angles[h]);
    const auto amps = d.amplitudes();
    out[v->value].assign(amps.begin(), amps.end());
  }
  return out;
}

/// |<a|b>|^2
inline double overlap_sq(const Statevector &a, const Statevector &b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("overlap_sq: dimension mismatch (" + std::to_string(a.dim()) +
                                " vs " + std::to_string(b.dim()) + ")");
  Complex acc = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) acc += std::conj(a[i]) * b[i];
  return std::norm(acc);
}

// ---------------------------------------------------------------------------
// Measurement partitions

/// Maps every outcome of a computational-basis measurement on a subset of
/// qubits to an action. Outcome bit i is the value of measured_qubits[i].
class Partition {
public:
  Partition(std::vector<std::size_t> measured_qubits, std::vector<std::size_t> assignment)
      : measured_(std::move(measured_qubits)), assignment_(std::move(assignment)) {
    if (measured_.empty()) throw std::invalid_argument("Partition: no measured qubits");
    if (measured_.size() > 30) throw std::invalid_argument("Partition: too many qubits");
    for (std::size_t i = 0; i < measured_.size(); ++i)
      for (std::size_t j = i + 1; j < measured_.size(); ++j)
        if (measured_[i] == measured_[j])
          throw std::invalid_argument("Partition: qubit measured twice");
    if (assignment_.size() != (std::size_t{1} << measured_.size()))
      throw std::invalid_argument("Partition: assignment must cover all 2^m outcomes");
    for (std::size_t a : assignment_) n_actions_ = std::max(n_actions_, a + 1);
    std::vector<bool> used(n_actions_, false);
    for (std::size_t a : assignment_) used[a] = true;
    for (std::size_t a = 0; a < n_actions_; ++a)
      if (!used[a])
        throw std::invalid_argument("Partition: action " + std::to_string(a) +
                                    " has no outcomes");
  }

  /// Single measured qubit, outcome b -> action b.
  static Partition single_qubit(std::size_t qubit) { return Partition({qubit}, {0, 1}); }

  /// Measure qubits 0..m-1; outcome b -> action int(b) mod n_actions.
  static Partition modulo(std::size_t n_measured, std::size_t n_actions) {
    if (n_actions == 0) throw std::invalid_argument("Partition::modulo: zero actions");
    std::vector<std::size_t> qubits(n_measured);
    for (std::size_t i = 0; i < n_measured; ++i) qubits[i] = i;
    std::vector<std::size_t> assignment(std::size_t{1} << n_measured);
    for (std::size_t b = 0; b < assignment.size(); ++b) assignment[b] = b % n_actions;
    return Partition(std::move(qubits), std::move(assignment));
  }

  [[nodiscard]] std::span<const std::size_t> measured_qubits() const noexcept { return measured_; }
  [[nodiscard]] std::span<const std::size_t> assignment() const noexcept { return assignment_; }
  [[nodiscard]] std::size_t n_actions() const noexcept { return n_actions_; }

  /// Action assigned to a full-register basis index.
  [[nodiscard]] std::size_t action_of_basis(std::size_t basis) const {
    std::size_t outcome = 0;
    for (std::size_t i = 0; i < measured_.size(); ++i)
      outcome |= ((basis >> measured_[i]) & 1u) << i;
    return assignment_[outcome];
  }

  /// |V_a|: number of full-register basis states that map to action a.
  [[nodiscard]] std::size_t basis_states_for(std::size_t action, std::size_t n_qubits) const {
    std::size_t outcomes = 0;
    for (std::size_t a : assignment_) outcomes += (a == action);
    return outcomes << (n_qubits - measured_.size());
  }

  /// max_a |V_a|
  [[nodiscard]] std::size_t max_partition_size(std::size_t n_qubits) const {
    std::size_t best = 0;
    for (std::size_t a = 0; a < n_actions_; ++a) best = std::max(best, basis_states_for(a, n_qubits));
    return best;
  }

  void check_fits(std::size_t n_qubits) const {
    for (std::size_t q : measured_)
      if (q >= n_qubits)
        throw std::invalid_argument("Partition: measured qubit " + std::to_string(q) +
                                    " outside a " + std::to_string(n_qubits) + "-qubit register");
  }

private:
  std::vector<std::size_t> measured_;
  std::vector<std::size_t> assignment_;
  std::size_t n_actions_ = 0;
};

/// Born-rule probability of each action, marginalising unmeasured qubits.
inline std::vector<double> partition_probs(const Statevector &psi, const Partition &partition) {
  partition.check_fits(psi.n_qubits());
  std::vector<double> probs(partition.n_actions(), 0.0);
  for (std::size_t i = 0; i < psi.dim(); ++i)
    probs[partition.action_of_basis(i)] += std::norm(psi[i]);
  return probs;
}

} // namespace qnpg
