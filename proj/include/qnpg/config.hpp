// INI experiment files and a stable fingerprint of the parsed configuration.
//
//   [experiment]  name env episodes batch_size gamma seeds diagnostics_every
//                 gradient quantum_estimator
//   [ansatz]      qubits layers encoding
//   [policy]      kind beta_final beta_schedule anneal_episodes
//   [optimizer]   kind eta phi metric eps adam_beta1 adam_beta2 adam_eps
//
// Every key is optional; omitted keys keep the ExperimentConfig defaults.
#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "qnpg/trainer.hpp"

namespace qnpg {

class ConfigError : public std::runtime_error {
public:
  ConfigError(const std::string &file, int line, const std::string &field, const std::string &what)
      : std::runtime_error(format(file, line, field, what)), line_(line), field_(field) {}

  [[nodiscard]] int line() const { return line_; }
  [[nodiscard]] const std::string &field() const { return field_; }

private:
  static std::string format(const std::string &file, int line, const std::string &field,
                            const std::string &what) {
    std::string out = file;
    if (line > 0) out += ":" + std::to_string(line);
    if (!field.empty()) out += ": " + field;
    return out + ": " + what;
  }

  int line_;
  std::string field_;
};

namespace detail {

inline std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// ptree drops positions, so key lines are recovered with a second pass.
inline std::map<std::string, int> key_lines(std::istream &in) {
  std::map<std::string, int> lines;
  std::string section, raw;
  int n = 0;
  while (std::getline(in, raw)) {
    ++n;
    const std::string t = trim(raw);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
    } else if (const auto eq = t.find('='); eq != std::string::npos) {
      lines[section + "." + trim(t.substr(0, eq))] = n;
    }
  }
  return lines;
}

inline double parse_double(const std::string &text) {
  std::istringstream is(text);
  is.imbue(std::locale::classic());
  double v = 0.0;
  is >> v;
  if (is.fail() || !is.eof()) throw std::invalid_argument("expected a number, got '" + text + "'");
  return v;
}

inline long long parse_integer(const std::string &text) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used == 0 || used != text.size())
    throw std::invalid_argument("expected an integer, got '" + text + "'");
  return v;
}

inline std::vector<std::uint64_t> parse_seeds(const std::string &text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const long long v = parse_integer(trim(item));
    if (v < 0) throw std::invalid_argument("seeds must be non-negative");
    seeds.push_back(static_cast<std::uint64_t>(v));
  }
  if (seeds.empty()) throw std::invalid_argument("expected a comma-separated seed list");
  return seeds;
}

template <class Enum>
Enum parse_choice(const std::string &text, std::initializer_list<std::pair<const char *, Enum>> choices) {
  std::string allowed;
  for (const auto &[name, value] : choices) {
    if (text == name) return value;
    allowed += allowed.empty() ? name : std::string(", ") + name;
  }
  throw std::invalid_argument("unknown value '" + text + "' (expected one of: " + allowed + ")");
}

/// Shortest round-trip text for a double, independent of the global locale.
inline std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace detail

/// Reads an experiment from INI text. `origin` only labels error messages.
inline ExperimentConfig parse_config(const std::string &text, const std::string &origin = "<config>") {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  {
    std::istringstream in(text);
    try {
      pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error &e) {
      throw ConfigError(origin, static_cast<int>(e.line()), "", e.message());
    }
  }
  std::istringstream again(text);
  const auto lines = detail::key_lines(again);

  ExperimentConfig c;
  c.name.clear();
  bool schedule_given = false;

  using Setter = std::function<void(const std::string &)>;
  const std::map<std::string, Setter> setters = {
      {"experiment.name", [&](const std::string &v) { c.name = v; }},
      {"experiment.env",
       [&](const std::string &v) {
         c.env = detail::parse_choice<EnvKind>(v, {{"cartpole", EnvKind::CartPole}, {"acrobot", EnvKind::Acrobot}});
       }},
      {"experiment.episodes", [&](const std::string &v) { c.episodes = static_cast<int>(detail::parse_integer(v)); }},
      {"experiment.batch_size", [&](const std::string &v) { c.batch_size = static_cast<int>(detail::parse_integer(v)); }},
      {"experiment.gamma", [&](const std::string &v) { c.gamma = detail::parse_double(v); }},
      {"experiment.seeds", [&](const std::string &v) { c.seeds = detail::parse_seeds(v); }},
      {"experiment.diagnostics_every",
       [&](const std::string &v) { c.diagnostics_every = static_cast<int>(detail::parse_integer(v)); }},
      {"experiment.gradient",
       [&](const std::string &v) {
         c.gradient = detail::parse_choice<GradientMethod>(
             v, {{"parameter_shift", GradientMethod::ParameterShift}, {"adjoint", GradientMethod::Adjoint}});
       }},
      {"experiment.quantum_estimator",
       [&](const std::string &v) {
         c.quantum_estimator = detail::parse_choice<FisherKind>(
             v, {{"exact", FisherKind::QuantumExact}, {"shift", FisherKind::QuantumShift}});
       }},
      {"ansatz.qubits",
       [&](const std::string &v) {
         const long long n = detail::parse_integer(v);
         if (n < 1 || n > 20) throw std::invalid_argument("qubits must lie in [1, 20]");
         c.ansatz.n_qubits = static_cast<std::size_t>(n);
       }},
      {"ansatz.layers",
       [&](const std::string &v) {
         const long long n = detail::parse_integer(v);
         if (n < 0) throw std::invalid_argument("layers must be >= 0");
         c.ansatz.n_layers = static_cast<std::size_t>(n);
       }},
      {"ansatz.encoding",
       [&](const std::string &v) {
         c.ansatz.encoding = detail::parse_choice<Encoding>(v, {{"phase", Encoding::Phase}, {"yz", Encoding::YZ}});
       }},
      {"policy.kind",
       [&](const std::string &v) {
         c.policy.kind = detail::parse_choice<PolicyKind>(v, {{"born", PolicyKind::Born}, {"softmax", PolicyKind::Softmax}});
       }},
      {"policy.beta_final", [&](const std::string &v) { c.policy.beta.beta_final = detail::parse_double(v); }},
      {"policy.beta_schedule",
       [&](const std::string &v) {
         schedule_given = true;
         c.policy.beta.kind = detail::parse_choice<BetaSchedule::Kind>(
             v, {{"constant", BetaSchedule::Kind::Constant}, {"linear", BetaSchedule::Kind::LinearAnneal}});
       }},
      {"policy.anneal_episodes",
       [&](const std::string &v) {
         const long long n = detail::parse_integer(v);
         if (n < 1) throw std::invalid_argument("anneal_episodes must be >= 1");
         c.policy.beta.over_episodes = static_cast<int>(n);
       }},
      {"optimizer.kind",
       [&](const std::string &v) {
         c.optimizer.kind = detail::parse_choice<OptimizerKind>(
             v, {{"adam", OptimizerKind::Adam}, {"natural", OptimizerKind::Natural}});
       }},
      {"optimizer.eta", [&](const std::string &v) { c.optimizer.eta = detail::parse_double(v); }},
      {"optimizer.phi", [&](const std::string &v) { c.optimizer.phi = detail::parse_double(v); }},
      {"optimizer.metric",
       [&](const std::string &v) {
         c.optimizer.metric = detail::parse_choice<Metric>(v, {{"classical", Metric::Classical}, {"quantum", Metric::Quantum}});
       }},
      {"optimizer.eps", [&](const std::string &v) { c.optimizer.eps = detail::parse_double(v); }},
      {"optimizer.adam_beta1", [&](const std::string &v) { c.optimizer.adam_beta1 = detail::parse_double(v); }},
      {"optimizer.adam_beta2", [&](const std::string &v) { c.optimizer.adam_beta2 = detail::parse_double(v); }},
      {"optimizer.adam_eps", [&](const std::string &v) { c.optimizer.adam_eps = detail::parse_double(v); }},
  };

  auto line_of = [&](const std::string &key) {
    const auto it = lines.find(key);
    return it == lines.end() ? 0 : it->second;
  };

  for (const auto &[section, body] : tree) {
    if (body.empty() && !body.data().empty())
      throw ConfigError(origin, line_of("." + section), section, "key outside of a section");
    for (const auto &[key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = setters.find(full);
      if (it == setters.end()) throw ConfigError(origin, line_of(full), full, "unknown key");
      try {
        it->second(detail::trim(value.data()));
      } catch (const std::exception &e) {
        throw ConfigError(origin, line_of(full), full, e.what());
      }
    }
  }

  if (!schedule_given && tree.get_child_optional("policy.anneal_episodes"))
    c.policy.beta.kind = BetaSchedule::Kind::LinearAnneal;
  if (c.policy.beta.kind == BetaSchedule::Kind::LinearAnneal && c.policy.beta.over_episodes < 1)
    throw ConfigError(origin, line_of("policy.beta_schedule"), "policy.anneal_episodes",
                      "a linear schedule needs anneal_episodes >= 1");
  c.policy.partition = default_partition(c.env, c.ansatz.n_qubits);
  if (c.name.empty()) c.name = to_string(c.env) + "-" + optimizer_label(c.optimizer);

  try {
    c.validate();
    (void)c.ansatz.build();
  } catch (const std::exception &e) {
    throw ConfigError(origin, 0, "", e.what());
  }
  return c;
}

inline ExperimentConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, 0, "", "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

/// One `section.key=value` line per field, in a fixed order. Two configs that
/// parse to the same experiment serialise identically.
inline std::string canonical_form(const ExperimentConfig &c) {
  using detail::exact;
  std::ostringstream os;
  os.imbue(std::locale::classic());
  const bool natural = c.optimizer.kind == OptimizerKind::Natural;
  const bool annealed = c.policy.beta.kind == BetaSchedule::Kind::LinearAnneal;
  os << "experiment.name=" << c.name << '\n'
     << "experiment.env=" << to_string(c.env) << '\n'
     << "experiment.episodes=" << c.episodes << '\n'
     << "experiment.batch_size=" << c.batch_size << '\n'
     << "experiment.gamma=" << exact(c.gamma) << '\n'
     << "experiment.seeds=";
  for (std::size_t i = 0; i < c.seeds.size(); ++i) os << (i ? "," : "") << c.seeds[i];
  os << '\n'
     << "experiment.diagnostics_every=" << c.diagnostics_every << '\n'
     << "experiment.gradient=" << (c.gradient == GradientMethod::Adjoint ? "adjoint" : "parameter_shift") << '\n'
     << "experiment.quantum_estimator=" << (c.quantum_estimator == FisherKind::QuantumShift ? "shift" : "exact") << '\n'
     << "ansatz.qubits=" << c.ansatz.n_qubits << '\n'
     << "ansatz.layers=" << c.ansatz.n_layers << '\n'
     << "ansatz.encoding=" << (c.ansatz.encoding == Encoding::YZ ? "yz" : "phase") << '\n'
     << "policy.kind=" << (c.policy.kind == PolicyKind::Born ? "born" : "softmax") << '\n';
  if (c.policy.kind == PolicyKind::Softmax) {
    os << "policy.beta_final=" << exact(c.policy.beta.beta_final) << '\n'
       << "policy.beta_schedule=" << (annealed ? "linear" : "constant") << '\n';
    if (annealed) os << "policy.anneal_episodes=" << c.policy.beta.over_episodes << '\n';
  }
  os << "optimizer.kind=" << (natural ? "natural" : "adam") << '\n'
     << "optimizer.eta=" << exact(c.optimizer.eta) << '\n';
  if (natural) {
    os << "optimizer.phi=" << exact(c.optimizer.phi) << '\n'
       << "optimizer.metric=" << (c.optimizer.metric == Metric::Quantum ? "quantum" : "classical") << '\n'
       << "optimizer.eps=" << exact(c.optimizer.eps) << '\n';
  } else {
    os << "optimizer.adam_beta1=" << exact(c.optimizer.adam_beta1) << '\n'
       << "optimizer.adam_beta2=" << exact(c.optimizer.adam_beta2) << '\n'
       << "optimizer.adam_eps=" << exact(c.optimizer.adam_eps) << '\n';
  }
  return os.str();
}

/// 64-bit FNV-1a of the canonical form, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig &c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : canonical_form(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

} // namespace qnpg
