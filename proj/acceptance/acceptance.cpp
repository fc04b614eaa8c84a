// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
//
// The property criteria reuse the checks behind `qnpg verify` and add the
// wall-clock limits. The learning criteria train every config under
// configs/ for all of its seeds and judge the final 50 episodes.
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qnpg/config.hpp"
#include "qnpg/properties.hpp"
#include "qnpg/runner.hpp"

namespace fs = std::filesystem;
using namespace qnpg;

namespace {

// Thresholds.
constexpr double kPropertySeconds = 60.0;
constexpr double kLoewnerSeconds = 120.0;
constexpr double kCartPoleTarget = 150.0;
constexpr int kCartPoleSeedsNeeded = 3;
constexpr double kCartPoleMinutes = 30.0;
constexpr double kAcrobotImprovement = 100.0;
constexpr std::size_t kWindow = 50;

struct Line {
  std::string name;
  bool passed;
  std::string detail;
};

std::vector<Line> lines;

void report(const std::string &name, bool passed, const std::string &detail) {
  lines.push_back({name, passed, detail});
  std::cout << (passed ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
}

std::string fixed(double v, int digits = 1) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

template <class F> auto timed(F &&f) {
  const auto t0 = std::chrono::steady_clock::now();
  auto r = f();
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return std::pair{std::move(r), s};
}

double window_mean(const std::vector<double> &curve, std::size_t begin, std::size_t end) {
  end = std::min(end, curve.size());
  if (begin >= end) return 0.0;
  return std::accumulate(curve.begin() + static_cast<std::ptrdiff_t>(begin),
                         curve.begin() + static_cast<std::ptrdiff_t>(end), 0.0) /
         static_cast<double>(end - begin);
}

double last_window(const std::vector<double> &c) { return window_mean(c, c.size() - std::min(c.size(), kWindow), c.size()); }
double first_window(const std::vector<double> &c) { return window_mean(c, 0, kWindow); }

std::string read_file(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Trained {
  ExperimentConfig config;
  RunOutcome outcome;
  double seconds = 0.0;
};

Trained train_config(const fs::path &path, const fs::path &out_dir, int jobs) {
  Trained t{load_config(path.string()), {}, 0.0};
  std::cerr << "training " << t.config.name << " (" << optimizer_label(t.config.optimizer) << ", "
            << t.config.seeds.size() << " seeds)" << std::endl;
  auto [outcome, s] = timed([&] { return run_experiment(t.config, out_dir, jobs); });
  t.outcome = std::move(outcome);
  t.seconds = s;
  return t;
}

void property_lines() {
  {
    auto [r, s] = timed([] { return check_qfim_oracle(); });
    report("qfim_oracle_equivalence", r.passed && s < kPropertySeconds, r.detail + "; " + fixed(s, 2) + " s");
  }
  {
    auto [r, s] = timed([] { return std::pair{check_shift_vs_fd_expectation(), check_shift_vs_fd_log_policy()}; });
    report("parameter_shift_exactness", r.first.passed && r.second.passed && s < kPropertySeconds,
           r.first.detail + "; " + r.second.detail + "; " + fixed(s, 2) + " s");
  }
  {
    auto [r, s] = timed([] { return check_loewner(); });
    report("loewner_inequality", r.passed && s < kLoewnerSeconds, r.detail + "; " + fixed(s, 2) + " s");
  }
  {
    const auto r = check_equality_case();
    report("equality_case", r.passed, r.detail);
  }
  {
    const auto a = check_sqrt_norm();
    const auto b = check_inverse_norm_counterexample();
    report("sqrt_norm_inequality", a.passed && b.passed, a.detail + "; " + b.detail);
  }
  {
    const auto r = check_error_gap();
    report("approximation_error_gap", r.passed, r.detail);
  }
  {
    const auto r = check_smoothness();
    report("smoothness_bounds", r.passed, r.detail);
  }
  {
    const auto r = check_execution_counts();
    report("execution_accounting", r.passed, r.detail);
  }
}

void cartpole_line(const std::vector<Trained> &runs) {
  bool ok = runs.size() == 5;
  std::string detail;
  for (const auto &t : runs) {
    int hits = 0;
    std::string finals;
    for (const auto &r : t.outcome.results) {
      const double f = last_window(r.curve);
      hits += f >= kCartPoleTarget ? 1 : 0;
      finals += (finals.empty() ? "" : " ") + fixed(f, 0);
    }
    const double minutes = t.seconds / 60.0;
    ok = ok && hits >= kCartPoleSeedsNeeded && minutes < kCartPoleMinutes && !t.outcome.any_aborted();
    detail += (detail.empty() ? "" : "; ") + optimizer_label(t.config.optimizer) + " final50 [" + finals + "] " +
              std::to_string(hits) + "/" + std::to_string(t.outcome.results.size()) + " >= " +
              fixed(kCartPoleTarget, 0) + ", " + fixed(t.seconds, 1) + " s";
  }
  if (runs.size() != 5) detail = "expected 5 CartPole configs, found " + std::to_string(runs.size()) + "; " + detail;
  report("cartpole_learning", ok, detail);
}

double mean_improvement(const Trained &t) {
  double first = 0.0, last = 0.0;
  for (const auto &r : t.outcome.results) {
    first += first_window(r.curve);
    last += last_window(r.curve);
  }
  const double n = static_cast<double>(t.outcome.results.size());
  return (last - first) / n;
}

double mean_final(const Trained &t) {
  double last = 0.0;
  for (const auto &r : t.outcome.results) last += last_window(r.curve);
  return last / static_cast<double>(t.outcome.results.size());
}

void acrobot_line(const std::vector<Trained> &runs) {
  const Trained *npg = nullptr, *gq = nullptr;
  std::string detail;
  for (const auto &t : runs) {
    const std::string label = optimizer_label(t.config.optimizer);
    if (label == "NPG") npg = &t;
    if (label == "GQNPG phi=0.5") gq = &t;
    detail += (detail.empty() ? "" : "; ") + label + " first50->final50 improvement " +
              fixed(mean_improvement(t)) + " (final50 " + fixed(mean_final(t)) + "), " + fixed(t.seconds, 1) + " s";
  }
  bool ok = npg && gq && !npg->outcome.any_aborted() && !gq->outcome.any_aborted();
  if (!npg || !gq) {
    detail = "NPG and GQNPG phi=0.5 Acrobot configs required; " + detail;
  } else {
    ok = ok && mean_improvement(*npg) >= kAcrobotImprovement && mean_improvement(*gq) >= kAcrobotImprovement;
    detail += std::string("; ordering NPG >= GQNPG phi=0.5 at the end (not gated): ") +
              (mean_final(*npg) >= mean_final(*gq) ? "yes" : "no");
  }
  report("acrobot_learning", ok, detail);
}

void determinism_line(const std::vector<Trained> &runs) {
  if (runs.empty()) {
    report("determinism", false, "no trained runs to repeat");
    return;
  }
  bool ok = true;
  std::string detail;
  for (const auto &t : runs) {
    const std::uint64_t seed = t.config.seeds.front();
    const TrainResult again = train(t.config, seed);
    const auto dir = t.outcome.directory;
    const bool same_curve = read_file(dir / ("curve_" + std::to_string(seed) + ".csv")) == curve_csv(again.curve);
    const bool same_diag =
        read_file(dir / ("diagnostics_" + std::to_string(seed) + ".csv")) == diagnostics_csv(again.diagnostics);
    ok = ok && same_curve && same_diag;
    detail += (detail.empty() ? "" : "; ") + t.config.name + " seed " + std::to_string(seed) + " " +
              (same_curve && same_diag ? "identical" : "DIFFERS");
  }
  report("determinism", ok, detail);
}

std::vector<fs::path> configs_with_prefix(const fs::path &dir, const std::string &prefix) {
  std::vector<fs::path> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto &e : fs::directory_iterator(dir))
    if (e.path().extension() == ".ini" && e.path().filename().string().rfind(prefix, 0) == 0)
      out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Acceptance checks with one PASS/FAIL line per criterion"};
  std::string out_dir = "acceptance_runs";
  std::string config_dir =
#ifdef QNPG_SOURCE_DIR
      std::string(QNPG_SOURCE_DIR) + "/configs";
#else
      "configs";
#endif
  int jobs = 1;
  bool properties_only = false;
  app.add_option("--out-dir", out_dir, "Where training runs are written");
  app.add_option("--configs", config_dir, "Directory holding cartpole_*.ini and acrobot_*.ini");
  app.add_option("--jobs", jobs, "Seeds trained in parallel")->check(CLI::PositiveNumber);
  app.add_flag("--properties-only", properties_only, "Skip the learning criteria");
  CLI11_PARSE(app, argc, argv);

  try {
    property_lines();
    if (!properties_only) {
      std::vector<Trained> cartpole, acrobot;
      for (const auto &p : configs_with_prefix(config_dir, "cartpole_"))
        cartpole.push_back(train_config(p, out_dir, jobs));
      cartpole_line(cartpole);
      for (const auto &p : configs_with_prefix(config_dir, "acrobot_"))
        acrobot.push_back(train_config(p, out_dir, jobs));
      acrobot_line(acrobot);
      std::vector<Trained> all = cartpole;
      all.insert(all.end(), acrobot.begin(), acrobot.end());
      determinism_line(all);
    }
  } catch (const std::exception &e) {
    report("acceptance_run", false, std::string("error: ") + e.what());
  }

  const auto failed = std::count_if(lines.begin(), lines.end(), [](const Line &l) { return !l.passed; });
  std::cout << lines.size() - static_cast<std::size_t>(failed) << "/" << lines.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
