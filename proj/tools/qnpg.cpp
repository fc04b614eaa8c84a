// Command-line front end: run, compare, verify.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "qnpg/config.hpp"
#include "qnpg/properties.hpp"
#include "qnpg/runner.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitAborted = 3;

std::filesystem::path resolve_out_dir(const std::string &flag) {
  if (!flag.empty()) return flag;
  if (const char *env = std::getenv("QNPG_OUT_DIR"); env && *env) return env;
  return "runs";
}

qnpg::ExperimentConfig load_with_overrides(const std::string &path, const std::string &seeds, int episodes) {
  auto config = qnpg::load_config(path);
  if (!seeds.empty()) {
    try {
      config.seeds = qnpg::detail::parse_seeds(seeds);
    } catch (const std::exception &e) {
      throw qnpg::ConfigError("--seeds", 0, "", e.what());
    }
  }
  if (episodes >= 0) config.episodes = episodes;
  try {
    config.validate();
  } catch (const std::exception &e) {
    throw qnpg::ConfigError(path, 0, "", e.what());
  }
  return config;
}

int cmd_run(const std::string &path, const std::string &seeds, int episodes, const std::string &out_flag,
            int jobs, bool quiet) {
  const auto config = load_with_overrides(path, seeds, episodes);
  const auto out_dir = resolve_out_dir(out_flag);
  std::cerr << "run " << config.name << " [" << qnpg::optimizer_label(config.optimizer) << "] hash "
            << qnpg::config_hash(config) << ", " << config.seeds.size() << " seed(s), " << config.episodes
            << " episodes\n";
  qnpg::SeedProgressFn progress;
  if (!quiet)
    progress = [&](std::uint64_t seed, int done, double mean) {
      if (done % 50 == 0 || done == config.episodes)
        std::cerr << "  seed " << seed << "  episode " << done << "/" << config.episodes << "  batch mean "
                  << mean << "\n";
    };
  const auto outcome = qnpg::run_experiment(config, out_dir, jobs, progress);
  std::cout << outcome.directory.string() << "\n";
  if (outcome.any_aborted()) {
    for (const auto &s : outcome.manifest.seeds)
      if (s.aborted) std::cerr << "seed " << s.seed << " aborted: " << s.abort_reason << "\n";
    return kExitAborted;
  }
  return 0;
}

int cmd_compare(const std::vector<std::string> &paths, const std::string &output, const std::string &out_flag) {
  const auto out_dir = resolve_out_dir(out_flag);
  std::vector<qnpg::ComparedRun> runs;
  for (const auto &p : paths) {
    const auto config = qnpg::load_config(p);
    runs.push_back(qnpg::read_summary(out_dir / config.name / "summary.json"));
  }
  qnpg::write_text(output, qnpg::comparison_csv(runs));
  std::cout << output << "\n";
  return 0;
}

int cmd_verify() {
  bool ok = true;
  for (const auto &r : qnpg::run_property_suite()) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    ok = ok && r.passed;
  }
  return ok ? 0 : kExitFailure;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Policy-gradient training of quantum circuit policies with natural-gradient variants"};
  app.require_subcommand(1);

  std::string out_dir;
  std::string seeds;
  int episodes = -1;
  int jobs = 1;
  bool quiet = false;

  auto *run = app.add_subcommand("run", "Train every seed of a config and write curves and summaries");
  std::string config_path;
  run->add_option("config", config_path, "Experiment INI file")->required()->check(CLI::ExistingFile);
  run->add_option("--seeds", seeds, "Comma-separated seeds, overriding the config");
  run->add_option("--episodes", episodes, "Episode count, overriding the config")->check(CLI::NonNegativeNumber);
  run->add_option("--out-dir", out_dir, "Output root (default: $QNPG_OUT_DIR or ./runs)");
  run->add_option("--jobs", jobs, "Seeds trained in parallel")->check(CLI::PositiveNumber);
  run->add_flag("-q,--quiet", quiet, "No progress output");

  auto *compare = app.add_subcommand("compare", "Align finished runs into one CSV");
  std::vector<std::string> compare_paths;
  std::string compare_out;
  compare->add_option("configs", compare_paths, "Experiment INI files")->required()->expected(2, -1);
  compare->add_option("-o,--output", compare_out, "CSV to write")->required();
  compare->add_option("--out-dir", out_dir, "Where the runs were written");

  app.add_subcommand("verify", "Run the property suite; nonzero exit on any failure");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }

  try {
    if (*run) return cmd_run(config_path, seeds, episodes, out_dir, jobs, quiet);
    if (*compare) return cmd_compare(compare_paths, compare_out, out_dir);
    return cmd_verify();
  } catch (const qnpg::ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
