// Multi-seed experiment runs and their on-disk artefacts.
//
// A run of config `name` writes into <out_dir>/<name>/:
//   curve_<seed>.csv        episode,return,running_mean_10
//   diagnostics_<seed>.csv  one row per DiagnosticsRecord
//   summary.json            per-episode mean/std across seeds and totals
//   manifest.json           config hash, seeds, paths, timings
#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <system_error>
#include <thread>
#include <vector>

#include "json.hpp"

#include "qnpg/config.hpp"
#include "qnpg/trainer.hpp"

namespace qnpg {

inline constexpr const char *kArtifactVersion = "1.0.0";

/// Shortest decimal text that reads back to the same double. Never depends on
/// the C or C++ global locale.
inline std::string format_number(double v) {
  if (v == 0.0) return "0"; // folds -0
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("format_number: conversion failed");
  return {buf, end};
}

/// Trailing mean over the last `window` values (fewer at the start).
inline std::vector<double> running_mean(const std::vector<double> &xs, std::size_t window = 10) {
  if (window == 0) throw std::invalid_argument("running_mean: window must be >= 1");
  std::vector<double> out(xs.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sum += xs[i];
    if (i >= window) sum -= xs[i - window];
    out[i] = sum / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

inline std::string curve_csv(const std::vector<double> &curve) {
  const auto rm = running_mean(curve, 10);
  std::string out = "episode,return,running_mean_10\n";
  for (std::size_t i = 0; i < curve.size(); ++i)
    out += std::to_string(i) + "," + format_number(curve[i]) + "," + format_number(rm[i]) + "\n";
  return out;
}

inline std::string diagnostics_csv(const std::vector<DiagnosticsRecord> &records) {
  std::string out = "update,episode,mean_return,w_norm_classical,w_norm_quantum,eps_gap,"
                    "min_eig_gap,loewner_ok,executions_classical,executions_quantum\n";
  for (const auto &r : records) {
    out += std::to_string(r.update) + "," + std::to_string(r.episode) + "," + format_number(r.mean_return) +
           "," + format_number(r.w_norm_classical) + "," + format_number(r.w_norm_quantum) + "," +
           format_number(r.eps_gap) + "," + format_number(r.min_eig_gap) + "," +
           (r.loewner_ok ? "1" : "0") + "," + std::to_string(r.executions_classical) + "," +
           std::to_string(r.executions_quantum) + "\n";
  }
  return out;
}

inline void write_text(const std::filesystem::path &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

struct SeedRecord {
  std::uint64_t seed = 0;
  std::string curve_path;
  std::string diagnostics_path;
  double wall_seconds = 0.0;
  bool aborted = false;
  std::string abort_reason;
};

struct RunManifest {
  std::string config_name;
  std::string config_hash;
  std::string label;
  std::string artifact_version = kArtifactVersion;
  std::vector<SeedRecord> seeds;

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json j;
    j["config_name"] = config_name;
    j["config_hash"] = config_hash;
    j["label"] = label;
    j["artifact_version"] = artifact_version;
    j["runs"] = nlohmann::json::array();
    for (const auto &s : seeds) {
      nlohmann::json r = {{"seed", s.seed},
                          {"curve", s.curve_path},
                          {"diagnostics", s.diagnostics_path},
                          {"wall_seconds", s.wall_seconds},
                          {"aborted", s.aborted}};
      if (s.aborted) r["abort_reason"] = s.abort_reason;
      j["runs"].push_back(std::move(r));
    }
    return j;
  }
};

struct Summary {
  std::vector<double> mean;
  std::vector<double> stddev; ///< population std across seeds; 0 for one seed
  std::vector<double> running_mean_10;
};

/// Aggregates per-seed curves episode by episode. Curves may differ in length
/// only when a run aborted; the summary then covers the common prefix.
inline Summary summarize(const std::vector<std::vector<double>> &curves) {
  Summary s;
  if (curves.empty()) return s;
  std::size_t n = curves.front().size();
  for (const auto &c : curves) n = std::min(n, c.size());
  s.mean.assign(n, 0.0);
  s.stddev.assign(n, 0.0);
  const double m = static_cast<double>(curves.size());
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (const auto &c : curves) sum += c[i];
    const double mu = sum / m;
    double sq = 0.0;
    for (const auto &c : curves) sq += (c[i] - mu) * (c[i] - mu);
    s.mean[i] = mu;
    s.stddev[i] = std::sqrt(sq / m);
  }
  s.running_mean_10 = running_mean(s.mean, 10);
  return s;
}

struct RunOutcome {
  RunManifest manifest;
  std::vector<TrainResult> results; ///< same order as config.seeds
  std::filesystem::path directory;
  [[nodiscard]] bool any_aborted() const {
    return std::any_of(results.begin(), results.end(), [](const TrainResult &r) { return r.aborted; });
  }
};

using SeedProgressFn = std::function<void(std::uint64_t seed, int episodes_done, double mean_return)>;

/// Trains every seed of `config`, writing files as each seed finishes.
/// Seeds run on up to `jobs` threads; results do not depend on `jobs`.
inline RunOutcome run_experiment(const ExperimentConfig &config, const std::filesystem::path &out_dir,
                                 int jobs = 1, const SeedProgressFn &progress = {}) {
  config.validate();
  RunOutcome outcome;
  outcome.directory = out_dir / config.name;
  std::filesystem::create_directories(outcome.directory);
  auto &manifest = outcome.manifest;
  manifest.config_name = config.name;
  manifest.config_hash = config_hash(config);
  manifest.label = optimizer_label(config.optimizer);
  manifest.seeds.resize(config.seeds.size());
  outcome.results.resize(config.seeds.size());

  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;
  std::vector<std::exception_ptr> errors(config.seeds.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < config.seeds.size(); i = next++) {
      const std::uint64_t seed = config.seeds[i];
      try {
        const auto t0 = std::chrono::steady_clock::now();
        ProgressFn per_update;
        if (progress)
          per_update = [&, seed](int, int done, double mean) {
            std::lock_guard lock(progress_mutex);
            progress(seed, done, mean);
          };
        TrainResult r = train(config, seed, per_update);
        const auto t1 = std::chrono::steady_clock::now();
        SeedRecord rec;
        rec.seed = seed;
        rec.curve_path = "curve_" + std::to_string(seed) + ".csv";
        rec.diagnostics_path = "diagnostics_" + std::to_string(seed) + ".csv";
        rec.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
        rec.aborted = r.aborted;
        rec.abort_reason = r.abort_reason;
        write_text(outcome.directory / rec.curve_path, curve_csv(r.curve));
        write_text(outcome.directory / rec.diagnostics_path, diagnostics_csv(r.diagnostics));
        manifest.seeds[i] = std::move(rec);
        outcome.results[i] = std::move(r);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n_threads = std::clamp(jobs, 1, static_cast<int>(config.seeds.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }
  for (const auto &e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<std::vector<double>> curves;
  std::uint64_t exec_c = 0, exec_q = 0, exec_m = 0;
  for (const auto &r : outcome.results) {
    curves.push_back(r.curve);
    exec_c += r.executions_classical;
    exec_q += r.executions_quantum;
    exec_m += r.executions_metric;
  }
  const Summary s = summarize(curves);
  nlohmann::json j;
  j["config_name"] = config.name;
  j["config_hash"] = manifest.config_hash;
  j["label"] = manifest.label;
  j["env"] = to_string(config.env);
  j["episodes"] = s.mean.size();
  j["seeds"] = config.seeds;
  j["mean"] = s.mean;
  j["std"] = s.stddev;
  j["running_mean_10"] = s.running_mean_10;
  j["executions"] = {{"diagnostics_classical", exec_c},
                     {"diagnostics_quantum", exec_q},
                     {"update_metric", exec_m}};
  j["aborted"] = outcome.any_aborted();
  write_text(outcome.directory / "summary.json", j.dump(1) + "\n");
  write_text(outcome.directory / "manifest.json", manifest.to_json().dump(1) + "\n");
  return outcome;
}

struct ComparedRun {
  std::string label;
  std::vector<double> mean;
  std::vector<double> stddev;
};

inline ComparedRun read_summary(const std::filesystem::path &summary_path) {
  std::ifstream in(summary_path);
  if (!in) throw std::runtime_error("no summary at " + summary_path.string() + "; run the config first");
  const auto j = nlohmann::json::parse(in);
  return {j.at("label").get<std::string>(), j.at("mean").get<std::vector<double>>(),
          j.at("std").get<std::vector<double>>()};
}

/// episode, <label>_mean, <label>_std, ... in the order given.
inline std::string comparison_csv(const std::vector<ComparedRun> &runs) {
  if (runs.size() < 2) throw std::invalid_argument("compare: need at least two runs");
  std::map<std::string, int> seen;
  for (const auto &r : runs) {
    if (seen[r.label]++)
      throw std::invalid_argument("compare: optimizer label '" + r.label + "' appears twice");
    if (r.mean.size() != runs.front().mean.size())
      throw std::invalid_argument("compare: episode counts differ ('" + runs.front().label + "' has " +
                                  std::to_string(runs.front().mean.size()) + ", '" + r.label + "' has " +
                                  std::to_string(r.mean.size()) + ")");
  }
  std::string out = "episode";
  for (const auto &r : runs) out += "," + r.label + "_mean," + r.label + "_std";
  out += "\n";
  for (std::size_t i = 0; i < runs.front().mean.size(); ++i) {
    out += std::to_string(i);
    for (const auto &r : runs) out += "," + format_number(r.mean[i]) + "," + format_number(r.stddev[i]);
    out += "\n";
  }
  return out;
}

} // namespace qnpg
