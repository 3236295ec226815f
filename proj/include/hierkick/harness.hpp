#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "hierkick/episode.hpp"
#include "hierkick/ppo.hpp"

namespace hierkick {

enum class FailureReason { None, Timeout, Fell, OutOfBounds };

inline const char* failure_name(FailureReason r) {
  switch (r) {
    case FailureReason::None: return "none";
    case FailureReason::Timeout: return "timeout";
    case FailureReason::Fell: return "fell";
    case FailureReason::OutOfBounds: return "out_of_bounds";
  }
  return "unknown";
}

struct TrialResult {
  bool success{false};
  FailureReason failure_reason{FailureReason::None};
  double kick_distance{0.0};  // final ball position to goal center, m
  double episode_length{0.0};  // s
  std::uint64_t seed{0};
};

// One seeded evaluation episode with the policy as trained (stochastic head;
// the whole trial is a pure function of the seed, so replay is bit-exact).
// Success: goal before the time limit with the robot upright throughout;
// a fall terminates the episode, so reaching Goal implies upright.
inline TrialResult run_trial(const Config& cfg, const PolicyParams& params,
                             std::uint64_t seed) {
  EpisodeRunner runner(cfg, params.variant, mix_seed(seed, 0));
  Transition tr;
  while (!runner.step(params, /*stochastic=*/true, tr, /*auto_reset=*/false)) {
  }
  TrialResult result;
  result.seed = seed;
  result.success = runner.reason() == Termination::Goal;
  switch (runner.reason()) {
    case Termination::Goal: result.failure_reason = FailureReason::None; break;
    case Termination::Fell: result.failure_reason = FailureReason::Fell; break;
    case Termination::OutOfBounds:
      result.failure_reason = FailureReason::OutOfBounds;
      break;
    default: result.failure_reason = FailureReason::Timeout; break;
  }
  result.kick_distance =
      (runner.state().ball_pos - cfg.field.goal_center).norm();
  result.episode_length = runner.state().sim_time;
  return result;
}

struct CampaignReport {
  std::string variant;
  int n_trials{0};
  double success_rate{0.0};
  double kick_mean{0.0};
  double kick_std{0.0};
  double hist_lo{0.0};
  double hist_hi{0.0};
  std::vector<int> hist_counts;
  int timeouts{0};
  int falls{0};
  int out_of_bounds{0};
  std::vector<TrialResult> trials;

  nlohmann::json to_json() const {
    nlohmann::json j{{"variant", variant},
                     {"n_trials", n_trials},
                     {"success_rate", success_rate},
                     {"kick_mean", kick_mean},
                     {"kick_std", kick_std},
                     {"hist_lo", hist_lo},
                     {"hist_hi", hist_hi},
                     {"hist_counts", hist_counts},
                     {"timeouts", timeouts},
                     {"falls", falls},
                     {"out_of_bounds", out_of_bounds}};
    return j;
  }

  static CampaignReport from_json(const nlohmann::json& j) {
    CampaignReport r;
    r.variant = j.at("variant").get<std::string>();
    r.n_trials = j.at("n_trials").get<int>();
    r.success_rate = j.at("success_rate").get<double>();
    r.kick_mean = j.at("kick_mean").get<double>();
    r.kick_std = j.at("kick_std").get<double>();
    r.hist_lo = j.at("hist_lo").get<double>();
    r.hist_hi = j.at("hist_hi").get<double>();
    r.hist_counts = j.at("hist_counts").get<std::vector<int>>();
    r.timeouts = j.at("timeouts").get<int>();
    r.falls = j.at("falls").get<int>();
    r.out_of_bounds = j.at("out_of_bounds").get<int>();
    return r;
  }
};

inline CampaignReport aggregate_trials(const std::string& variant,
                                       std::vector<TrialResult> trials,
                                       int hist_bins = 20) {
  CampaignReport r;
  r.variant = variant;
  r.n_trials = static_cast<int>(trials.size());
  if (r.n_trials == 0) return r;

  int successes = 0;
  double sum = 0.0;
  double lo = trials[0].kick_distance, hi = trials[0].kick_distance;
  for (const auto& t : trials) {
    successes += t.success ? 1 : 0;
    sum += t.kick_distance;
    lo = std::min(lo, t.kick_distance);
    hi = std::max(hi, t.kick_distance);
    switch (t.failure_reason) {
      case FailureReason::Timeout: ++r.timeouts; break;
      case FailureReason::Fell: ++r.falls; break;
      case FailureReason::OutOfBounds: ++r.out_of_bounds; break;
      case FailureReason::None: break;
    }
  }
  r.success_rate = static_cast<double>(successes) / r.n_trials;
  r.kick_mean = sum / r.n_trials;
  double var = 0.0;
  for (const auto& t : trials)
    var += (t.kick_distance - r.kick_mean) * (t.kick_distance - r.kick_mean);
  r.kick_std = std::sqrt(var / r.n_trials);

  // Bins partition [lo, hi]; a degenerate range widens to a single bin.
  if (hi <= lo) hi = lo + 1e-9;
  r.hist_lo = lo;
  r.hist_hi = hi;
  r.hist_counts.assign(hist_bins, 0);
  for (const auto& t : trials) {
    int b = static_cast<int>((t.kick_distance - lo) / (hi - lo) * hist_bins);
    b = std::clamp(b, 0, hist_bins - 1);
    ++r.hist_counts[b];
  }
  r.trials = std::move(trials);
  return r;
}

// n_trials independent seeded trials; results keyed by seed so the report is
// identical for any thread count.
inline CampaignReport run_campaign(const Config& cfg,
                                   const PolicyParams& params, int n_trials,
                                   std::uint64_t seed_base, int threads = 0) {
  if (n_trials < 1) throw std::invalid_argument("campaign: n_trials >= 1");
  std::vector<TrialResult> trials(n_trials);
  int n_threads = threads > 0 ? threads
                              : static_cast<int>(
                                    std::thread::hardware_concurrency());
  n_threads = std::clamp(n_threads, 1, n_trials);
  auto work = [&](int k0) {
    for (int k = k0; k < n_trials; k += n_threads)
      trials[k] = run_trial(cfg, params, seed_base + k);
  };
  if (n_threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < n_threads; ++k) pool.emplace_back(work, k);
    for (auto& th : pool) th.join();
  }
  return aggregate_trials(variant_name(params.variant), std::move(trials));
}

// Paired evaluation of the four trained variants on one shared seed set.
// Checkpoint order: full, no_distances, replace_cprev, end_to_end.
inline std::vector<CampaignReport> run_ablation_suite(
    const Config& cfg, const std::map<std::string, std::string>& checkpoints,
    int n_trials, std::uint64_t seed_base, int threads = 0) {
  static const char* kVariants[] = {"full", "no_distances", "replace_cprev",
                                    "end_to_end"};
  std::vector<CampaignReport> reports;
  for (const char* name : kVariants) {
    const auto it = checkpoints.find(name);
    if (it == checkpoints.end() ||
        !std::filesystem::exists(it->second))
      throw std::runtime_error(std::string("ablation: missing checkpoint for ") +
                               name);
    const PolicyParams params = load_policy(it->second);
    if (params.variant != variant_from_name(name))
      throw std::runtime_error(std::string("ablation: checkpoint variant tag "
                                           "mismatch for ") +
                               name);
    reports.push_back(run_campaign(cfg, params, n_trials, seed_base, threads));
  }
  return reports;
}

// Metrics-log reader: one JSON record per training iteration.
struct MetricsPoint {
  int iteration{0};
  double mean_episode_reward{0.0};
  double success_rate{0.0};
};

inline std::vector<MetricsPoint> read_metrics_log(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("metrics: cannot open " + path);
  std::vector<MetricsPoint> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    out.push_back({j.at("iteration").get<int>(),
                   j.at("mean_episode_reward").get<double>(),
                   j.at("success_rate").get<double>()});
  }
  return out;
}

// Trailing moving average used for the reward-curve comparison.
inline std::vector<double> smooth_trailing(const std::vector<double>& x,
                                           int window) {
  std::vector<double> out(x.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += x[i];
    if (i >= static_cast<std::size_t>(window)) acc -= x[i - window];
    out[i] = acc / std::min<std::size_t>(i + 1, window);
  }
  return out;
}

// Header-commented column-text plot data: success-rate bars, per-variant
// kick-distance histograms, and reward-vs-iteration curves from the logs.
inline void emit_plot_data(const std::vector<CampaignReport>& reports,
                           const std::map<std::string, std::string>& logs,
                           const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  {
    std::ofstream os(fs::path(out_dir) / "success_rates.txt");
    if (!os) throw std::runtime_error("plot: unwritable " + out_dir);
    os << "# variant success_rate n_trials timeouts falls out_of_bounds\n";
    for (const auto& r : reports)
      os << r.variant << " " << r.success_rate << " " << r.n_trials << " "
         << r.timeouts << " " << r.falls << " " << r.out_of_bounds << "\n";
  }
  for (const auto& r : reports) {
    std::ofstream os(fs::path(out_dir) /
                     ("kick_distance_" + r.variant + ".txt"));
    os << "# kick distance histogram for " << r.variant << "\n";
    os << "# mean " << r.kick_mean << "\n";
    os << "# std " << r.kick_std << "\n";
    os << "# bin_lo bin_hi count\n";
    const int bins = static_cast<int>(r.hist_counts.size());
    for (int b = 0; b < bins; ++b) {
      const double w = (r.hist_hi - r.hist_lo) / std::max(bins, 1);
      os << r.hist_lo + b * w << " " << r.hist_lo + (b + 1) * w << " "
         << r.hist_counts[b] << "\n";
    }
  }
  for (const auto& [name, path] : logs) {
    const auto points = read_metrics_log(path);
    std::ofstream os(fs::path(out_dir) / ("reward_curve_" + name + ".txt"));
    os << "# iteration mean_episode_reward success_rate\n";
    for (const auto& p : points)
      os << p.iteration << " " << p.mean_episode_reward << " "
         << p.success_rate << "\n";
  }
}

}  // namespace hierkick
