// Command-line front end: training runs, evaluation campaigns, the four-way
// ablation study, single-trial replay, and plot-data emission.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>

#include "hierkick/config.hpp"
#include "hierkick/harness.hpp"
#include "hierkick/ppo.hpp"

namespace fs = std::filesystem;
using namespace hierkick;

namespace {

Config resolve_config(const std::string& config_path,
                      const std::string& profile) {
  if (!config_path.empty()) return load_config(config_path);
  return load_config("configs/" + profile + ".json");
}

void print_report(const CampaignReport& r) {
  std::printf("%-14s trials %-6d success %6.1f%%  kick mean %.3f m  std %.3f m"
              "  (timeout %d, fell %d, oob %d)\n",
              r.variant.c_str(), r.n_trials, 100.0 * r.success_rate,
              r.kick_mean, r.kick_std, r.timeouts, r.falls, r.out_of_bounds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HierKick planar soccer training and evaluation harness"};
  app.require_subcommand(1);

  std::string config_path, profile = "small", out_dir = "runs";
  std::string variant_str = "full", checkpoint, checkpoint_dir, reports_dir;
  std::uint64_t seed = 1, seed_base = 10000;
  int trials = -1, iterations = -1, threads = 0;

  auto add_config_opts = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "explicit config file (overrides --profile)");
    cmd->add_option("--profile", profile, "config profile name under configs/");
  };

  auto* train = app.add_subcommand("train", "train one policy variant");
  add_config_opts(train);
  train->add_option("--variant", variant_str,
                    "full | no_distances | replace_cprev | end_to_end");
  train->add_option("--seed", seed, "master seed");
  train->add_option("--out", out_dir, "output directory");
  train->add_option("--iterations", iterations, "override config iterations");
  train->add_flag("--quiet", "suppress progress lines");

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  add_config_opts(eval);
  eval->add_option("--checkpoint", checkpoint, "policy checkpoint")->required();
  eval->add_option("--trials", trials, "number of trials");
  eval->add_option("--seed-base", seed_base, "first trial seed");
  eval->add_option("--threads", threads, "worker threads (0 = auto)");
  eval->add_option("--out", out_dir, "directory for the report JSON");

  auto* ablate = app.add_subcommand("ablate", "paired four-variant evaluation");
  add_config_opts(ablate);
  ablate->add_option("--checkpoint-dir", checkpoint_dir,
                     "directory with <variant>.ckpt files")->required();
  ablate->add_option("--trials", trials, "trials per variant");
  ablate->add_option("--seed-base", seed_base, "first trial seed (shared)");
  ablate->add_option("--threads", threads, "worker threads (0 = auto)");
  ablate->add_option("--out", out_dir, "directory for report JSON files");

  auto* replay = app.add_subcommand("replay", "re-run one recorded trial seed");
  add_config_opts(replay);
  replay->add_option("--checkpoint", checkpoint, "policy checkpoint")->required();
  replay->add_option("--seed", seed, "trial seed")->required();

  auto* plot = app.add_subcommand("plot-data", "emit column-text plot files");
  plot->add_option("--reports-dir", reports_dir,
                   "directory with report_*.json and *_metrics.jsonl")
      ->required();
  plot->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      Config cfg = resolve_config(config_path, profile);
      cfg.train.master_seed = seed;
      const AblationVariant variant = variant_from_name(variant_str);
      const int iters = iterations > 0 ? iterations : cfg.train.iterations;
      Trainer trainer(cfg, variant);
      trainer.train(iters, out_dir, !train->count("--quiet"));
      std::printf("saved %s\n",
                  Trainer::checkpoint_path(out_dir, variant).c_str());
    } else if (eval->parsed()) {
      Config cfg = resolve_config(config_path, profile);
      const PolicyParams params = load_policy(checkpoint);
      const int n = trials > 0 ? trials : cfg.eval.n_trials;
      const CampaignReport r =
          run_campaign(cfg, params, n, seed_base,
                       threads > 0 ? threads : cfg.eval.threads);
      print_report(r);
      fs::create_directories(out_dir);
      std::ofstream os(fs::path(out_dir) /
                       ("report_" + r.variant + ".json"));
      os << r.to_json().dump(2) << "\n";
    } else if (ablate->parsed()) {
      Config cfg = resolve_config(config_path, profile);
      std::map<std::string, std::string> ckpts;
      for (const char* name :
           {"full", "no_distances", "replace_cprev", "end_to_end"})
        ckpts[name] = (fs::path(checkpoint_dir) /
                       (std::string(name) + ".ckpt")).string();
      const int n = trials > 0 ? trials : cfg.eval.n_trials;
      const auto reports = run_ablation_suite(
          cfg, ckpts, n, seed_base, threads > 0 ? threads : cfg.eval.threads);
      fs::create_directories(out_dir);
      for (const auto& r : reports) {
        print_report(r);
        std::ofstream os(fs::path(out_dir) / ("report_" + r.variant + ".json"));
        os << r.to_json().dump(2) << "\n";
      }
    } else if (replay->parsed()) {
      Config cfg = resolve_config(config_path, profile);
      const PolicyParams params = load_policy(checkpoint);
      const TrialResult t = run_trial(cfg, params, seed);
      std::printf("seed %llu: %s (%s), kick distance %.3f m, %.2f s\n",
                  static_cast<unsigned long long>(t.seed),
                  t.success ? "success" : "failure",
                  failure_name(t.failure_reason), t.kick_distance,
                  t.episode_length);
    } else if (plot->parsed()) {
      std::vector<CampaignReport> reports;
      std::map<std::string, std::string> logs;
      for (const auto& entry : fs::directory_iterator(reports_dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("report_", 0) == 0 && entry.path().extension() == ".json") {
          std::ifstream is(entry.path());
          nlohmann::json j;
          is >> j;
          reports.push_back(CampaignReport::from_json(j));
        } else if (name.size() > 14 &&
                   name.substr(name.size() - 14) == "_metrics.jsonl") {
          logs[name.substr(0, name.size() - 14)] = entry.path().string();
        }
      }
      emit_plot_data(reports, logs, out_dir);
      std::printf("wrote plot data for %zu reports, %zu logs to %s\n",
                  reports.size(), logs.size(), out_dir.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
