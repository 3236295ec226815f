#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "hierkick/harness.hpp"

using namespace hierkick;

namespace {

// Deterministic fixture: robot straight behind the ball on the goal axis,
// no sensor or tracker noise, no fall hazard.
Config scripted_config() {
  Config cfg;
  cfg.randomization.robot_x = {0.0, 0.0};
  cfg.randomization.robot_y = {0.0, 0.0};
  cfg.randomization.robot_heading = {0.0, 0.0};
  cfg.randomization.ball_x = {1.0, 1.0};
  cfg.randomization.ball_y = {0.0, 0.0};
  cfg.randomization.friction = {0.5, 0.5};
  cfg.randomization.restitution = {0.3, 0.3};
  cfg.tracker.tracking_noise_std.setZero();
  cfg.tracker.fall_hazard_rate = 0.0;
  cfg.noise.pixel_noise_std = 0.0;
  cfg.noise.depth_noise_frac = 0.0;
  cfg.noise.dropout_prob = 0.0;
  return cfg;
}

// Hand-built coach: saturated forward increment, no lateral or yaw motion.
PolicyParams drive_forward_policy() {
  PolicyParams p;
  p.variant = AblationVariant::Full;
  p.actor.W.push_back(MatrixXd::Zero(kActionDim, kObsDim));
  p.actor.b.push_back(Vector3d(10.0, 0.0, 0.0));
  p.critic.W.push_back(MatrixXd::Zero(1, kObsDim));
  p.critic.b.push_back(VectorXd::Zero(1));
  p.action_lo = -kIncrementBound;
  p.action_hi = kIncrementBound;
  p.log_std = Vector3d::Constant(-40.0);  // floored: near-deterministic head
  return p;
}

PolicyParams stand_still_policy() {
  PolicyParams p = drive_forward_policy();
  p.actor.b[0].setZero();
  return p;
}

}  // namespace

TEST_CASE("scripted forward drive dribbles straight in and scores") {
  const Config cfg = scripted_config();
  const PolicyParams p = drive_forward_policy();
  const TrialResult r = run_trial(cfg, p, 1);
  CHECK(r.success);
  CHECK(r.failure_reason == FailureReason::None);
  CHECK(r.kick_distance < 1.0);  // ball ends just past the goal line
  CHECK(r.episode_length < cfg.ppo.max_episode_seconds);
}

TEST_CASE("standing still times out with the ball untouched") {
  const Config cfg = scripted_config();
  const PolicyParams p = stand_still_policy();
  const TrialResult r = run_trial(cfg, p, 1);
  CHECK_FALSE(r.success);
  CHECK(r.failure_reason == FailureReason::Timeout);
  // Ball never moved: distance is the initial ball-to-goal gap.
  CHECK(r.kick_distance == doctest::Approx(3.5).epsilon(1e-9));
  CHECK(r.episode_length ==
        doctest::Approx(cfg.ppo.max_episode_seconds).epsilon(1e-9));
}

TEST_CASE("run_trial is bitwise repeatable per seed") {
  Config cfg;  // full randomization and noise on
  Rng init(71);
  const PolicyParams p = make_policy({16}, {16}, AblationVariant::Full, init);
  const TrialResult a = run_trial(cfg, p, 42);
  const TrialResult b = run_trial(cfg, p, 42);
  CHECK(a.success == b.success);
  CHECK(a.kick_distance == b.kick_distance);
  CHECK(a.episode_length == b.episode_length);
  const TrialResult c = run_trial(cfg, p, 43);
  CHECK((c.kick_distance != a.kick_distance || c.episode_length != a.episode_length));
}

TEST_CASE("campaign reports are identical across thread counts") {
  Config cfg;
  Rng init(73);
  const PolicyParams p = make_policy({16}, {16}, AblationVariant::Full, init);
  const CampaignReport a = run_campaign(cfg, p, 40, 100, /*threads=*/1);
  const CampaignReport b = run_campaign(cfg, p, 40, 100, /*threads=*/4);
  CHECK(a.success_rate == b.success_rate);
  CHECK(a.kick_mean == b.kick_mean);
  CHECK(a.kick_std == b.kick_std);
  REQUIRE(a.trials.size() == b.trials.size());
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    CHECK(a.trials[i].kick_distance == b.trials[i].kick_distance);
    CHECK(a.trials[i].seed == b.trials[i].seed);
  }
}

TEST_CASE("aggregate_trials matches hand-computed statistics") {
  std::vector<TrialResult> trials;
  const double d[5] = {1.0, 2.0, 3.0, 4.0, 10.0};
  for (int i = 0; i < 5; ++i) {
    TrialResult t;
    t.kick_distance = d[i];
    t.success = i < 2;
    t.failure_reason = i < 2 ? FailureReason::None
                             : (i == 2 ? FailureReason::Fell
                                       : FailureReason::Timeout);
    trials.push_back(t);
  }
  const CampaignReport r = aggregate_trials("full", trials, 4);
  CHECK(r.n_trials == 5);
  CHECK(r.success_rate == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(r.kick_mean == doctest::Approx(4.0).epsilon(1e-12));
  // Population std of {1,2,3,4,10} around 4.
  const double var = (9.0 + 4.0 + 1.0 + 0.0 + 36.0) / 5.0;
  CHECK(r.kick_std == doctest::Approx(std::sqrt(var)).epsilon(1e-12));
  CHECK(r.falls == 1);
  CHECK(r.timeouts == 2);
  CHECK(r.out_of_bounds == 0);
  int total = 0;
  for (int c : r.hist_counts) total += c;
  CHECK(total == 5);
  CHECK(r.hist_lo == 1.0);
  CHECK(r.hist_hi == 10.0);
}

TEST_CASE("aggregate_trials survives a degenerate distance range") {
  std::vector<TrialResult> trials(7);
  for (auto& t : trials) t.kick_distance = 2.5;
  const CampaignReport r = aggregate_trials("full", trials, 20);
  CHECK(r.kick_std == 0.0);
  int total = 0;
  for (int c : r.hist_counts) total += c;
  CHECK(total == 7);
}

TEST_CASE("ablation suite rejects a missing checkpoint") {
  const Config cfg = scripted_config();
  std::map<std::string, std::string> ckpts{
      {"full", "does_not_exist.ckpt"},
      {"no_distances", "does_not_exist.ckpt"},
      {"replace_cprev", "does_not_exist.ckpt"},
      {"end_to_end", "does_not_exist.ckpt"}};
  CHECK_THROWS_AS(run_ablation_suite(cfg, ckpts, 2, 0), std::runtime_error);
}

TEST_CASE("ablation suite rejects a variant-tag mismatch") {
  const Config cfg = scripted_config();
  // A full-variant policy saved under every variant's slot.
  PolicyParams p = drive_forward_policy();
  const std::string path = "harness_mismatch.ckpt";
  save_policy(p, path);
  std::map<std::string, std::string> ckpts{{"full", path},
                                           {"no_distances", path},
                                           {"replace_cprev", path},
                                           {"end_to_end", path}};
  CHECK_THROWS_AS(run_ablation_suite(cfg, ckpts, 2, 0), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("smooth_trailing: constants are fixed points, ramps average back") {
  const std::vector<double> c(10, 3.0);
  for (double v : smooth_trailing(c, 4)) CHECK(v == doctest::Approx(3.0));
  const std::vector<double> ramp{0, 1, 2, 3, 4, 5};
  const std::vector<double> s = smooth_trailing(ramp, 3);
  CHECK(s[0] == doctest::Approx(0.0));
  CHECK(s[1] == doctest::Approx(0.5));
  CHECK(s[2] == doctest::Approx(1.0));
  CHECK(s[3] == doctest::Approx(2.0));  // (1+2+3)/3
  CHECK(s[5] == doctest::Approx(4.0));  // (3+4+5)/3
}

TEST_CASE("metrics log round trip and plot-data emission") {
  namespace fs = std::filesystem;
  const std::string dir = "harness_plotdata";
  fs::create_directories(dir);
  const std::string log = dir + "/full_metrics.jsonl";
  {
    std::ofstream os(log);
    os << R"({"iteration":0,"mean_episode_reward":1.5,"success_rate":0.1})"
       << "\n";
    os << R"({"iteration":1,"mean_episode_reward":2.5,"success_rate":0.3})"
       << "\n";
  }
  const auto points = read_metrics_log(log);
  REQUIRE(points.size() == 2);
  CHECK(points[1].iteration == 1);
  CHECK(points[1].mean_episode_reward == 2.5);
  CHECK(points[1].success_rate == 0.3);

  std::vector<TrialResult> trials(4);
  for (int i = 0; i < 4; ++i) {
    trials[i].kick_distance = 1.0 + i;
    trials[i].success = i % 2 == 0;
  }
  const std::vector<CampaignReport> reports{aggregate_trials("full", trials)};
  emit_plot_data(reports, {{"full", log}}, dir);
  CHECK(fs::exists(dir + "/success_rates.txt"));
  CHECK(fs::exists(dir + "/kick_distance_full.txt"));
  CHECK(fs::exists(dir + "/reward_curve_full.txt"));

  // The histogram file re-states mean and std in its header.
  std::ifstream is(dir + "/kick_distance_full.txt");
  std::string l1, l2, l3;
  std::getline(is, l1);
  std::getline(is, l2);
  std::getline(is, l3);
  CHECK(l2.rfind("# mean", 0) == 0);
  CHECK(l3.rfind("# std", 0) == 0);
  is.close();
  fs::remove_all(dir);
}

TEST_CASE("campaign report JSON round trip") {
  std::vector<TrialResult> trials(3);
  trials[0].kick_distance = 0.5;
  trials[1].kick_distance = 1.5;
  trials[2].kick_distance = 2.5;
  trials[0].success = true;
  trials[1].failure_reason = FailureReason::Fell;
  trials[2].failure_reason = FailureReason::Timeout;
  const CampaignReport r = aggregate_trials("no_distances", trials);
  const CampaignReport q = CampaignReport::from_json(r.to_json());
  CHECK(q.variant == r.variant);
  CHECK(q.n_trials == r.n_trials);
  CHECK(q.success_rate == r.success_rate);
  CHECK(q.kick_mean == r.kick_mean);
  CHECK(q.kick_std == r.kick_std);
  CHECK(q.hist_counts == r.hist_counts);
  CHECK(q.falls == r.falls);
  CHECK(q.timeouts == r.timeouts);
}
