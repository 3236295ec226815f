#pragma once

#include <deque>
#include <optional>

#include "hierkick/camera.hpp"
#include "hierkick/config.hpp"
#include "hierkick/policy.hpp"
#include "hierkick/rewards.hpp"
#include "hierkick/tracker.hpp"
#include "hierkick/world.hpp"

namespace hierkick {

enum class Termination { None, Goal, Fell, OutOfBounds, Timeout };

inline const char* termination_name(Termination t) {
  switch (t) {
    case Termination::None: return "none";
    case Termination::Goal: return "goal";
    case Termination::Fell: return "fell";
    case Termination::OutOfBounds: return "out_of_bounds";
    case Termination::Timeout: return "timeout";
  }
  return "unknown";
}

// One high-level transition as stored for PPO. Observations are the scaled
// network inputs; `action` is the raw Gaussian draw that log_prob refers to.
struct Transition {
  VectorXd actor_obs;
  VectorXd critic_obs;
  VectorXd action;
  double log_prob{0.0};
  double reward{0.0};
  double value{0.0};
  double done{0.0};
  Termination reason{Termination::None};
  double episode_reward{0.0};  // filled on the final step of an episode
  int episode_steps{0};
};

// One world: 50 Hz physics + tracker + 10 Hz synthetic perception under a
// 5 Hz coach. Owns its RNG stream; stepping many runners concurrently is safe.
class EpisodeRunner {
 public:
  EpisodeRunner(const Config& cfg, AblationVariant variant,
                std::uint64_t stream_seed)
      : cfg_(cfg), variant_(variant), rng_(stream_seed) {
    reset_episode();
  }

  void reset_episode() {
    eff_field_ = sample_physics(cfg_.randomization, cfg_.field, rng_);
    state_ = reset(cfg_.randomization, rng_);
    cmd_ = {};
    c_prev_.setZero();
    hl_steps_ = 0;
    ll_steps_ = 0;
    episode_reward_ = 0.0;
    reason_ = Termination::None;
    ball_q_.clear();
    goal_q_.clear();
    // Kickoff positions are announced; estimates start from ground truth and
    // are maintained by perception afterwards.
    ball_est_w_ = state_.ball_pos;
    goal_est_w_ = cfg_.field.goal_center;
  }

  bool done() const { return reason_ != Termination::None; }
  Termination reason() const { return reason_; }
  const WorldState& state() const { return state_; }
  const VelocityCommand& command() const { return cmd_; }
  double episode_reward() const { return episode_reward_; }
  int episode_steps() const { return hl_steps_; }

  HighLevelObs actor_obs() const {
    const Vector3d ball_rf(robot_frame_of(ball_est_w_).x(),
                           robot_frame_of(ball_est_w_).y(),
                           cfg_.field.ball_radius);
    return build_obs(state_, ball_rf, robot_frame_of(goal_est_w_), c_prev_,
                     variant_, v_robot_ball());
  }

  HighLevelObs critic_obs() const {
    const Vector3d ball_rf(robot_frame_of(state_.ball_pos).x(),
                           robot_frame_of(state_.ball_pos).y(),
                           cfg_.field.ball_radius);
    return build_obs(state_, ball_rf, robot_frame_of(cfg_.field.goal_center),
                     c_prev_, variant_, v_robot_ball());
  }

  double bootstrap_value(const PolicyParams& params) const {
    return critic_value(critic_obs(), params);
  }

  // One coach decision: 10 low-level substeps under a held command. Returns
  // true when the episode ended this step; with auto_reset the runner starts
  // the next episode immediately.
  bool step(const PolicyParams& params, bool stochastic, Transition& out,
            bool auto_reset = true) {
    const WorldState pre = state_;
    const HighLevelObs a_obs = actor_obs();
    const HighLevelObs c_obs = critic_obs();
    const VectorXd scale = obs_scale(variant_);
    out.actor_obs = a_obs.flat().cwiseProduct(scale);
    out.critic_obs = c_obs.flat().cwiseProduct(scale);
    out.value = critic_value(c_obs, params);

    const ActorOut head = actor_forward(a_obs, params);
    if (stochastic) {
      const SampledAction a =
          sample_action(head, params.action_lo, params.action_hi, rng_);
      out.action = a.raw;
      out.log_prob = a.log_prob;
    } else {
      out.action = head.mean;
      out.log_prob = gaussian_logprob(head.mean, head.mean, head.std);
    }
    const VectorXd emitted =
        out.action.cwiseMin(params.action_hi).cwiseMax(params.action_lo);

    Vector3d delta;  // argument of the smoothness regularizer
    if (variant_ == AblationVariant::EndToEnd) {
      const VelocityCommand next{emitted[0], emitted[1], emitted[2]};
      delta = next.vec() - cmd_.vec();
      cmd_ = next;
      c_prev_ = cmd_.vec();
    } else {
      const VelocityIncrement inc{emitted[0], emitted[1], emitted[2]};
      delta = inc.vec();
      cmd_ = integrate_command(cmd_, inc);
      c_prev_ = inc.vec();
    }

    run_substeps();

    ++hl_steps_;
    if (reason_ == Termination::None && hl_steps_ >= cfg_.max_high_level_steps())
      reason_ = Termination::Timeout;

    const RewardBreakdown rb =
        step_reward(pre, cmd_, delta, state_.upright, cfg_.field.goal_center,
                    cfg_.thresholds, cfg_.rewards, kCommandHi[2]);
    out.reward = rb.total;
    episode_reward_ += rb.total;

    const bool finished = reason_ != Termination::None;
    out.done = finished ? 1.0 : 0.0;
    out.reason = reason_;
    out.episode_reward = episode_reward_;
    out.episode_steps = hl_steps_;
    if (finished && auto_reset) reset_episode();
    return finished;
  }

 private:
  Vector2d robot_frame_of(const Vector2d& world_pt) const {
    return rot2(-state_.robot_heading) * (world_pt - state_.robot_pos);
  }

  Vector3d v_robot_ball() const {
    if (variant_ != AblationVariant::ReplaceCprev) return Vector3d::Zero();
    const Vector2d rel =
        rot2(-state_.robot_heading) * state_.ball_vel - state_.robot_vel.head<2>();
    return {rel.x(), rel.y(), 0.0};
  }

  struct PendingDet {
    Detection det;
    Vector2d robot_pos;
    double heading;
  };

  void perceive() {
    const Vector3d ball_pt =
        robot_frame_point(state_, state_.ball_pos, cfg_.field.ball_radius);
    const Vector3d goal_pt = robot_frame_point(state_, cfg_.field.goal_center,
                                               cfg_.goal_landmark_height);
    ball_q_.push_back({synth_detect_point(ball_pt, cfg_.camera, cfg_.noise,
                                          state_.sim_time, rng_),
                       state_.robot_pos, state_.robot_heading});
    goal_q_.push_back({synth_detect_point(goal_pt, cfg_.camera, cfg_.noise,
                                          state_.sim_time, rng_),
                       state_.robot_pos, state_.robot_heading});
    deliver(ball_q_, ball_est_w_);
    deliver(goal_q_, goal_est_w_);
  }

  // Detections become visible detection_latency frames after capture; an
  // invalid frame keeps the previous world-frame estimate, which amounts to
  // dead-reckoning by ego-motion when read back in the robot frame.
  void deliver(std::deque<PendingDet>& q, Vector2d& est_w) {
    while (static_cast<int>(q.size()) > cfg_.noise.detection_latency) {
      const PendingDet p = q.front();
      q.pop_front();
      if (!p.det.valid) continue;
      const Vector3d rf = back_project(p.det, cfg_.camera);
      est_w = p.robot_pos + rot2(p.heading) * rf.head<2>();
    }
  }

  void run_substeps() {
    const double dt = cfg_.control.dt();
    for (int i = 0; i < cfg_.control.decimation(); ++i) {
      const Vector3d achieved =
          track(state_.robot_vel, cmd_.vec(), cfg_.tracker, dt, rng_);
      const bool fell =
          state_.upright && fall_check(achieved, cfg_.tracker, dt, rng_);
      state_ = step_world(state_, achieved, dt, eff_field_);
      if (fell) state_.upright = false;
      ++ll_steps_;
      if (ll_steps_ % cfg_.control.perception_divisor == 0) perceive();
      if (check_goal(state_, eff_field_)) {
        reason_ = Termination::Goal;
        return;
      }
      if (!state_.upright) {
        reason_ = Termination::Fell;
        return;
      }
      if (out_of_bounds(state_, eff_field_)) {
        reason_ = Termination::OutOfBounds;
        return;
      }
    }
  }

  const Config& cfg_;
  AblationVariant variant_;
  Rng rng_;
  FieldConfig eff_field_;
  WorldState state_;
  VelocityCommand cmd_;
  Vector3d c_prev_{Vector3d::Zero()};
  Vector2d ball_est_w_{Vector2d::Zero()};
  Vector2d goal_est_w_{Vector2d::Zero()};
  std::deque<PendingDet> ball_q_, goal_q_;
  int hl_steps_{0};
  long ll_steps_{0};
  double episode_reward_{0.0};
  Termination reason_{Termination::None};
};

}  // namespace hierkick
