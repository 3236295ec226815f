#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "hierkick/observation.hpp"
#include "hierkick/world.hpp"

namespace hierkick {

enum class Phase { Approach, Alignment, Dribble, Shoot };

struct PhaseThresholds {
  double u1{1.5};  // far robot-ball threshold
  double u2{0.5};  // close robot-ball threshold
  double u3{2.0};  // ball-goal shooting threshold

  void validate() const {
    if (!(0.0 < u2 && u2 < u1) || u3 <= 0.0)
      throw std::invalid_argument("thresholds: require 0 < u2 < u1 and u3 > 0");
  }
};

struct RewardWeights {
  // Stage weights; non-decreasing so later skills dominate.
  double lambda_approach{1.0};
  double lambda_alignment{1.5};
  double lambda_dribble{2.0};
  double lambda_shoot{3.0};
  double lambda_delta{1.0};
  double beta{0.5};        // alignment smoothness coefficient
  double mu{0.5};          // shoot speed coefficient
  double v_max{1.5};       // shoot speed-term cap
  double alpha{2.0};       // shoot speed amplification
  double eps{1e-6};        // velocity-normalization epsilon
  double zeta1{2.0};       // over-delta penalty
  double zeta2{0.1};       // trivial-command penalty
  double delta_max{0.25};
  double delta_min{0.01};
  double survival_bonus{1.0};
  double heading_kp{1.0};  // desired-omega feedback gain for alignment

  void validate() const {
    if (lambda_approach < 0.0 || lambda_delta < 0.0 ||
        !(lambda_approach <= lambda_alignment &&
          lambda_alignment <= lambda_dribble &&
          lambda_dribble <= lambda_shoot))
      throw std::invalid_argument(
          "rewards: stage weights must be non-negative and non-decreasing");
    if (beta < 0.0 || mu < 0.0 || v_max <= 0.0 || alpha <= 0.0 || eps <= 0.0)
      throw std::invalid_argument("rewards: shoot parameters must be positive");
    if (!(0.0 < delta_min && delta_min < delta_max) || zeta1 < 0.0 || zeta2 < 0.0)
      throw std::invalid_argument("rewards: require 0 < delta_min < delta_max");
  }
};

struct PhaseMasks {
  bool approach{false};
  bool alignment{false};
  bool dribble{false};
  bool shoot{false};

  Phase active() const {
    if (approach) return Phase::Approach;
    if (alignment) return Phase::Alignment;
    if (dribble) return Phase::Dribble;
    return Phase::Shoot;
  }
};

// M_approach = [d > u1]; M_alignment = [u2 < d <= u1];
// M_dribble  = [0 < d <= u2, d_goal >= u3]; M_shoot = [0 < d <= u2, d_goal < u3].
// The d_goal = u3 boundary goes to Dribble so the masks partition.
inline PhaseMasks phase_masks(double d_ball, double d_goal,
                              const PhaseThresholds& th) {
  PhaseMasks m;
  m.approach = d_ball > th.u1;
  m.alignment = th.u2 < d_ball && d_ball <= th.u1;
  m.dribble = 0.0 < d_ball && d_ball <= th.u2 && d_goal >= th.u3;
  m.shoot = 0.0 < d_ball && d_ball <= th.u2 && d_goal < th.u3;
  return m;
}

inline double approach_reward(const VelocityCommand& v_cmd,
                              const Vector2d& dir_robot_ball, bool mask) {
  if (!mask) return 0.0;
  return v_cmd.planar().dot(dir_robot_ball);
}

inline double alignment_reward(double theta_rbg, double dw_desired,
                               double dw_actual, double beta, bool mask) {
  if (!mask) return 0.0;
  return std::cos(theta_rbg) - beta * std::abs(dw_desired - dw_actual);
}

inline double dribble_reward(const VelocityCommand& v_cmd,
                             const Vector2d& dir_ball_goal, bool mask) {
  if (!mask) return 0.0;
  return v_cmd.planar().dot(dir_ball_goal);
}

inline double shoot_reward(const VelocityCommand& v_cmd,
                           const Vector2d& dir_ball_goal,
                           const RewardWeights& w, bool mask) {
  if (!mask) return 0.0;
  const Vector2d v = v_cmd.planar();
  const double speed = v.norm();
  const Vector2d v_hat = v / (speed + w.eps);
  return v_hat.dot(dir_ball_goal) + w.mu * std::min(w.v_max, speed * w.alpha);
}

// Active globally; always <= 0.
inline double delta_reward(const Vector3d& inc, const RewardWeights& w) {
  const double n = inc.norm();
  double r = -w.zeta1 * std::max(0.0, n - w.delta_max);
  if (n < w.delta_min) r -= w.zeta2;
  return r;
}

inline double delta_reward(const VelocityIncrement& inc, const RewardWeights& w) {
  return delta_reward(inc.vec(), w);
}

struct RewardBreakdown {
  double r_approach{0.0};
  double r_alignment{0.0};
  double r_dribble{0.0};
  double r_shoot{0.0};
  double r_delta{0.0};
  double r_survival{0.0};
  Phase active_phase{Phase::Approach};
  double total{0.0};
};

inline RewardBreakdown total_reward(double r_approach, double r_alignment,
                                    double r_dribble, double r_shoot,
                                    double r_delta, Phase phase, bool upright,
                                    const RewardWeights& w) {
  RewardBreakdown b;
  b.r_approach = r_approach;
  b.r_alignment = r_alignment;
  b.r_dribble = r_dribble;
  b.r_shoot = r_shoot;
  b.r_delta = r_delta;
  b.r_survival = upright ? 1.0 : 0.0;
  b.active_phase = phase;
  b.total = w.lambda_approach * r_approach + w.lambda_alignment * r_alignment +
            w.lambda_dribble * r_dribble + w.lambda_shoot * r_shoot +
            w.lambda_delta * r_delta + w.survival_bonus * b.r_survival;
  return b;
}

// Full per-decision reward from world geometry. Masks and directions come
// from the pre-step state; the survival term from the post-step upright flag.
// `inc` is the command delta of this decision (for EndToEnd, the change of the
// absolute command).
inline RewardBreakdown step_reward(const WorldState& pre,
                                   const VelocityCommand& v_cmd,
                                   const Vector3d& inc, bool upright_after,
                                   const Vector2d& goal_center,
                                   const PhaseThresholds& th,
                                   const RewardWeights& w,
                                   double wz_envelope) {
  const Vector2d to_ball_w = pre.ball_pos - pre.robot_pos;
  const Vector2d to_goal_w = goal_center - pre.robot_pos;
  const Vector2d ball_goal_w = goal_center - pre.ball_pos;
  const double d_ball = to_ball_w.norm();
  const double d_goal = ball_goal_w.norm();
  const PhaseMasks m = phase_masks(d_ball, d_goal, th);

  const Matrix2d to_body = rot2(-pre.robot_heading);
  const Vector2d dir_ball =
      d_ball > 1e-12 ? Vector2d(to_body * (to_ball_w / d_ball)) : Vector2d(0, 0);
  const Vector2d dir_ball_goal =
      d_goal > 1e-12 ? Vector2d(to_body * (ball_goal_w / d_goal)) : Vector2d(0, 0);

  // Angle between robot->ball and robot->goal unit vectors.
  double theta_rbg = 0.0;
  if (d_ball > 1e-12 && to_goal_w.norm() > 1e-12) {
    const Vector2d a = to_ball_w / d_ball;
    const Vector2d b = to_goal_w / to_goal_w.norm();
    theta_rbg = std::atan2(std::abs(a.x() * b.y() - a.y() * b.x()), a.dot(b));
  }
  // Proportional heading feedback toward the ball bearing.
  const double bearing_err = std::atan2(dir_ball.y(), dir_ball.x());
  const double dw_desired = std::clamp(w.heading_kp * bearing_err,
                                       -wz_envelope, wz_envelope);

  const double r_app = approach_reward(v_cmd, dir_ball, m.approach);
  const double r_ali =
      alignment_reward(theta_rbg, dw_desired, v_cmd.wz, w.beta, m.alignment);
  const double r_dri = dribble_reward(v_cmd, dir_ball_goal, m.dribble);
  const double r_sho = shoot_reward(v_cmd, dir_ball_goal, w, m.shoot);
  const double r_del = delta_reward(inc, w);
  return total_reward(r_app, r_ali, r_dri, r_sho, r_del, m.active(),
                      upright_after, w);
}

}  // namespace hierkick
