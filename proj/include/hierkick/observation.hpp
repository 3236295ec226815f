#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

#include "hierkick/world.hpp"

namespace hierkick {

using Eigen::VectorXd;

enum class AblationVariant { Full, NoDistances, ReplaceCprev, EndToEnd };

inline const char* variant_name(AblationVariant v) {
  switch (v) {
    case AblationVariant::Full: return "full";
    case AblationVariant::NoDistances: return "no_distances";
    case AblationVariant::ReplaceCprev: return "replace_cprev";
    case AblationVariant::EndToEnd: return "end_to_end";
  }
  return "unknown";
}

inline AblationVariant variant_from_name(const std::string& name) {
  if (name == "full") return AblationVariant::Full;
  if (name == "no_distances") return AblationVariant::NoDistances;
  if (name == "replace_cprev") return AblationVariant::ReplaceCprev;
  if (name == "end_to_end") return AblationVariant::EndToEnd;
  throw std::invalid_argument("unknown variant: " + name);
}

// Per-decision increment bounds: dvx in [-0.2, 0.2] m/s, dvy in [-0.1, 0.1],
// dwz in [-0.1, 0.1] rad/s.
inline const Vector3d kIncrementBound{0.2, 0.1, 0.1};

// Accumulated-command envelope; mirrors the tracker's feasible set with a
// reduced reverse speed.
inline const Vector3d kCommandLo{-0.6, -0.4, -1.0};
inline const Vector3d kCommandHi{1.2, 0.4, 1.0};

struct VelocityIncrement {
  double dvx{0.0};
  double dvy{0.0};
  double dwz{0.0};

  Vector3d vec() const { return {dvx, dvy, dwz}; }
};

struct VelocityCommand {
  double vx{0.0};
  double vy{0.0};
  double wz{0.0};

  Vector3d vec() const { return {vx, vy, wz}; }
  Vector2d planar() const { return {vx, vy}; }
};

inline VelocityIncrement clamp_increment(const Vector3d& raw) {
  const Vector3d c = raw.cwiseMin(kIncrementBound).cwiseMax(-kIncrementBound);
  return {c.x(), c.y(), c.z()};
}

// v_cmd(t) = v_cmd(t-1) + dv(t), clamped to the accumulated envelope.
inline VelocityCommand integrate_command(const VelocityCommand& prev,
                                         const VelocityIncrement& inc) {
  const Vector3d sum = prev.vec() + inc.vec();
  const Vector3d c = sum.cwiseMin(kCommandHi).cwiseMax(kCommandLo);
  return {c.x(), c.y(), c.z()};
}

inline constexpr int kObsDim = 12;
inline constexpr int kActionDim = 3;

// Observation layout (all robot-frame, SI):
//   [0:2]  p_robot_ball   [2:4]  p_robot_goal
//   [4]    d_ball         [5]    d_goal
//   [6:9]  v_robot        [9:12] c_prev slot
struct HighLevelObs {
  Vector2d p_robot_ball{0.0, 0.0};
  Vector2d p_robot_goal{0.0, 0.0};
  double d_ball{0.0};
  double d_goal{0.0};
  Vector3d v_robot{0.0, 0.0, 0.0};
  Vector3d c_prev{0.0, 0.0, 0.0};

  VectorXd flat() const {
    VectorXd o(kObsDim);
    o << p_robot_ball, p_robot_goal, d_ball, d_goal, v_robot, c_prev;
    return o;
  }
};

// Builds the coach observation from robot-frame estimates (perception for the
// actor, ground truth for the privileged critic). For ReplaceCprev the c_prev
// slot carries the robot-frame robot-ball relative velocity instead.
inline HighLevelObs build_obs(const WorldState& state, const Vector3d& ball_est,
                              const Vector2d& goal_est, const Vector3d& c_prev,
                              AblationVariant variant,
                              const Vector3d& v_robot_ball = Vector3d::Zero()) {
  if (!ball_est.allFinite() || !goal_est.allFinite() || !c_prev.allFinite())
    throw std::domain_error("build_obs: non-finite estimate");
  HighLevelObs obs;
  obs.p_robot_ball = ball_est.head<2>();
  obs.p_robot_goal = goal_est;
  obs.d_ball = obs.p_robot_ball.norm();
  obs.d_goal = obs.p_robot_goal.norm();
  obs.v_robot = state.robot_vel;
  obs.c_prev = c_prev;
  if (variant == AblationVariant::NoDistances) {
    obs.d_ball = 0.0;
    obs.d_goal = 0.0;
  } else if (variant == AblationVariant::ReplaceCprev) {
    obs.c_prev = v_robot_ball;
  }
  return obs;
}

}  // namespace hierkick
