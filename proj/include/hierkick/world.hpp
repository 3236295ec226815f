#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "hierkick/rng.hpp"

namespace hierkick {

using Eigen::Matrix2d;
using Eigen::Vector2d;
using Eigen::Vector3d;

// Wrap to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a <= 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

inline Matrix2d rot2(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Matrix2d r;
  r << c, -s, s, c;
  return r;
}

// Planar ground truth: robot body pose/velocity, ball state, episode flags.
struct WorldState {
  Vector2d robot_pos{0.0, 0.0};   // field frame, m
  double robot_heading{0.0};      // rad, wrapped to (-pi, pi]
  Vector3d robot_vel{0.0, 0.0, 0.0};  // body frame [vx, vy, wz]
  Vector2d ball_pos{0.0, 0.0};
  Vector2d ball_vel{0.0, 0.0};
  bool upright{true};
  double sim_time{0.0};
};

struct FieldConfig {
  double field_length{9.0};
  double field_width{6.0};
  Vector2d goal_center{4.5, 0.0};  // must lie on the +x boundary line
  double goal_width{2.6};
  double ball_radius{0.11};
  double robot_contact_radius{0.25};
  double ball_friction_decel{0.35};   // m/s^2
  double contact_restitution{0.2};    // [0, 1]
  double kick_transfer_gain{1.0};
  double bounds_margin{0.5};          // out-of-bounds slack beyond the field box

  void validate() const {
    if (field_length <= 0.0 || field_width <= 0.0 || goal_width <= 0.0 ||
        ball_radius <= 0.0 || robot_contact_radius <= 0.0 ||
        bounds_margin <= 0.0)
      throw std::invalid_argument("field: lengths must be strictly positive");
    if (ball_friction_decel < 0.0)
      throw std::invalid_argument("field: friction must be non-negative");
    if (contact_restitution < 0.0 || contact_restitution > 1.0)
      throw std::invalid_argument("field: restitution must be in [0, 1]");
    if (std::abs(goal_center.x() - 0.5 * field_length) > 1e-9 ||
        std::abs(goal_center.y()) > 0.5 * field_width)
      throw std::invalid_argument("field: goal_center must sit on the +x line");
  }
};

struct Interval {
  double lo{0.0};
  double hi{0.0};

  void validate(const char* name) const {
    if (!(lo <= hi))
      throw std::invalid_argument(std::string("randomization: bad interval ") +
                                  name);
  }
  double sample(Rng& rng) const { return lo == hi ? lo : rng.uniform(lo, hi); }
};

struct RandomizationSpec {
  Interval friction{0.25, 0.5};
  Interval restitution{0.05, 0.3};
  Interval robot_x{-3.5, -0.5};
  Interval robot_y{-2.0, 2.0};
  Interval robot_heading{-M_PI, M_PI};
  Interval ball_x{0.0, 2.5};
  Interval ball_y{-1.5, 1.5};
  std::uint64_t rng_seed{0};

  void validate() const {
    friction.validate("friction");
    restitution.validate("restitution");
    robot_x.validate("robot_x");
    robot_y.validate("robot_y");
    robot_heading.validate("robot_heading");
    ball_x.validate("ball_x");
    ball_y.validate("ball_y");
  }
};

// Draw order: robot x, robot y, heading, ball x, ball y.
inline WorldState reset(const RandomizationSpec& spec, Rng& rng) {
  spec.validate();
  WorldState s;
  s.robot_pos.x() = spec.robot_x.sample(rng);
  s.robot_pos.y() = spec.robot_y.sample(rng);
  s.robot_heading = wrap_angle(spec.robot_heading.sample(rng));
  s.ball_pos.x() = spec.ball_x.sample(rng);
  s.ball_pos.y() = spec.ball_y.sample(rng);
  return s;
}

inline WorldState reset(const RandomizationSpec& spec) {
  Rng rng(spec.rng_seed);
  return reset(spec, rng);
}

// Per-episode physics draw. Order: friction, restitution.
inline FieldConfig sample_physics(const RandomizationSpec& spec,
                                  const FieldConfig& base, Rng& rng) {
  FieldConfig cfg = base;
  cfg.ball_friction_decel = spec.friction.sample(rng);
  cfg.contact_restitution = spec.restitution.sample(rng);
  return cfg;
}

inline Vector2d robot_world_vel(const WorldState& s) {
  return rot2(s.robot_heading) * s.robot_vel.head<2>();
}

// One explicit-Euler step at dt. Ball friction decelerates along the velocity
// direction; robot-ball contact is a single impulse against the gain-scaled
// robot velocity at the contact point.
inline WorldState step_world(const WorldState& state, const Vector3d& tracked_vel,
                             double dt, const FieldConfig& cfg) {
  if (!tracked_vel.allFinite() || !std::isfinite(dt))
    throw std::domain_error("step_world: non-finite input");

  WorldState s = state;
  s.robot_vel = tracked_vel;

  // Ball: decelerate, then integrate.
  const double speed = s.ball_vel.norm();
  if (speed > 0.0) {
    const double next = std::max(0.0, speed - cfg.ball_friction_decel * dt);
    s.ball_vel *= next / speed;
  }
  s.ball_pos += s.ball_vel * dt;

  // Robot: body-frame velocity in the world frame.
  s.robot_pos += rot2(s.robot_heading) * tracked_vel.head<2>() * dt;
  s.robot_heading = wrap_angle(s.robot_heading + tracked_vel.z() * dt);

  // Contact: impulse along the normal, measured against the contact-point
  // velocity kick_transfer_gain * v_robot; restitution applies to that
  // relative normal speed.
  const Vector2d d = s.ball_pos - s.robot_pos;
  const double dist = d.norm();
  const double contact_dist = cfg.robot_contact_radius + cfg.ball_radius;
  if (dist < contact_dist && dist > 1e-12) {
    const Vector2d n = d / dist;
    const Vector2d cp_vel = cfg.kick_transfer_gain * robot_world_vel(s);
    const double rel = (s.ball_vel - cp_vel).dot(n);
    if (rel < 0.0) s.ball_vel -= (1.0 + cfg.contact_restitution) * rel * n;
    s.ball_pos = s.robot_pos + n * contact_dist;  // resolve penetration
  }

  s.sim_time += dt;
  return s;
}

// True iff the ball center is strictly past the goal line by more than
// ball_radius, within the goal mouth.
inline bool check_goal(const WorldState& s, const FieldConfig& cfg) {
  const double line_x = cfg.goal_center.x();
  return s.ball_pos.x() > line_x + cfg.ball_radius &&
         std::abs(s.ball_pos.y() - cfg.goal_center.y()) <= 0.5 * cfg.goal_width;
}

inline bool out_of_bounds(const WorldState& s, const FieldConfig& cfg) {
  const double hx = 0.5 * cfg.field_length + cfg.bounds_margin;
  const double hy = 0.5 * cfg.field_width + cfg.bounds_margin;
  auto outside = [&](const Vector2d& p) {
    return std::abs(p.x()) > hx || std::abs(p.y()) > hy;
  };
  return outside(s.robot_pos) || outside(s.ball_pos);
}

}  // namespace hierkick
