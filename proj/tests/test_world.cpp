#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hierkick/world.hpp"

using namespace hierkick;

TEST_CASE("reset: collapsed ranges give the exact specified state") {
  RandomizationSpec spec;
  spec.robot_x = {-2.0, -2.0};
  spec.robot_y = {0.5, 0.5};
  spec.robot_heading = {0.25, 0.25};
  spec.ball_x = {1.0, 1.0};
  spec.ball_y = {-0.5, -0.5};
  const WorldState s = reset(spec);
  CHECK(s.robot_pos.x() == -2.0);
  CHECK(s.robot_pos.y() == 0.5);
  CHECK(s.robot_heading == 0.25);
  CHECK(s.ball_pos.x() == 1.0);
  CHECK(s.ball_pos.y() == -0.5);
  CHECK(s.upright);
  CHECK(s.sim_time == 0.0);
  CHECK(s.ball_vel.norm() == 0.0);
}

TEST_CASE("reset: same seed reproduces bitwise-identical states") {
  RandomizationSpec spec;
  spec.rng_seed = 1234;
  const WorldState a = reset(spec);
  const WorldState b = reset(spec);
  CHECK(a.robot_pos == b.robot_pos);
  CHECK(a.robot_heading == b.robot_heading);
  CHECK(a.ball_pos == b.ball_pos);
}

TEST_CASE("reset: invalid range is a configuration error") {
  RandomizationSpec spec;
  spec.ball_x = {3.0, 1.0};
  CHECK_THROWS_AS(reset(spec), std::invalid_argument);
}

TEST_CASE("reset: ball-x sample mean over 1e4 draws") {
  RandomizationSpec spec;
  spec.ball_x = {1.0, 3.0};
  Rng rng(7);
  double sum = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) sum += reset(spec, rng).ball_pos.x();
  const double mean = sum / n;
  CHECK(mean > 1.9);
  CHECK(mean < 2.1);
}

TEST_CASE("step_world: stationary world is a fixed point up to time") {
  FieldConfig cfg;
  WorldState s;
  s.robot_pos = {-2.0, 0.0};
  s.ball_pos = {1.0, 0.0};
  const WorldState next = step_world(s, Vector3d::Zero(), 0.02, cfg);
  CHECK(next.robot_pos == s.robot_pos);
  CHECK(next.ball_pos == s.ball_pos);
  CHECK(next.ball_vel == s.ball_vel);
  CHECK(next.sim_time == doctest::Approx(0.02));
}

TEST_CASE("step_world: one Euler friction step") {
  FieldConfig cfg;
  cfg.ball_friction_decel = 0.5;
  WorldState s;
  s.robot_pos = {-4.0, -2.0};  // far from the ball
  s.ball_pos = {1.0, 0.0};
  s.ball_vel = {1.0, 0.0};
  const WorldState next = step_world(s, Vector3d::Zero(), 0.02, cfg);
  CHECK(next.ball_vel.x() == doctest::Approx(0.99).epsilon(1e-12));
  CHECK(next.ball_vel.y() == 0.0);
}

TEST_CASE("step_world: head-on contact matches the scalar impulse oracle") {
  FieldConfig cfg;
  cfg.ball_friction_decel = 0.0;
  cfg.contact_restitution = 0.3;
  cfg.kick_transfer_gain = 0.8;
  WorldState s;
  // Robot moving +x at 0.6 m/s, stationary ball just inside contact range.
  s.robot_pos = {0.0, 0.0};
  s.robot_heading = 0.0;
  s.ball_pos = {cfg.robot_contact_radius + cfg.ball_radius - 0.02, 0.0};
  const Vector3d vel(0.6, 0.0, 0.0);
  const WorldState next = step_world(s, vel, 0.02, cfg);
  // 1-D impulse: ball gains (1 + e) * g * v_robot along the normal.
  const double expected = (1.0 + cfg.contact_restitution) * cfg.kick_transfer_gain * 0.6;
  CHECK(next.ball_vel.x() == doctest::Approx(expected).epsilon(1e-9));
  CHECK(next.ball_vel.y() == doctest::Approx(0.0));
}

TEST_CASE("step_world: restitution fixes the relative normal speed") {
  FieldConfig cfg;
  cfg.ball_friction_decel = 0.0;
  cfg.contact_restitution = 0.45;
  cfg.kick_transfer_gain = 1.3;
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    WorldState s;
    s.robot_pos = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    s.robot_heading = rng.uniform(-M_PI, M_PI);
    const double angle = rng.uniform(-M_PI, M_PI);
    const double dist = cfg.robot_contact_radius + cfg.ball_radius - 0.01;
    s.ball_pos = s.robot_pos + dist * Vector2d(std::cos(angle), std::sin(angle));
    s.ball_vel = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const Vector3d vel(rng.uniform(-1, 1), rng.uniform(-0.4, 0.4),
                       rng.uniform(-1, 1));

    // Pre-contact relative normal speed against the gain-scaled robot
    // velocity, evaluated with the post-integration poses.
    WorldState moved = s;
    const double spd = moved.ball_vel.norm();
    moved.ball_pos += moved.ball_vel * 0.02;
    moved.robot_pos += rot2(moved.robot_heading) * vel.head<2>() * 0.02;
    moved.robot_heading = wrap_angle(moved.robot_heading + vel.z() * 0.02);
    moved.robot_vel = vel;
    const Vector2d d = moved.ball_pos - moved.robot_pos;
    if (d.norm() >= cfg.robot_contact_radius + cfg.ball_radius) continue;
    const Vector2d n = d / d.norm();
    const Vector2d cp = cfg.kick_transfer_gain * robot_world_vel(moved);
    const double pre = (moved.ball_vel - cp).dot(n);
    if (pre >= 0.0) continue;

    const WorldState next = step_world(s, vel, 0.02, cfg);
    const Vector2d n2 = (next.ball_pos - next.robot_pos).normalized();
    const double post = (next.ball_vel - cp).dot(n2);
    CHECK(post == doctest::Approx(-cfg.contact_restitution * pre).epsilon(1e-9));
  }
}

TEST_CASE("step_world: rejects non-finite input") {
  FieldConfig cfg;
  WorldState s;
  CHECK_THROWS_AS(
      step_world(s, Vector3d(std::nan(""), 0, 0), 0.02, cfg),
      std::domain_error);
}

TEST_CASE("free-rolling ball kinetic energy is non-increasing") {
  FieldConfig cfg;
  cfg.ball_friction_decel = 0.4;
  WorldState s;
  s.robot_pos = {-4.0, -2.5};  // parked out of the way
  s.ball_pos = {0.0, 0.0};
  s.ball_vel = {1.2, -0.7};
  double prev = s.ball_vel.squaredNorm();
  for (int i = 0; i < 500; ++i) {
    s = step_world(s, Vector3d::Zero(), 0.02, cfg);
    const double e = s.ball_vel.squaredNorm();
    CHECK(e <= prev + 1e-12);
    prev = e;
  }
  CHECK(prev == 0.0);  // friction brings it to rest
}

TEST_CASE("check_goal: boundary cases") {
  FieldConfig cfg;
  WorldState s;

  SUBCASE("displaced inward by two radii") {
    s.ball_pos = cfg.goal_center + Vector2d(2.0 * cfg.ball_radius, 0.0);
    CHECK(check_goal(s, cfg));
  }
  SUBCASE("exactly on the line is not a goal") {
    s.ball_pos = cfg.goal_center;
    CHECK_FALSE(check_goal(s, cfg));
  }
  SUBCASE("past the line but outside the goal mouth") {
    s.ball_pos = cfg.goal_center +
                 Vector2d(2.0 * cfg.ball_radius, 0.5 * cfg.goal_width + 0.05);
    CHECK_FALSE(check_goal(s, cfg));
  }
}

TEST_CASE("check_goal is monotone along an inbound straight path") {
  FieldConfig cfg;
  WorldState s;
  s.robot_pos = {-4.0, -2.5};
  s.ball_pos = {4.0, 0.3};
  s.ball_vel = {2.0, 0.0};
  FieldConfig frictionless = cfg;
  frictionless.ball_friction_decel = 0.0;
  bool seen = false;
  for (int i = 0; i < 40; ++i) {
    s = step_world(s, Vector3d::Zero(), 0.02, frictionless);
    const bool g = check_goal(s, frictionless);
    if (seen) CHECK(g);
    seen = seen || g;
  }
  CHECK(seen);
}

TEST_CASE("determinism: same seed and commands give identical trajectories") {
  FieldConfig cfg;
  RandomizationSpec spec;
  auto run = [&] {
    Rng rng(99);
    WorldState s = reset(spec, rng);
    for (int i = 0; i < 100; ++i)
      s = step_world(s, Vector3d(0.5, 0.1, 0.2), 0.02, cfg);
    return s;
  };
  const WorldState a = run();
  const WorldState b = run();
  CHECK(a.robot_pos == b.robot_pos);
  CHECK(a.ball_pos == b.ball_pos);
  CHECK(a.ball_vel == b.ball_vel);
  CHECK(a.robot_heading == b.robot_heading);
}

TEST_CASE("field config validation") {
  FieldConfig cfg;
  cfg.contact_restitution = 1.4;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = FieldConfig{};
  cfg.goal_center = {1.0, 0.0};
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_NOTHROW(FieldConfig{}.validate());
}
