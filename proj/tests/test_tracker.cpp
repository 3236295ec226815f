#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hierkick/tracker.hpp"

using namespace hierkick;
using Eigen::Vector3d;

namespace {
TrackerConfig noiseless() {
  TrackerConfig cfg;
  cfg.tracking_noise_std.setZero();
  return cfg;
}
}  // namespace

TEST_CASE("track: commanding the current velocity is a fixed point") {
  TrackerConfig cfg = noiseless();
  Rng rng(1);
  const Vector3d v(0.4, -0.1, 0.3);
  CHECK((track(v, v, cfg, 0.02, rng) - v).norm() == 0.0);
}

TEST_CASE("track: one first-order lag step") {
  TrackerConfig cfg = noiseless();
  cfg.time_constant = 0.2;
  Rng rng(1);
  const Vector3d out = track(Vector3d::Zero(), Vector3d(1, 0, 0), cfg, 0.02, rng);
  CHECK(out.x() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(out.y() == 0.0);
  CHECK(out.z() == 0.0);
}

TEST_CASE("track: noise std matches the configured value within 5%") {
  TrackerConfig cfg;
  cfg.tracking_noise_std = Vector3d(0.05, 0.05, 0.05);
  Rng rng(42);
  const Vector3d cur(0.3, 0.0, 0.0);
  const int n = 10000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = track(cur, cur, cfg, 0.02, rng).x();
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n;
  const double std = std::sqrt(sum2 / n - mean * mean);
  CHECK(std == doctest::Approx(0.05).epsilon(0.05));
}

TEST_CASE("track: achieved velocity never exceeds the feasible envelope") {
  TrackerConfig cfg;
  Rng rng(5);
  Vector3d v = Vector3d::Zero();
  for (int i = 0; i < 2000; ++i) {
    const Vector3d cmd(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
    v = track(v, cmd, cfg, 0.02, rng);
    for (int d = 0; d < 3; ++d) CHECK(std::abs(v[d]) <= cfg.max_feasible[d]);
  }
}

TEST_CASE("track: geometric convergence ratio equals 1 - dt/tau") {
  TrackerConfig cfg = noiseless();
  cfg.time_constant = 0.25;
  Rng rng(1);
  const Vector3d cmd(0.8, 0.2, -0.5);
  Vector3d v = Vector3d::Zero();
  double prev_err = (cmd - v).norm();
  const double expected = 1.0 - 0.02 / cfg.time_constant;
  for (int i = 0; i < 50; ++i) {
    v = track(v, cmd, cfg, 0.02, rng);
    const double err = (cmd - v).norm();
    CHECK(err / prev_err == doctest::Approx(expected).epsilon(1e-12));
    prev_err = err;
  }
}

TEST_CASE("fall_check: below threshold never falls") {
  TrackerConfig cfg;
  cfg.fall_hazard_rate = 50.0;  // would fall instantly if gated open
  Rng rng(3);
  const Vector3d slow(0.5, 0.2, 0.9);
  for (int i = 0; i < 1000; ++i) CHECK_FALSE(fall_check(slow, cfg, 0.02, rng));
}

TEST_CASE("fall_check: zero hazard never falls") {
  TrackerConfig cfg;
  cfg.fall_hazard_rate = 0.0;
  Rng rng(3);
  const Vector3d fast(1.2, 0.4, 0.0);
  for (int i = 0; i < 1000; ++i) CHECK_FALSE(fall_check(fast, cfg, 0.02, rng));
}

TEST_CASE("fall_check: fall frequency matches rate * dt within 3 sigma") {
  TrackerConfig cfg;
  cfg.fall_hazard_rate = 2.0;
  Rng rng(17);
  const Vector3d fast(1.2, 0.0, 0.0);
  const int n = 100000;
  int falls = 0;
  for (int i = 0; i < n; ++i)
    if (fall_check(fast, cfg, 0.02, rng)) ++falls;
  const double p = cfg.fall_hazard_rate * 0.02;
  const double sigma = std::sqrt(p * (1.0 - p) / n);
  CHECK(std::abs(static_cast<double>(falls) / n - p) < 3.0 * sigma);
}

TEST_CASE("config validation") {
  TrackerConfig cfg;
  cfg.time_constant = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = TrackerConfig{};
  cfg.tracking_noise_std.x() = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_NOTHROW(TrackerConfig{}.validate());
}
