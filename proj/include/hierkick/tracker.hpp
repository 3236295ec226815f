#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "hierkick/rng.hpp"

namespace hierkick {

// Surrogate for the pre-trained 50 Hz motion policy: first-order command
// tracking with noise, plus a speed-gated stochastic fall hazard.
struct TrackerConfig {
  double time_constant{0.15};  // s
  Eigen::Vector3d tracking_noise_std{0.02, 0.02, 0.03};
  Eigen::Vector3d max_feasible{1.2, 0.4, 1.0};  // [m/s, m/s, rad/s]
  double fall_speed_threshold{1.05};            // planar m/s
  double fall_hazard_rate{0.1};                 // 1/s above threshold

  void validate() const {
    if (time_constant <= 0.0)
      throw std::invalid_argument("tracker: time_constant must be positive");
    if ((tracking_noise_std.array() < 0.0).any())
      throw std::invalid_argument("tracker: noise std must be non-negative");
    if ((max_feasible.array() <= 0.0).any() || fall_speed_threshold <= 0.0)
      throw std::invalid_argument("tracker: envelope must be positive");
    if (fall_hazard_rate < 0.0)
      throw std::invalid_argument("tracker: hazard rate must be non-negative");
  }
};

inline Eigen::Vector3d track(const Eigen::Vector3d& current_vel,
                             const Eigen::Vector3d& command,
                             const TrackerConfig& cfg, double dt, Rng& rng) {
  const Eigen::Vector3d cmd =
      command.cwiseMin(cfg.max_feasible).cwiseMax(-cfg.max_feasible);
  Eigen::Vector3d v = current_vel + (cmd - current_vel) * (dt / cfg.time_constant);
  for (int i = 0; i < 3; ++i) {
    if (cfg.tracking_noise_std[i] > 0.0)
      v[i] += rng.normal(0.0, cfg.tracking_noise_std[i]);
  }
  return v.cwiseMin(cfg.max_feasible).cwiseMax(-cfg.max_feasible);
}

// Fall with probability hazard_rate * dt while planar speed exceeds the
// threshold. Callers must stop consulting this once the robot has fallen.
inline bool fall_check(const Eigen::Vector3d& achieved_vel,
                       const TrackerConfig& cfg, double dt, Rng& rng) {
  const double speed = achieved_vel.head<2>().norm();
  if (speed <= cfg.fall_speed_threshold || cfg.fall_hazard_rate <= 0.0)
    return false;
  return rng.bernoulli(cfg.fall_hazard_rate * dt);
}

}  // namespace hierkick
