#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>

#include "hierkick/rng.hpp"
#include "hierkick/world.hpp"

namespace hierkick {

using Eigen::Matrix3d;

// Pinhole intrinsics plus the camera-to-robot rigid transform.
// Robot frame: x forward, y left, z up. Camera frame: x right, y down,
// z along the optical axis.
struct CameraCalib {
  Matrix3d K{Matrix3d::Identity()};
  Matrix3d R{Matrix3d::Identity()};  // camera -> robot
  Vector3d t{Vector3d::Zero()};      // camera origin in the robot frame

  void validate() const {
    if (K(0, 0) <= 0.0 || K(1, 1) <= 0.0 || std::abs(K.determinant()) < 1e-12)
      throw std::invalid_argument("calib: K must be invertible with positive focals");
    if ((R.transpose() * R - Matrix3d::Identity()).norm() > 1e-10 ||
        std::abs(R.determinant() - 1.0) > 1e-10)
      throw std::invalid_argument("calib: R must be a proper rotation");
  }
};

struct Detection {
  double pixel_x{0.0};
  double pixel_y{0.0};
  double depth{0.0};  // m, > 0 when valid
  bool valid{false};
  double timestamp{0.0};  // capture time, s
};

struct NoiseModel {
  double pixel_noise_std{2.0};
  double depth_noise_frac{0.02};
  double dropout_prob{0.05};
  int detection_latency{1};  // frames at the 10 Hz detection rate
  int image_width{640};
  int image_height{480};

  void validate() const {
    if (dropout_prob < 0.0 || dropout_prob > 1.0)
      throw std::invalid_argument("noise: dropout_prob must be in [0, 1]");
    if (detection_latency < 0)
      throw std::invalid_argument("noise: latency must be non-negative");
    if (pixel_noise_std < 0.0 || depth_noise_frac < 0.0)
      throw std::invalid_argument("noise: stds must be non-negative");
  }
};

// p_robot = R * K^-1 * [x*d, y*d, d]^T + t
inline Vector3d back_project(const Detection& det, const CameraCalib& calib) {
  if (!det.valid || det.depth <= 0.0)
    throw std::domain_error("back_project: invalid detection");
  const Vector3d uv(det.pixel_x * det.depth, det.pixel_y * det.depth, det.depth);
  return calib.R * (calib.K.inverse() * uv) + calib.t;
}

// Forward pinhole projection of a robot-frame point. Empty when the point is
// behind the camera plane or outside the image.
inline std::optional<Detection> project(const Vector3d& p_robot,
                                        const CameraCalib& calib,
                                        const NoiseModel& noise,
                                        double timestamp) {
  const Vector3d p_cam = calib.R.transpose() * (p_robot - calib.t);
  if (p_cam.z() <= 1e-6) return std::nullopt;
  const Vector3d uv = calib.K * (p_cam / p_cam.z());
  if (uv.x() < 0.0 || uv.x() >= noise.image_width || uv.y() < 0.0 ||
      uv.y() >= noise.image_height)
    return std::nullopt;
  Detection det;
  det.pixel_x = uv.x();
  det.pixel_y = uv.y();
  det.depth = p_cam.z();
  det.valid = true;
  det.timestamp = timestamp;
  return det;
}

// World point at the given height, expressed in the robot body frame.
inline Vector3d robot_frame_point(const WorldState& s, const Vector2d& world_xy,
                                  double height) {
  const Vector2d rel = rot2(-s.robot_heading) * (world_xy - s.robot_pos);
  return {rel.x(), rel.y(), height};
}

// Noisy synthetic detection of a robot-frame target point. Draw order per
// call: dropout, then (if kept and visible) pixel x, pixel y, depth.
inline Detection synth_detect_point(const Vector3d& p_robot,
                                    const CameraCalib& calib,
                                    const NoiseModel& noise, double timestamp,
                                    Rng& rng) {
  Detection invalid;
  invalid.timestamp = timestamp;
  if (rng.bernoulli(noise.dropout_prob)) return invalid;
  auto det = project(p_robot, calib, noise, timestamp);
  if (!det) return invalid;
  det->pixel_x += rng.normal(0.0, noise.pixel_noise_std);
  det->pixel_y += rng.normal(0.0, noise.pixel_noise_std);
  det->depth *= 1.0 + rng.normal(0.0, noise.depth_noise_frac);
  if (det->depth <= 0.0) return invalid;
  return *det;
}

// Ball detection from ground truth; the ball center sits at ball_radius.
inline Detection synth_detect(const WorldState& state, const CameraCalib& calib,
                              const NoiseModel& noise, double ball_radius,
                              Rng& rng) {
  const Vector3d p = robot_frame_point(state, state.ball_pos, ball_radius);
  return synth_detect_point(p, calib, noise, state.sim_time, rng);
}

// Default head-mounted camera: 0.6 m up, pitched down, standard VGA-ish K.
inline CameraCalib default_camera() {
  CameraCalib c;
  c.K << 400.0, 0.0, 320.0, 0.0, 400.0, 240.0, 0.0, 0.0, 1.0;
  const double pitch = 35.0 * M_PI / 180.0;  // optical axis below horizontal
  // Columns: camera x -> -robot y, camera y/z pitched about that axis.
  const double cp = std::cos(pitch), sp = std::sin(pitch);
  c.R << 0.0, -sp, cp,
         -1.0, 0.0, 0.0,
         0.0, -cp, -sp;
  c.t = Vector3d(0.05, 0.0, 0.6);
  return c;
}

}  // namespace hierkick
