#pragma once

#include <fstream>
#include <json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "hierkick/camera.hpp"
#include "hierkick/rewards.hpp"
#include "hierkick/tracker.hpp"
#include "hierkick/world.hpp"

namespace hierkick {

struct PpoConfig {
  double gamma{0.99};
  double gae_lambda{0.95};
  double clip_eps{0.2};
  double kl_target{0.01};
  double learning_rate{3e-4};
  int batch_size{4096};
  int minibatch_size{1024};
  int epochs{5};
  double value_loss_coef{0.5};
  double entropy_coef{0.01};
  double max_episode_seconds{20.0};

  void validate() const {
    if (!(gamma > 0.0 && gamma <= 1.0) ||
        !(gae_lambda >= 0.0 && gae_lambda <= 1.0))
      throw std::invalid_argument("ppo: gamma/lambda out of range");
    if (batch_size <= 0 || minibatch_size <= 0 ||
        batch_size % minibatch_size != 0)
      throw std::invalid_argument("ppo: minibatch_size must divide batch_size");
    if (epochs <= 0 || learning_rate <= 0.0 || clip_eps <= 0.0)
      throw std::invalid_argument("ppo: bad optimization parameters");
    if (max_episode_seconds <= 0.0)
      throw std::invalid_argument("ppo: bad episode limit");
  }
};

struct ControlConfig {
  double low_level_hz{50.0};
  double high_level_hz{5.0};
  int perception_divisor{5};  // one detection per this many low-level steps

  double dt() const { return 1.0 / low_level_hz; }
  int decimation() const {
    return static_cast<int>(low_level_hz / high_level_hz + 0.5);
  }

  void validate() const {
    if (low_level_hz <= 0.0 || high_level_hz <= 0.0 ||
        low_level_hz < high_level_hz || perception_divisor <= 0)
      throw std::invalid_argument("control: bad frequencies");
  }
};

struct TrainConfig {
  int n_worlds{64};
  int iterations{600};
  std::uint64_t master_seed{1};
  std::vector<int> actor_hidden{64, 64};
  std::vector<int> critic_hidden{64, 64};
};

struct EvalConfig {
  int n_trials{2000};
  int threads{8};
};

struct Config {
  FieldConfig field;
  RandomizationSpec randomization;
  TrackerConfig tracker;
  CameraCalib camera{default_camera()};
  NoiseModel noise;
  PhaseThresholds thresholds;
  RewardWeights rewards;
  PpoConfig ppo;
  ControlConfig control;
  TrainConfig train;
  EvalConfig eval;
  double goal_landmark_height{0.5};

  void validate() const {
    field.validate();
    randomization.validate();
    tracker.validate();
    camera.validate();
    noise.validate();
    thresholds.validate();
    rewards.validate();
    ppo.validate();
    control.validate();
  }

  int max_high_level_steps() const {
    return static_cast<int>(ppo.max_episode_seconds * control.high_level_hz +
                            0.5);
  }
};

namespace detail {

using nlohmann::json;

template <typename T>
void get_if(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline void get_vec3(const json& j, const char* key, Vector3d& out) {
  if (!j.contains(key)) return;
  const auto a = j.at(key).get<std::vector<double>>();
  if (a.size() != 3) throw std::invalid_argument(std::string("config: ") + key);
  out = Vector3d(a[0], a[1], a[2]);
}

inline void get_vec2(const json& j, const char* key, Vector2d& out) {
  if (!j.contains(key)) return;
  const auto a = j.at(key).get<std::vector<double>>();
  if (a.size() != 2) throw std::invalid_argument(std::string("config: ") + key);
  out = Vector2d(a[0], a[1]);
}

inline void get_interval(const json& j, const char* key, Interval& out) {
  if (!j.contains(key)) return;
  const auto a = j.at(key).get<std::vector<double>>();
  if (a.size() != 2) throw std::invalid_argument(std::string("config: ") + key);
  out = Interval{a[0], a[1]};
}

inline void get_mat3(const json& j, const char* key, Matrix3d& out) {
  if (!j.contains(key)) return;
  const auto a = j.at(key).get<std::vector<double>>();
  if (a.size() != 9) throw std::invalid_argument(std::string("config: ") + key);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) out(i, k) = a[3 * i + k];  // row-major
}

}  // namespace detail

// Loads a JSON profile over the built-in defaults; missing keys keep their
// default value. Key names match struct fields; see configs/ and the README.
inline Config load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open " + path);
  nlohmann::json j;
  is >> j;

  using detail::get_if;
  Config c;
  if (j.contains("field")) {
    const auto& f = j["field"];
    get_if(f, "field_length", c.field.field_length);
    get_if(f, "field_width", c.field.field_width);
    detail::get_vec2(f, "goal_center", c.field.goal_center);
    get_if(f, "goal_width", c.field.goal_width);
    get_if(f, "ball_radius", c.field.ball_radius);
    get_if(f, "robot_contact_radius", c.field.robot_contact_radius);
    get_if(f, "ball_friction_decel", c.field.ball_friction_decel);
    get_if(f, "contact_restitution", c.field.contact_restitution);
    get_if(f, "kick_transfer_gain", c.field.kick_transfer_gain);
    get_if(f, "bounds_margin", c.field.bounds_margin);
  }
  if (j.contains("randomization")) {
    const auto& r = j["randomization"];
    detail::get_interval(r, "friction", c.randomization.friction);
    detail::get_interval(r, "restitution", c.randomization.restitution);
    detail::get_interval(r, "robot_x", c.randomization.robot_x);
    detail::get_interval(r, "robot_y", c.randomization.robot_y);
    detail::get_interval(r, "robot_heading", c.randomization.robot_heading);
    detail::get_interval(r, "ball_x", c.randomization.ball_x);
    detail::get_interval(r, "ball_y", c.randomization.ball_y);
    get_if(r, "rng_seed", c.randomization.rng_seed);
  }
  if (j.contains("tracker")) {
    const auto& t = j["tracker"];
    get_if(t, "time_constant", c.tracker.time_constant);
    detail::get_vec3(t, "tracking_noise_std", c.tracker.tracking_noise_std);
    detail::get_vec3(t, "max_feasible", c.tracker.max_feasible);
    get_if(t, "fall_speed_threshold", c.tracker.fall_speed_threshold);
    get_if(t, "fall_hazard_rate", c.tracker.fall_hazard_rate);
  }
  if (j.contains("camera")) {
    const auto& cam = j["camera"];
    detail::get_mat3(cam, "K", c.camera.K);
    detail::get_mat3(cam, "R", c.camera.R);
    detail::get_vec3(cam, "t", c.camera.t);
  }
  if (j.contains("noise")) {
    const auto& n = j["noise"];
    get_if(n, "pixel_noise_std", c.noise.pixel_noise_std);
    get_if(n, "depth_noise_frac", c.noise.depth_noise_frac);
    get_if(n, "dropout_prob", c.noise.dropout_prob);
    get_if(n, "detection_latency", c.noise.detection_latency);
    get_if(n, "image_width", c.noise.image_width);
    get_if(n, "image_height", c.noise.image_height);
  }
  if (j.contains("thresholds")) {
    const auto& t = j["thresholds"];
    get_if(t, "u1", c.thresholds.u1);
    get_if(t, "u2", c.thresholds.u2);
    get_if(t, "u3", c.thresholds.u3);
  }
  if (j.contains("rewards")) {
    const auto& r = j["rewards"];
    get_if(r, "lambda_approach", c.rewards.lambda_approach);
    get_if(r, "lambda_alignment", c.rewards.lambda_alignment);
    get_if(r, "lambda_dribble", c.rewards.lambda_dribble);
    get_if(r, "lambda_shoot", c.rewards.lambda_shoot);
    get_if(r, "lambda_delta", c.rewards.lambda_delta);
    get_if(r, "beta", c.rewards.beta);
    get_if(r, "mu", c.rewards.mu);
    get_if(r, "v_max", c.rewards.v_max);
    get_if(r, "alpha", c.rewards.alpha);
    get_if(r, "eps", c.rewards.eps);
    get_if(r, "zeta1", c.rewards.zeta1);
    get_if(r, "zeta2", c.rewards.zeta2);
    get_if(r, "delta_max", c.rewards.delta_max);
    get_if(r, "delta_min", c.rewards.delta_min);
    get_if(r, "survival_bonus", c.rewards.survival_bonus);
    get_if(r, "heading_kp", c.rewards.heading_kp);
  }
  if (j.contains("ppo")) {
    const auto& p = j["ppo"];
    get_if(p, "gamma", c.ppo.gamma);
    get_if(p, "gae_lambda", c.ppo.gae_lambda);
    get_if(p, "clip_eps", c.ppo.clip_eps);
    get_if(p, "kl_target", c.ppo.kl_target);
    get_if(p, "learning_rate", c.ppo.learning_rate);
    get_if(p, "batch_size", c.ppo.batch_size);
    get_if(p, "minibatch_size", c.ppo.minibatch_size);
    get_if(p, "epochs", c.ppo.epochs);
    get_if(p, "value_loss_coef", c.ppo.value_loss_coef);
    get_if(p, "entropy_coef", c.ppo.entropy_coef);
    get_if(p, "max_episode_seconds", c.ppo.max_episode_seconds);
  }
  if (j.contains("control")) {
    const auto& ct = j["control"];
    get_if(ct, "low_level_hz", c.control.low_level_hz);
    get_if(ct, "high_level_hz", c.control.high_level_hz);
    get_if(ct, "perception_divisor", c.control.perception_divisor);
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    get_if(t, "n_worlds", c.train.n_worlds);
    get_if(t, "iterations", c.train.iterations);
    get_if(t, "master_seed", c.train.master_seed);
    get_if(t, "actor_hidden", c.train.actor_hidden);
    get_if(t, "critic_hidden", c.train.critic_hidden);
  }
  if (j.contains("eval")) {
    const auto& e = j["eval"];
    get_if(e, "n_trials", c.eval.n_trials);
    get_if(e, "threads", c.eval.threads);
  }
  get_if(j, "goal_landmark_height", c.goal_landmark_height);

  c.validate();
  return c;
}

}  // namespace hierkick
