#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "hierkick/config.hpp"
#include "hierkick/episode.hpp"
#include "hierkick/policy.hpp"

namespace hierkick {

struct EpisodeStat {
  double reward{0.0};
  int steps{0};
  Termination reason{Termination::None};
};

// World-major transition storage: index(w, t) = w * steps_per_world + t.
// Assembly is keyed by world index, so the batch content is independent of
// worker scheduling.
struct TransitionBatch {
  int n_worlds{0};
  int steps_per_world{0};
  std::vector<VectorXd> actor_obs;
  std::vector<VectorXd> critic_obs;
  std::vector<VectorXd> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<double> dones;
  std::vector<double> bootstrap;  // per world, value after its last step
  std::vector<double> advantages;
  std::vector<double> returns;
  std::vector<EpisodeStat> episodes;  // episodes finished inside this batch

  int size() const { return n_worlds * steps_per_world; }
  int index(int w, int t) const { return w * steps_per_world + t; }

  void resize(int worlds, int steps) {
    n_worlds = worlds;
    steps_per_world = steps;
    const int n = size();
    actor_obs.resize(n);
    critic_obs.resize(n);
    actions.resize(n);
    log_probs.assign(n, 0.0);
    rewards.assign(n, 0.0);
    values.assign(n, 0.0);
    dones.assign(n, 0.0);
    bootstrap.assign(worlds, 0.0);
    advantages.assign(n, 0.0);
    returns.assign(n, 0.0);
    episodes.clear();
  }
};

// Standard GAE recursion per world column:
//   delta_t = r_t + gamma * V_{t+1} * (1 - done_t) - V_t
//   A_t     = delta_t + gamma * lambda * (1 - done_t) * A_{t+1}
// with V after the last step taken from the bootstrap slot. Advantages are
// raw here; normalization happens inside the update.
inline void compute_gae(TransitionBatch& batch, const PpoConfig& cfg) {
  if (static_cast<int>(batch.values.size()) != batch.size())
    throw std::invalid_argument("gae: batch length mismatch");
  for (int w = 0; w < batch.n_worlds; ++w) {
    double next_adv = 0.0;
    for (int t = batch.steps_per_world - 1; t >= 0; --t) {
      const int i = batch.index(w, t);
      const double nonterminal = 1.0 - batch.dones[i];
      const double next_value = t + 1 < batch.steps_per_world
                                    ? batch.values[batch.index(w, t + 1)]
                                    : batch.bootstrap[w];
      const double delta = batch.rewards[i] +
                           cfg.gamma * next_value * nonterminal -
                           batch.values[i];
      next_adv = delta + cfg.gamma * cfg.gae_lambda * nonterminal * next_adv;
      batch.advantages[i] = next_adv;
      batch.returns[i] = next_adv + batch.values[i];
    }
  }
}

inline std::vector<double> normalized_advantages(const TransitionBatch& batch) {
  const int n = batch.size();
  double mean = 0.0;
  for (double a : batch.advantages) mean += a;
  mean /= n;
  double var = 0.0;
  for (double a : batch.advantages) var += (a - mean) * (a - mean);
  const double std = std::sqrt(var / n);
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = (batch.advantages[i] - mean) / (std + 1e-8);
  return out;
}

struct LossStats {
  double total{0.0};
  double pg{0.0};
  double value{0.0};
  double entropy{0.0};
  double kl{0.0};
};

// Clipped-surrogate PPO loss over the given sample indices, with analytic
// gradients accumulated into (g_actor, g_critic, g_log_std).
//   L = -E[min(rho A, clip(rho) A)] + c_v E[(V - R)^2] - c_e H
inline LossStats ppo_loss_and_grad(const PolicyParams& p,
                                   const TransitionBatch& batch,
                                   const std::vector<int>& idx,
                                   const std::vector<double>& adv,
                                   const PpoConfig& cfg, Mlp::Grad& g_actor,
                                   Mlp::Grad& g_critic, VectorXd& g_log_std) {
  const int n = static_cast<int>(idx.size());
  const double inv_n = 1.0 / n;
  const int ad = p.action_dim();
  const VectorXd floor = p.std_floor();
  const VectorXd std_dev = p.std_dev();

  LossStats stats;
  Mlp::Cache cache;
  for (int k = 0; k < n; ++k) {
    const int i = idx[k];
    const VectorXd& u = batch.actions[i];
    const double a_norm = adv[i];

    // Actor forward.
    const VectorXd raw = p.actor.forward(batch.actor_obs[i], &cache);
    VectorXd mean(ad), tanh_raw(ad);
    for (int d = 0; d < ad; ++d) {
      tanh_raw[d] = std::tanh(raw[d]);
      mean[d] = p.action_lo[d] +
                (p.action_hi[d] - p.action_lo[d]) * 0.5 * (tanh_raw[d] + 1.0);
    }
    const double lp_new = gaussian_logprob(u, mean, std_dev);
    const double ratio = std::exp(lp_new - batch.log_probs[i]);
    const double unclipped = ratio * a_norm;
    const double clipped =
        std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps) * a_norm;
    stats.pg += -std::min(unclipped, clipped) * inv_n;
    stats.kl += ((ratio - 1.0) - std::log(ratio)) * inv_n;

    // d(pg)/d(ratio): zero exactly when the clipped branch is strictly
    // selected, which only happens with rho outside the clip interval.
    const double d_ratio = unclipped <= clipped ? -a_norm * inv_n : 0.0;
    const double d_lp = d_ratio * ratio;

    VectorXd d_raw(ad);
    for (int d = 0; d < ad; ++d) {
      const double z = (u[d] - mean[d]) / std_dev[d];
      const double d_mean = d_lp * z / std_dev[d];
      d_raw[d] = d_mean * (p.action_hi[d] - p.action_lo[d]) * 0.5 *
                 (1.0 - tanh_raw[d] * tanh_raw[d]);
      // log-std path: logprob term plus entropy bonus; dead below the floor.
      if (std::exp(p.log_std[d]) > floor[d]) {
        const double d_std = d_lp * (z * z - 1.0) / std_dev[d] -
                             cfg.entropy_coef * inv_n / std_dev[d];
        g_log_std[d] += d_std * std_dev[d];
      }
    }
    p.actor.backward(cache, d_raw, g_actor);

    // Critic.
    const double v = p.critic.forward(batch.critic_obs[i], &cache)[0];
    const double err = v - batch.returns[i];
    stats.value += err * err * inv_n;
    VectorXd dv(1);
    dv[0] = cfg.value_loss_coef * 2.0 * err * inv_n;
    p.critic.backward(cache, dv, g_critic);
  }
  stats.entropy = gaussian_entropy(std_dev);
  stats.total = stats.pg + cfg.value_loss_coef * stats.value -
                cfg.entropy_coef * stats.entropy;
  return stats;
}

struct UpdateStats {
  double pg{0.0};
  double value{0.0};
  double entropy{0.0};
  double kl{0.0};
  int minibatches{0};
  bool early_stopped{false};
};

// 5-epoch minibatch PPO update with Adam and KL early stopping at
// 1.5x kl_target. Mutates params and adam state in place.
inline UpdateStats ppo_update(TransitionBatch& batch, PolicyParams& params,
                              const PpoConfig& cfg, Rng& shuffle_rng,
                              AdamState& adam, const AdamConfig& adam_cfg) {
  compute_gae(batch, cfg);
  const std::vector<double> adv = normalized_advantages(batch);

  std::vector<int> order(batch.size());
  std::iota(order.begin(), order.end(), 0);

  UpdateStats out;
  for (int epoch = 0; epoch < cfg.epochs && !out.early_stopped; ++epoch) {
    // Fisher-Yates with the dedicated update stream.
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
      const int j = static_cast<int>(shuffle_rng.uniform() * (i + 1));
      std::swap(order[i], order[std::min(j, i)]);
    }
    for (int start = 0; start + cfg.minibatch_size <= batch.size();
         start += cfg.minibatch_size) {
      const std::vector<int> idx(order.begin() + start,
                                 order.begin() + start + cfg.minibatch_size);
      Mlp::Grad g_actor = Mlp::Grad::zeros_like(params.actor);
      Mlp::Grad g_critic = Mlp::Grad::zeros_like(params.critic);
      VectorXd g_log_std = VectorXd::Zero(params.action_dim());
      const LossStats stats = ppo_loss_and_grad(params, batch, idx, adv, cfg,
                                                g_actor, g_critic, g_log_std);
      if (!std::isfinite(stats.total)) {
        std::ostringstream msg;
        msg << "ppo_update: non-finite loss (pg=" << stats.pg
            << " value=" << stats.value << " entropy=" << stats.entropy << ")";
        throw std::runtime_error(msg.str());
      }
      adam_step(params.actor, params.critic, params.log_std, g_actor, g_critic,
                g_log_std, adam, adam_cfg);
      out.pg = stats.pg;
      out.value = stats.value;
      out.entropy = stats.entropy;
      out.kl = stats.kl;
      ++out.minibatches;
      if (stats.kl > 1.5 * cfg.kl_target) {
        out.early_stopped = true;
        break;
      }
    }
  }
  return out;
}

// Steps every world batch_size / n_worlds decisions under a shared read-only
// parameter snapshot. Worlds are distributed over threads; results land in
// per-world slots so the batch is schedule-independent.
inline TransitionBatch collect_rollouts(std::vector<EpisodeRunner>& worlds,
                                        const PolicyParams& params,
                                        const PpoConfig& cfg,
                                        int threads = 0) {
  const int n_worlds = static_cast<int>(worlds.size());
  if (n_worlds < 1) throw std::invalid_argument("collect: need n_worlds >= 1");
  if (cfg.batch_size % n_worlds != 0)
    throw std::invalid_argument("collect: n_worlds must divide batch_size");
  const int steps = cfg.batch_size / n_worlds;

  TransitionBatch batch;
  batch.resize(n_worlds, steps);
  std::vector<std::vector<EpisodeStat>> per_world_eps(n_worlds);

  auto run_world = [&](int w) {
    Transition tr;
    for (int t = 0; t < steps; ++t) {
      const bool finished = worlds[w].step(params, /*stochastic=*/true, tr);
      const int i = batch.index(w, t);
      batch.actor_obs[i] = tr.actor_obs;
      batch.critic_obs[i] = tr.critic_obs;
      batch.actions[i] = tr.action;
      batch.log_probs[i] = tr.log_prob;
      batch.rewards[i] = tr.reward;
      batch.values[i] = tr.value;
      batch.dones[i] = tr.done;
      if (finished)
        per_world_eps[w].push_back(
            {tr.episode_reward, tr.episode_steps, tr.reason});
    }
    batch.bootstrap[w] = worlds[w].bootstrap_value(params);
  };

  int n_threads = threads > 0 ? threads
                              : static_cast<int>(
                                    std::thread::hardware_concurrency());
  n_threads = std::clamp(n_threads, 1, n_worlds);
  if (n_threads == 1) {
    for (int w = 0; w < n_worlds; ++w) run_world(w);
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < n_threads; ++k)
      pool.emplace_back([&, k] {
        for (int w = k; w < n_worlds; w += n_threads) run_world(w);
      });
    for (auto& th : pool) th.join();
  }
  for (int w = 0; w < n_worlds; ++w)
    for (const auto& e : per_world_eps[w]) batch.episodes.push_back(e);
  return batch;
}

// Full training loop for one variant: rollouts, GAE, PPO updates, and a
// line-delimited metrics log.
class Trainer {
 public:
  Trainer(const Config& cfg, AblationVariant variant)
      : cfg_(cfg),
        variant_(variant),
        update_rng_(mix_seed(cfg.train.master_seed, 0xF00D)) {
    Rng init_rng(mix_seed(cfg_.train.master_seed, 0x1217));
    params_ = make_policy(cfg_.train.actor_hidden, cfg_.train.critic_hidden,
                          variant_, init_rng);
    adam_ = AdamState::zeros(params_.actor, params_.critic, kActionDim);
    adam_cfg_.lr = cfg_.ppo.learning_rate;
    worlds_.reserve(cfg_.train.n_worlds);
    for (int w = 0; w < cfg_.train.n_worlds; ++w)
      worlds_.emplace_back(cfg_, variant_,
                           mix_seed(cfg_.train.master_seed, w + 1));
  }

  const PolicyParams& params() const { return params_; }

  void train(int iterations, const std::string& out_dir,
             bool verbose = false) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const std::string name = variant_name(variant_);
    std::ofstream metrics(fs::path(out_dir) /
                          (name + std::string("_metrics.jsonl")));
    double last_reward = 0.0, last_success = 0.0;
    for (int iter = 0; iter < iterations; ++iter) {
      TransitionBatch batch = collect_rollouts(worlds_, params_, cfg_.ppo);
      const UpdateStats stats =
          ppo_update(batch, params_, cfg_.ppo, update_rng_, adam_, adam_cfg_);

      int goals = 0;
      double ep_reward = 0.0, ep_len = 0.0;
      for (const auto& e : batch.episodes) {
        if (e.reason == Termination::Goal) ++goals;
        ep_reward += e.reward;
        ep_len += e.steps;
      }
      const int n_eps = static_cast<int>(batch.episodes.size());
      if (n_eps > 0) {
        last_reward = ep_reward / n_eps;
        last_success = static_cast<double>(goals) / n_eps;
      }
      nlohmann::json rec{{"iteration", iter},
                         {"mean_episode_reward", last_reward},
                         {"success_rate", last_success},
                         {"episodes", n_eps},
                         {"mean_episode_steps", n_eps ? ep_len / n_eps : 0.0},
                         {"kl", stats.kl},
                         {"pg_loss", stats.pg},
                         {"value_loss", stats.value},
                         {"entropy", stats.entropy}};
      metrics << rec.dump() << "\n";
      if (verbose && iter % 25 == 0)
        std::fprintf(stderr, "[%s] iter %d reward %.3f success %.3f kl %.4f\n",
                     name.c_str(), iter, last_reward, last_success, stats.kl);
    }
    metrics.flush();
    save_policy(params_, checkpoint_path(out_dir, variant_));
  }

  static std::string checkpoint_path(const std::string& out_dir,
                                     AblationVariant v) {
    return (std::filesystem::path(out_dir) /
            (std::string(variant_name(v)) + ".ckpt"))
        .string();
  }

 private:
  Config cfg_;
  AblationVariant variant_;
  PolicyParams params_;
  AdamState adam_;
  AdamConfig adam_cfg_;
  std::vector<EpisodeRunner> worlds_;
  Rng update_rng_;
};

}  // namespace hierkick
