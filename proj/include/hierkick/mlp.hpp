#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hierkick/rng.hpp"

namespace hierkick {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline double elu(double x) { return x > 0.0 ? x : std::expm1(x); }
inline double elu_grad(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

// Dense network with ELU hidden activations and a linear output layer.
// Reverse-mode gradients are hand-rolled; no autodiff dependency.
struct Mlp {
  std::vector<MatrixXd> W;  // W[l]: out x in
  std::vector<VectorXd> b;

  int num_layers() const { return static_cast<int>(W.size()); }
  int input_dim() const { return static_cast<int>(W.front().cols()); }
  int output_dim() const { return static_cast<int>(W.back().rows()); }

  // He-initialized weights; the final layer is scaled by final_gain.
  static Mlp make(const std::vector<int>& sizes, Rng& rng,
                  double final_gain = 1.0) {
    if (sizes.size() < 2)
      throw std::invalid_argument("mlp: need at least input and output sizes");
    Mlp net;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      const int in = sizes[l], out = sizes[l + 1];
      const bool last = l + 2 == sizes.size();
      const double scale =
          std::sqrt(2.0 / in) * (last ? final_gain : 1.0);
      MatrixXd w(out, in);
      for (int i = 0; i < out; ++i)
        for (int j = 0; j < in; ++j) w(i, j) = scale * rng.normal();
      net.W.push_back(std::move(w));
      net.b.push_back(VectorXd::Zero(out));
    }
    return net;
  }

  struct Cache {
    VectorXd input;
    std::vector<VectorXd> pre;   // pre-activation per layer
    std::vector<VectorXd> post;  // activation per layer (post[last] is linear)
  };

  VectorXd forward(const VectorXd& x, Cache* cache = nullptr) const {
    if (x.size() != input_dim())
      throw std::invalid_argument("mlp: input dimension mismatch");
    if (cache) {
      cache->input = x;
      cache->pre.clear();
      cache->post.clear();
    }
    VectorXd h = x;
    for (int l = 0; l < num_layers(); ++l) {
      VectorXd z = W[l] * h + b[l];
      if (l + 1 < num_layers())
        h = z.unaryExpr([](double v) { return elu(v); });
      else
        h = z;
      if (cache) {
        cache->pre.push_back(std::move(z));
        cache->post.push_back(h);
      }
    }
    return h;
  }

  struct Grad {
    std::vector<MatrixXd> dW;
    std::vector<VectorXd> db;

    static Grad zeros_like(const Mlp& net) {
      Grad g;
      for (int l = 0; l < net.num_layers(); ++l) {
        g.dW.push_back(MatrixXd::Zero(net.W[l].rows(), net.W[l].cols()));
        g.db.push_back(VectorXd::Zero(net.b[l].size()));
      }
      return g;
    }

    void add(const Grad& other, double scale = 1.0) {
      for (std::size_t l = 0; l < dW.size(); ++l) {
        dW[l] += scale * other.dW[l];
        db[l] += scale * other.db[l];
      }
    }
  };

  // Accumulates into grad; returns d(loss)/d(input).
  VectorXd backward(const Cache& cache, const VectorXd& d_out,
                    Grad& grad) const {
    VectorXd delta = d_out;
    for (int l = num_layers() - 1; l >= 0; --l) {
      if (l + 1 < num_layers()) {
        const VectorXd& z = cache.pre[l];
        for (int i = 0; i < delta.size(); ++i) delta[i] *= elu_grad(z[i]);
      }
      const VectorXd& in = l == 0 ? cache.input : cache.post[l - 1];
      grad.dW[l] += delta * in.transpose();
      grad.db[l] += delta;
      if (l > 0) delta = W[l].transpose() * delta;
    }
    return W[0].transpose() * delta;
  }
};

// Adam moments for one Mlp plus an extra flat vector (the action log-std).
struct AdamState {
  std::vector<MatrixXd> mW, vW;
  std::vector<VectorXd> mb, vb;
  VectorXd m_extra, v_extra;
  long step{0};

  static AdamState zeros(const Mlp& actor, const Mlp& critic, int extra_dim) {
    AdamState s;
    auto push = [&](const Mlp& net) {
      for (int l = 0; l < net.num_layers(); ++l) {
        s.mW.push_back(MatrixXd::Zero(net.W[l].rows(), net.W[l].cols()));
        s.vW.push_back(MatrixXd::Zero(net.W[l].rows(), net.W[l].cols()));
        s.mb.push_back(VectorXd::Zero(net.b[l].size()));
        s.vb.push_back(VectorXd::Zero(net.b[l].size()));
      }
    };
    push(actor);
    push(critic);
    s.m_extra = VectorXd::Zero(extra_dim);
    s.v_extra = VectorXd::Zero(extra_dim);
    return s;
  }
};

struct AdamConfig {
  double lr{3e-4};
  double beta1{0.9};
  double beta2{0.999};
  double eps{1e-8};
};

namespace detail {

inline void adam_tensor(Eigen::Ref<MatrixXd> param, const MatrixXd& grad,
                        MatrixXd& m, MatrixXd& v, const AdamConfig& cfg,
                        double bc1, double bc2) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
  v = cfg.beta2 * v.array().matrix() +
      (1.0 - cfg.beta2) * grad.array().square().matrix();
  param.array() -= cfg.lr * (m.array() / bc1) /
                   ((v.array() / bc2).sqrt() + cfg.eps);
}

inline void adam_vector(Eigen::Ref<VectorXd> param, const VectorXd& grad,
                        VectorXd& m, VectorXd& v, const AdamConfig& cfg,
                        double bc1, double bc2) {
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
  v = cfg.beta2 * v.array().matrix() +
      (1.0 - cfg.beta2) * grad.array().square().matrix();
  param.array() -= cfg.lr * (m.array() / bc1) /
                   ((v.array() / bc2).sqrt() + cfg.eps);
}

}  // namespace detail

// One Adam step over (actor, critic, extra). Gradients are of the loss to be
// minimized.
inline void adam_step(Mlp& actor, Mlp& critic, VectorXd& extra,
                      const Mlp::Grad& g_actor, const Mlp::Grad& g_critic,
                      const VectorXd& g_extra, AdamState& state,
                      const AdamConfig& cfg) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, state.step);
  const double bc2 = 1.0 - std::pow(cfg.beta2, state.step);
  std::size_t k = 0;
  for (int l = 0; l < actor.num_layers(); ++l, ++k) {
    detail::adam_tensor(actor.W[l], g_actor.dW[l], state.mW[k], state.vW[k],
                        cfg, bc1, bc2);
    detail::adam_vector(actor.b[l], g_actor.db[l], state.mb[k], state.vb[k],
                        cfg, bc1, bc2);
  }
  for (int l = 0; l < critic.num_layers(); ++l, ++k) {
    detail::adam_tensor(critic.W[l], g_critic.dW[l], state.mW[k], state.vW[k],
                        cfg, bc1, bc2);
    detail::adam_vector(critic.b[l], g_critic.db[l], state.mb[k], state.vb[k],
                        cfg, bc1, bc2);
  }
  detail::adam_vector(extra, g_extra, state.m_extra, state.v_extra, cfg, bc1,
                      bc2);
}

}  // namespace hierkick
