#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hierkick/mlp.hpp"
#include "hierkick/observation.hpp"

namespace hierkick {

// Actor/critic parameters plus the learnable per-dimension action log-std.
// Action bounds are the tanh-squash range: increment bounds for hierarchical
// variants, the absolute command envelope for the End-to-End baseline.
struct PolicyParams {
  Mlp actor;
  Mlp critic;
  VectorXd log_std;
  VectorXd action_lo;
  VectorXd action_hi;
  AblationVariant variant{AblationVariant::Full};

  int action_dim() const { return static_cast<int>(log_std.size()); }

  // Hard floor at 1% of each half-range, against premature collapse.
  VectorXd std_floor() const { return 0.005 * (action_hi - action_lo); }

  VectorXd std_dev() const {
    return log_std.array().exp().matrix().cwiseMax(std_floor());
  }

  void validate() const {
    if (actor.output_dim() != action_dim() || critic.output_dim() != 1 ||
        action_lo.size() != action_dim() || action_hi.size() != action_dim())
      throw std::invalid_argument("policy: inconsistent parameter shapes");
    for (const auto& w : actor.W)
      if (!w.allFinite()) throw std::invalid_argument("policy: non-finite actor");
    for (const auto& w : critic.W)
      if (!w.allFinite()) throw std::invalid_argument("policy: non-finite critic");
  }
};

// Fixed diagonal input normalization, folded into the forward pass. Positions
// and distances are ~5 m scale; increments ~0.2, so the c_prev slot is blown
// up for hierarchical variants but left raw for absolute commands.
inline VectorXd obs_scale(AblationVariant variant) {
  VectorXd s(kObsDim);
  s << 0.2, 0.2, 0.2, 0.2, 0.2, 0.2, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0;
  if (variant == AblationVariant::Full ||
      variant == AblationVariant::NoDistances) {
    s[9] = s[10] = s[11] = 5.0;
  }
  return s;
}

inline PolicyParams make_policy(const std::vector<int>& actor_hidden,
                                const std::vector<int>& critic_hidden,
                                AblationVariant variant, Rng& rng) {
  std::vector<int> actor_sizes{kObsDim};
  std::vector<int> critic_sizes{kObsDim};
  for (int h : actor_hidden) actor_sizes.push_back(h);
  for (int h : critic_hidden) critic_sizes.push_back(h);
  actor_sizes.push_back(kActionDim);
  critic_sizes.push_back(1);

  PolicyParams p;
  p.variant = variant;
  p.actor = Mlp::make(actor_sizes, rng, 0.01);
  p.critic = Mlp::make(critic_sizes, rng, 1.0);
  if (variant == AblationVariant::EndToEnd) {
    p.action_lo = kCommandLo;
    p.action_hi = kCommandHi;
  } else {
    p.action_lo = -kIncrementBound;
    p.action_hi = kIncrementBound;
  }
  // Initial exploration std: half of each half-range.
  p.log_std = (0.25 * (p.action_hi - p.action_lo)).array().log().matrix();
  return p;
}

// Squash the raw network output into [lo, hi] per dimension.
inline VectorXd squash_mean(const VectorXd& raw, const VectorXd& lo,
                            const VectorXd& hi) {
  VectorXd m(raw.size());
  for (int i = 0; i < raw.size(); ++i)
    m[i] = lo[i] + (hi[i] - lo[i]) * 0.5 * (std::tanh(raw[i]) + 1.0);
  return m;
}

struct ActorOut {
  VectorXd mean;
  VectorXd std;
};

// Deterministic forward pass: scaled obs -> MLP (ELU) -> tanh-squashed mean.
inline ActorOut actor_forward(const HighLevelObs& obs, const PolicyParams& p,
                              Mlp::Cache* cache = nullptr) {
  const VectorXd x = obs.flat().cwiseProduct(obs_scale(p.variant));
  const VectorXd raw = p.actor.forward(x, cache);
  return {squash_mean(raw, p.action_lo, p.action_hi), p.std_dev()};
}

inline double critic_value(const HighLevelObs& obs, const PolicyParams& p,
                           Mlp::Cache* cache = nullptr) {
  const VectorXd x = obs.flat().cwiseProduct(obs_scale(p.variant));
  return p.critic.forward(x, cache)[0];
}

inline double gaussian_logprob(const VectorXd& u, const VectorXd& mean,
                               const VectorXd& std) {
  double lp = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    const double z = (u[i] - mean[i]) / std[i];
    lp += -0.5 * z * z - std::log(std[i]) - 0.5 * std::log(2.0 * M_PI);
  }
  return lp;
}

inline double gaussian_entropy(const VectorXd& std) {
  double h = 0.0;
  for (int i = 0; i < std.size(); ++i)
    h += std::log(std[i]) + 0.5 * std::log(2.0 * M_PI) + 0.5;
  return h;
}

struct SampledAction {
  VectorXd raw;      // the Gaussian draw; log_prob refers to this
  VectorXd clamped;  // raw clamped to [lo, hi]; what the world sees
  double log_prob{0.0};
};

inline SampledAction sample_action(const ActorOut& out, const VectorXd& lo,
                                   const VectorXd& hi, Rng& rng) {
  SampledAction a;
  a.raw.resize(out.mean.size());
  for (int i = 0; i < out.mean.size(); ++i)
    a.raw[i] = out.mean[i] + out.std[i] * rng.normal();
  a.log_prob = gaussian_logprob(a.raw, out.mean, out.std);
  a.clamped = a.raw.cwiseMin(hi).cwiseMax(lo);
  return a;
}

inline VelocityIncrement sample_increment(const ActorOut& out, Rng& rng,
                                          SampledAction* record = nullptr) {
  SampledAction a = sample_action(out, -kIncrementBound, kIncrementBound, rng);
  if (record) *record = a;
  return {a.clamped[0], a.clamped[1], a.clamped[2]};
}

// End-to-End baseline head: same network shape, absolute command output.
inline VelocityCommand end_to_end_forward(const HighLevelObs& obs,
                                          const PolicyParams& p) {
  const ActorOut out = actor_forward(obs, p);
  return {out.mean[0], out.mean[1], out.mean[2]};
}

// ---------------------------------------------------------------------------
// Checkpoint container: "HKPB", u32 version, u32 variant, u32 tensor count,
// then per tensor u32 rows, u32 cols, rows*cols little-endian f64 row-major.
// Tensor order: actor W0,b0,...,Wn,bn; critic likewise; log_std (1 x act_dim).
// ---------------------------------------------------------------------------

namespace detail {

inline void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

inline std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

inline void write_tensor(std::ostream& os, const MatrixXd& m) {
  write_u32(os, static_cast<std::uint32_t>(m.rows()));
  write_u32(os, static_cast<std::uint32_t>(m.cols()));
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      os.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
}

inline MatrixXd read_tensor(std::istream& is) {
  const std::uint32_t rows = read_u32(is);
  const std::uint32_t cols = read_u32(is);
  MatrixXd m(rows, cols);
  for (std::uint32_t i = 0; i < rows; ++i)
    for (std::uint32_t j = 0; j < cols; ++j) {
      double v = 0.0;
      is.read(reinterpret_cast<char*>(&v), sizeof(v));
      if (!is) throw std::runtime_error("checkpoint: truncated tensor");
      m(i, j) = v;
    }
  return m;
}

}  // namespace detail

inline constexpr char kCheckpointMagic[4] = {'H', 'K', 'P', 'B'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void save_policy(const PolicyParams& p, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path);
  os.write(kCheckpointMagic, 4);
  detail::write_u32(os, kCheckpointVersion);
  detail::write_u32(os, static_cast<std::uint32_t>(p.variant));
  const std::uint32_t count =
      2 * (p.actor.num_layers() + p.critic.num_layers()) + 1;
  detail::write_u32(os, count);
  auto write_net = [&](const Mlp& net) {
    for (int l = 0; l < net.num_layers(); ++l) {
      detail::write_tensor(os, net.W[l]);
      detail::write_tensor(os, MatrixXd(net.b[l].transpose()));
    }
  };
  write_net(p.actor);
  write_net(p.critic);
  detail::write_tensor(os, MatrixXd(p.log_std.transpose()));
  if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

inline PolicyParams load_policy(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw std::runtime_error("checkpoint: bad magic: " + path);
  if (detail::read_u32(is) != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version: " + path);
  const auto variant = static_cast<AblationVariant>(detail::read_u32(is));
  const std::uint32_t count = detail::read_u32(is);
  std::vector<MatrixXd> tensors;
  tensors.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i)
    tensors.push_back(detail::read_tensor(is));
  if (count < 5 || count % 2 == 0)
    throw std::runtime_error("checkpoint: bad tensor count: " + path);

  // Actor tensors run until a weight with a 1-row bias would break the
  // alternating W/b pattern; recover the split by matching dimensions.
  PolicyParams p;
  p.variant = variant;
  std::size_t k = 0;
  auto read_net = [&](Mlp& net, int out_dim) {
    while (k + 1 < tensors.size()) {
      net.W.push_back(tensors[k]);
      net.b.push_back(tensors[k + 1].row(0).transpose());
      k += 2;
      if (net.W.back().rows() == out_dim) break;
    }
    if (net.W.empty() || net.W.back().rows() != out_dim)
      throw std::runtime_error("checkpoint: layer shapes inconsistent");
  };
  read_net(p.actor, kActionDim);
  read_net(p.critic, 1);
  if (k + 1 != tensors.size())
    throw std::runtime_error("checkpoint: trailing tensors");
  p.log_std = tensors.back().row(0).transpose();
  if (variant == AblationVariant::EndToEnd) {
    p.action_lo = kCommandLo;
    p.action_hi = kCommandHi;
  } else {
    p.action_lo = -kIncrementBound;
    p.action_hi = kIncrementBound;
  }
  p.validate();
  return p;
}

}  // namespace hierkick
