#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "asap/nn/adam.hpp"
#include "asap/nn/checkpoint.hpp"
#include "asap/nn/mlp.hpp"
#include "asap/rl/replay.hpp"
#include "asap/rng.hpp"

namespace asap::rl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Algo { Ddpg, Sac, Td3 };

inline const char* to_string(Algo a) {
  switch (a) {
    case Algo::Ddpg: return "ddpg";
    case Algo::Sac: return "sac";
    case Algo::Td3: return "td3";
  }
  return "?";
}

inline Algo algo_from_string(const std::string& s) {
  if (s == "ddpg") return Algo::Ddpg;
  if (s == "sac") return Algo::Sac;
  if (s == "td3") return Algo::Td3;
  throw Error("unknown algorithm: " + s);
}

struct AgentConfig {
  Algo algo = Algo::Sac;
  std::vector<std::size_t> hidden;
  double lr = 3e-4;
  std::size_t batch = 256;
  double gamma = 0.99;
  double tau = 5e-3;
  /* DDPG/TD3 exploration noise as a fraction of the action half-range. */
  double noise_sigma = 0.1;
  /* Fixed per-component observation scale applied before the networks;
   * empty means unscaled. Trainers default it to the initial-box extent. */
  std::vector<double> obs_scale;
  /* SAC entropy temperature: auto-tuned toward -action_dim by default. */
  bool alpha_auto = true;
  double alpha_init = 1.0;
  std::size_t warmup = 1000;
  std::size_t replay_capacity = 1'000'000;
  double td3_policy_noise = 0.2;
  double td3_noise_clip = 0.5;
  std::size_t td3_policy_delay = 2;

  static AgentConfig defaults(Algo algo) {
    AgentConfig c;
    c.algo = algo;
    switch (algo) {
      case Algo::Ddpg:
        c.hidden = {400, 300};
        c.lr = 1e-3;
        c.batch = 100;
        break;
      case Algo::Td3:
        c.hidden = {400, 300};
        c.lr = 3e-4;
        c.batch = 100;
        break;
      case Algo::Sac:
        c.hidden = {256, 256};
        c.lr = 3e-4;
        c.batch = 256;
        break;
    }
    return c;
  }

  void validate() const {
    if (hidden.empty()) throw Error("agent needs at least one hidden layer");
    if (!(gamma > 0.0 && gamma < 1.0)) throw Error("gamma must lie in (0, 1)");
    if (!(tau > 0.0 && tau <= 1.0)) throw Error("tau must lie in (0, 1]");
    if (!(lr > 0.0)) throw Error("learning rate must be positive");
    if (batch == 0 || batch > replay_capacity)
      throw Error("batch size must be in [1, replay capacity]");
  }
};

struct UpdateDiagnostics {
  double critic_loss = 0.0;
  double actor_loss = 0.0;
  double entropy = 0.0; // SAC: -mean log pi; DDPG/TD3: 0
  bool actor_updated = false;
};

/* Off-policy actor-critic agent over continuous actions bounded to a box.
 * Actions are tanh-squashed network outputs rescaled to the box. */
class Agent {
 public:
  Agent(const AgentConfig& cfg, std::size_t state_dim, std::vector<double> action_low,
        std::vector<double> action_high, std::uint64_t seed)
      : cfg_(cfg), state_dim_(state_dim) {
    cfg_.validate();
    if (action_low.size() != action_high.size() || action_low.empty())
      throw DimensionError("mismatched action bounds");
    action_dim_ = action_low.size();
    low_ = Eigen::Map<VectorXd>(action_low.data(), static_cast<Eigen::Index>(action_dim_));
    high_ = Eigen::Map<VectorXd>(action_high.data(), static_cast<Eigen::Index>(action_dim_));
    center_ = 0.5 * (low_ + high_);
    halfrange_ = 0.5 * (high_ - low_);
    for (Eigen::Index i = 0; i < halfrange_.size(); ++i)
      if (!(halfrange_(i) > 0.0)) throw Error("action bounds must have positive width");
    if (cfg_.obs_scale.empty()) {
      inv_obs_scale_ = VectorXd::Ones(static_cast<Eigen::Index>(state_dim_));
    } else {
      if (cfg_.obs_scale.size() != state_dim_)
        throw DimensionError("obs_scale dimension mismatch");
      inv_obs_scale_.resize(static_cast<Eigen::Index>(state_dim_));
      for (std::size_t i = 0; i < state_dim_; ++i) {
        if (!(cfg_.obs_scale[i] > 0.0)) throw Error("obs_scale must be positive");
        inv_obs_scale_(static_cast<Eigen::Index>(i)) = 1.0 / cfg_.obs_scale[i];
      }
    }
    build_networks(seed);
  }

  const AgentConfig& config() const { return cfg_; }
  std::size_t state_dim() const { return state_dim_; }
  std::size_t action_dim() const { return action_dim_; }
  const VectorXd& action_low() const { return low_; }
  const VectorXd& action_high() const { return high_; }
  double alpha() const { return std::exp(log_alpha_); }
  std::size_t update_count() const { return update_count_; }

  const nn::Mlp& actor() const { return actor_; }
  const nn::Mlp& critic1() const { return critic1_; }
  const nn::Mlp& critic2() const { return critic2_; }
  const nn::Mlp& critic1_target() const { return critic1_t_; }
  const nn::Mlp& actor_target() const { return actor_t_; }

  bool parameters_finite() const {
    for (const nn::Mlp* net : {&actor_, &actor_t_, &critic1_, &critic1_t_, &critic2_,
                               &critic2_t_}) {
      for (std::size_t l = 0; l < net->n_layers(); ++l)
        if (!net->weights()[l].allFinite() || !net->biases()[l].allFinite()) return false;
    }
    return std::isfinite(log_alpha_);
  }

  /* Greedy (explore=false) or exploratory action for one state. */
  std::vector<double> select_action(const std::vector<double>& s, bool explore,
                                    Rng& rng) const {
    if (s.size() != state_dim_) throw DimensionError("state dimension mismatch");
    for (double v : s)
      if (!std::isfinite(v)) throw Error("non-finite state passed to policy");
    VectorXd x = Eigen::Map<const VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
    x = x.cwiseProduct(inv_obs_scale_);
    VectorXd a;
    if (cfg_.algo == Algo::Sac) {
      const VectorXd out = actor_.forward_vec(x);
      const VectorXd mean = out.head(static_cast<Eigen::Index>(action_dim_));
      if (explore) {
        VectorXd logstd = out.tail(static_cast<Eigen::Index>(action_dim_));
        for (Eigen::Index i = 0; i < logstd.size(); ++i)
          logstd(i) = std::clamp(logstd(i), kLogStdMin, kLogStdMax);
        VectorXd z(mean.size());
        for (Eigen::Index i = 0; i < z.size(); ++i)
          z(i) = mean(i) + std::exp(logstd(i)) * rng.normal();
        a = center_ + halfrange_.cwiseProduct(z.array().tanh().matrix());
      } else {
        a = center_ + halfrange_.cwiseProduct(mean.array().tanh().matrix());
      }
    } else {
      const VectorXd u = actor_.forward_vec(x); // tanh output activation
      a = center_ + halfrange_.cwiseProduct(u);
      if (explore) {
        for (Eigen::Index i = 0; i < a.size(); ++i)
          a(i) += cfg_.noise_sigma * halfrange_(i) * rng.normal();
      }
    }
    std::vector<double> out(action_dim_);
    for (std::size_t i = 0; i < action_dim_; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      if (!std::isfinite(a(ii))) throw Error("non-finite action from policy network");
      out[i] = std::clamp(a(ii), low_(ii), high_(ii));
    }
    return out;
  }

  UpdateDiagnostics update(const Batch& batch, Rng& rng) {
    if (batch.size() == 0) throw Error("cannot update on an empty batch");
    UpdateDiagnostics diag;
    switch (cfg_.algo) {
      case Algo::Sac:
        diag = update_sac(batch, rng);
        break;
      case Algo::Ddpg:
        diag = update_ddpg(batch);
        break;
      case Algo::Td3:
        diag = update_td3(batch, rng);
        break;
    }
    if (!std::isfinite(diag.critic_loss) || !std::isfinite(diag.actor_loss))
      throw Error("non-finite loss in agent update (critic=" +
                  std::to_string(diag.critic_loss) + ", actor=" +
                  std::to_string(diag.actor_loss) + ")");
    ++update_count_;
    return diag;
  }

  void save(nn::BinaryWriter& w) const {
    w.u8(static_cast<std::uint8_t>(cfg_.algo));
    w.u64(state_dim_);
    w.u64(action_dim_);
    w.vector(low_);
    w.vector(high_);
    w.u64(cfg_.hidden.size());
    for (std::size_t h : cfg_.hidden) w.u64(h);
    w.f64(cfg_.lr);
    w.u64(cfg_.batch);
    w.f64(cfg_.gamma);
    w.f64(cfg_.tau);
    w.f64(cfg_.noise_sigma);
    w.u64(cfg_.obs_scale.size());
    for (double v : cfg_.obs_scale) w.f64(v);
    w.u8(cfg_.alpha_auto ? 1 : 0);
    w.f64(cfg_.alpha_init);
    w.u64(cfg_.warmup);
    w.u64(cfg_.replay_capacity);
    w.f64(cfg_.td3_policy_noise);
    w.f64(cfg_.td3_noise_clip);
    w.u64(cfg_.td3_policy_delay);
    nn::save_mlp(w, actor_);
    nn::save_mlp(w, actor_t_);
    nn::save_mlp(w, critic1_);
    nn::save_mlp(w, critic1_t_);
    nn::save_mlp(w, critic2_);
    nn::save_mlp(w, critic2_t_);
    nn::save_adam(w, actor_opt_);
    nn::save_adam(w, critic1_opt_);
    nn::save_adam(w, critic2_opt_);
    w.f64(log_alpha_);
    w.f64(alpha_opt_.m);
    w.f64(alpha_opt_.v);
    w.i64(alpha_opt_.step);
    w.u64(update_count_);
  }

  static Agent load(nn::BinaryReader& r) {
    AgentConfig cfg;
    cfg.algo = static_cast<Algo>(r.u8());
    const std::size_t state_dim = r.u64();
    const std::size_t action_dim = r.u64();
    const VectorXd low = r.vector();
    const VectorXd high = r.vector();
    if (low.size() != static_cast<Eigen::Index>(action_dim))
      throw Error("corrupt checkpoint: action bounds");
    cfg.hidden.resize(r.u64());
    for (auto& h : cfg.hidden) h = r.u64();
    cfg.lr = r.f64();
    cfg.batch = r.u64();
    cfg.gamma = r.f64();
    cfg.tau = r.f64();
    cfg.noise_sigma = r.f64();
    cfg.obs_scale.resize(r.u64());
    for (auto& v : cfg.obs_scale) v = r.f64();
    cfg.alpha_auto = r.u8() != 0;
    cfg.alpha_init = r.f64();
    cfg.warmup = r.u64();
    cfg.replay_capacity = r.u64();
    cfg.td3_policy_noise = r.f64();
    cfg.td3_noise_clip = r.f64();
    cfg.td3_policy_delay = r.u64();
    Agent agent(cfg, state_dim,
                std::vector<double>(low.data(), low.data() + low.size()),
                std::vector<double>(high.data(), high.data() + high.size()),
                /*seed=*/0);
    agent.actor_ = nn::load_mlp(r);
    agent.actor_t_ = nn::load_mlp(r);
    agent.critic1_ = nn::load_mlp(r);
    agent.critic1_t_ = nn::load_mlp(r);
    agent.critic2_ = nn::load_mlp(r);
    agent.critic2_t_ = nn::load_mlp(r);
    agent.actor_opt_ = nn::load_adam(r);
    agent.critic1_opt_ = nn::load_adam(r);
    agent.critic2_opt_ = nn::load_adam(r);
    agent.log_alpha_ = r.f64();
    agent.alpha_opt_.m = r.f64();
    agent.alpha_opt_.v = r.f64();
    agent.alpha_opt_.step = r.i64();
    agent.update_count_ = r.u64();
    return agent;
  }

 private:
  static constexpr double kLogStdMin = -20.0;
  static constexpr double kLogStdMax = 2.0;
  static constexpr double kSquashEps = 1e-6;

  void build_networks(std::uint64_t seed) {
    std::vector<std::size_t> actor_sizes{state_dim_};
    actor_sizes.insert(actor_sizes.end(), cfg_.hidden.begin(), cfg_.hidden.end());
    actor_sizes.push_back(cfg_.algo == Algo::Sac ? 2 * action_dim_ : action_dim_);
    const auto actor_out =
        cfg_.algo == Algo::Sac ? nn::Activation::Identity : nn::Activation::Tanh;
    std::vector<std::size_t> critic_sizes{state_dim_ + action_dim_};
    critic_sizes.insert(critic_sizes.end(), cfg_.hidden.begin(), cfg_.hidden.end());
    critic_sizes.push_back(1);

    Rng seeder(Rng::splitmix64(seed));
    auto next_seed = [&seeder] { return seeder.next_u64(); };
    actor_ = nn::Mlp(actor_sizes, nn::Activation::Relu, actor_out, next_seed());
    critic1_ = nn::Mlp(critic_sizes, nn::Activation::Relu, nn::Activation::Identity,
                       next_seed());
    critic2_ = nn::Mlp(critic_sizes, nn::Activation::Relu, nn::Activation::Identity,
                       next_seed());
    actor_t_ = actor_;
    critic1_t_ = critic1_;
    critic2_t_ = critic2_;
    actor_opt_ = nn::AdamState(actor_);
    critic1_opt_ = nn::AdamState(critic1_);
    critic2_opt_ = nn::AdamState(critic2_);
    log_alpha_ = std::log(cfg_.alpha_init);
  }

  MatrixXd stack(const MatrixXd& s, const MatrixXd& a) const {
    MatrixXd x(s.rows() + a.rows(), s.cols());
    x.topRows(s.rows()) = s;
    x.bottomRows(a.rows()) = a;
    return x;
  }

  MatrixXd scale_obs(const MatrixXd& s) const {
    return (s.array().colwise() * inv_obs_scale_.array()).matrix();
  }

  /* Critics consume actions in the normalized [-1, 1] box. */
  MatrixXd normalize_actions(const MatrixXd& a) const {
    return ((a.colwise() - center_).array().colwise() / halfrange_.array()).matrix();
  }

  /* Reparameterized squashed-Gaussian sample with its log density. The
   * normalized action is u = tanh(z); the density includes the box scaling
   * jacobian so log_pi refers to the real action. */
  struct SacSample {
    MatrixXd mean, logstd_raw, sigma, eps, u; // all action_dim x B
    Eigen::RowVectorXd log_pi;                // 1 x B
  };

  SacSample sac_sample(const MatrixXd& actor_out, Rng& rng) const {
    const auto m = static_cast<Eigen::Index>(action_dim_);
    const Eigen::Index B = actor_out.cols();
    SacSample out;
    out.mean = actor_out.topRows(m);
    out.logstd_raw = actor_out.bottomRows(m);
    MatrixXd logstd = out.logstd_raw.cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
    out.sigma = logstd.array().exp().matrix();
    out.eps.resize(m, B);
    for (Eigen::Index c = 0; c < B; ++c)
      for (Eigen::Index i = 0; i < m; ++i) out.eps(i, c) = rng.normal();
    MatrixXd z = out.mean + out.sigma.cwiseProduct(out.eps);
    out.u = z.array().tanh().matrix();
    const auto squash =
        (halfrange_.array().replicate(1, B) * (1.0 - out.u.array().square()) + kSquashEps)
            .log();
    const auto gauss = -0.5 * std::log(2.0 * M_PI) - logstd.array() -
                       0.5 * out.eps.array().square();
    out.log_pi = (gauss - squash).colwise().sum();
    return out;
  }

  /* d(min(Q1,Q2))/d(normalized action), discarding critic weight grads. */
  MatrixXd min_q_action_grad(const MatrixXd& s_scaled, const MatrixXd& u,
                             Eigen::RowVectorXd& q_min) {
    const MatrixXd x = stack(s_scaled, u);
    nn::Mlp::Cache c1, c2;
    const Eigen::RowVectorXd q1 = critic1_.forward(x, &c1).row(0);
    const Eigen::RowVectorXd q2 = critic2_.forward(x, &c2).row(0);
    Eigen::RowVectorXd mask1(q1.size());
    for (Eigen::Index i = 0; i < q1.size(); ++i) mask1(i) = q1(i) <= q2(i) ? 1.0 : 0.0;
    q_min = mask1.cwiseProduct(q1) + (Eigen::RowVectorXd::Ones(q1.size()) - mask1).cwiseProduct(q2);
    nn::MlpGrads scratch;
    const MatrixXd g1 = critic1_.backward(c1, mask1, scratch);
    const MatrixXd g2 = critic2_.backward(
        c2, (Eigen::RowVectorXd::Ones(q1.size()) - mask1).eval(), scratch);
    return (g1 + g2).bottomRows(static_cast<Eigen::Index>(action_dim_));
  }

  void critic_regression(nn::Mlp& critic, nn::AdamState& opt, const MatrixXd& input,
                         const Eigen::RowVectorXd& target, double& loss_out) {
    nn::Mlp::Cache cache;
    const Eigen::RowVectorXd q = critic.forward(input, &cache).row(0);
    const Eigen::RowVectorXd diff = q - target;
    loss_out = 0.5 * diff.squaredNorm() / static_cast<double>(diff.size());
    nn::MlpGrads grads;
    critic.backward(cache, diff / static_cast<double>(diff.size()), grads);
    nn::adam_step(critic, grads, opt, cfg_.lr);
  }

  UpdateDiagnostics update_sac(const Batch& batch, Rng& rng) {
    const Eigen::Index B = batch.size();
    const double alpha = std::exp(log_alpha_);
    const MatrixXd s = scale_obs(batch.s);
    const MatrixXd s_next = scale_obs(batch.s_next);

    // Entropy-regularized twin-critic target from a fresh next action.
    const SacSample next = sac_sample(actor_.forward(s_next), rng);
    const MatrixXd xt = stack(s_next, next.u);
    const Eigen::RowVectorXd q1t = critic1_t_.forward(xt).row(0);
    const Eigen::RowVectorXd q2t = critic2_t_.forward(xt).row(0);
    Eigen::RowVectorXd y(B);
    for (Eigen::Index i = 0; i < B; ++i) {
      const double qt = std::min(q1t(i), q2t(i)) - alpha * next.log_pi(i);
      y(i) = batch.r(i) + cfg_.gamma * (1.0 - batch.done(i)) * qt;
    }

    UpdateDiagnostics diag;
    const MatrixXd x = stack(s, normalize_actions(batch.a));
    double l1 = 0.0, l2 = 0.0;
    critic_regression(critic1_, critic1_opt_, x, y, l1);
    critic_regression(critic2_, critic2_opt_, x, y, l2);
    diag.critic_loss = 0.5 * (l1 + l2);

    // Actor: minimize alpha * log pi - min Q through the reparameterized sample.
    nn::Mlp::Cache actor_cache;
    const MatrixXd actor_out = actor_.forward(s, &actor_cache);
    const SacSample cur = sac_sample(actor_out, rng);
    Eigen::RowVectorXd q_min(B);
    const MatrixXd dq_du = min_q_action_grad(s, cur.u, q_min);
    diag.actor_loss =
        (alpha * cur.log_pi.array() - q_min.array()).sum() / static_cast<double>(B);
    diag.entropy = -cur.log_pi.sum() / static_cast<double>(B);

    const auto m = static_cast<Eigen::Index>(action_dim_);
    const double invB = 1.0 / static_cast<double>(B);
    const auto one_minus_u2 = (1.0 - cur.u.array().square());
    const auto h = halfrange_.array().replicate(1, B);
    const auto w = h * one_minus_u2 / (h * one_minus_u2 + kSquashEps);
    const auto dlogpi_dz = 2.0 * cur.u.array() * w;
    const auto dq_dz = dq_du.array() * one_minus_u2;
    MatrixXd upstream(2 * m, B);
    upstream.topRows(m) = (invB * (alpha * dlogpi_dz - dq_dz)).matrix();
    const auto sig_eps = cur.sigma.array() * cur.eps.array();
    MatrixXd g_logstd =
        (invB * (alpha * (dlogpi_dz * sig_eps - 1.0) - dq_dz * sig_eps)).matrix();
    for (Eigen::Index c = 0; c < B; ++c)
      for (Eigen::Index i = 0; i < m; ++i)
        if (cur.logstd_raw(i, c) <= kLogStdMin || cur.logstd_raw(i, c) >= kLogStdMax)
          g_logstd(i, c) = 0.0;
    upstream.bottomRows(m) = g_logstd;
    nn::MlpGrads actor_grads;
    actor_.backward(actor_cache, upstream, actor_grads);
    nn::adam_step(actor_, actor_grads, actor_opt_, cfg_.lr);
    diag.actor_updated = true;

    if (cfg_.alpha_auto) {
      const double target_entropy = -static_cast<double>(action_dim_);
      const double grad = -(cur.log_pi.sum() * invB + target_entropy);
      log_alpha_ = alpha_opt_.update(log_alpha_, grad, cfg_.lr);
    }

    nn::soft_update(critic1_t_, critic1_, cfg_.tau);
    nn::soft_update(critic2_t_, critic2_, cfg_.tau);
    return diag;
  }

  UpdateDiagnostics update_ddpg(const Batch& batch) {
    const Eigen::Index B = batch.size();
    const MatrixXd s = scale_obs(batch.s);
    const MatrixXd s_next = scale_obs(batch.s_next);
    const MatrixXd next_u = actor_t_.forward(s_next); // tanh output
    const Eigen::RowVectorXd qt = critic1_t_.forward(stack(s_next, next_u)).row(0);
    Eigen::RowVectorXd y(B);
    for (Eigen::Index i = 0; i < B; ++i)
      y(i) = batch.r(i) + cfg_.gamma * (1.0 - batch.done(i)) * qt(i);

    UpdateDiagnostics diag;
    critic_regression(critic1_, critic1_opt_, stack(s, normalize_actions(batch.a)), y,
                      diag.critic_loss);

    // Actor ascends Q(s, mu(s)).
    nn::Mlp::Cache actor_cache;
    const MatrixXd u = actor_.forward(s, &actor_cache);
    nn::Mlp::Cache critic_cache;
    const Eigen::RowVectorXd q = critic1_.forward(stack(s, u), &critic_cache).row(0);
    diag.actor_loss = -q.sum() / static_cast<double>(B);
    nn::MlpGrads scratch;
    const MatrixXd dq_dx = critic1_.backward(
        critic_cache, Eigen::RowVectorXd::Ones(B), scratch);
    const MatrixXd dq_du = dq_dx.bottomRows(static_cast<Eigen::Index>(action_dim_));
    const double invB = 1.0 / static_cast<double>(B);
    const MatrixXd upstream = (-invB * dq_du.array()).matrix();
    nn::MlpGrads actor_grads;
    actor_.backward(actor_cache, upstream, actor_grads);
    nn::adam_step(actor_, actor_grads, actor_opt_, cfg_.lr);
    diag.actor_updated = true;

    nn::soft_update(critic1_t_, critic1_, cfg_.tau);
    nn::soft_update(actor_t_, actor_, cfg_.tau);
    return diag;
  }

  UpdateDiagnostics update_td3(const Batch& batch, Rng& rng) {
    const Eigen::Index B = batch.size();
    const auto m = static_cast<Eigen::Index>(action_dim_);
    const MatrixXd s = scale_obs(batch.s);
    const MatrixXd s_next = scale_obs(batch.s_next);
    // Target policy smoothing in the normalized action box.
    MatrixXd next_u = actor_t_.forward(s_next);
    for (Eigen::Index c = 0; c < B; ++c)
      for (Eigen::Index i = 0; i < m; ++i) {
        const double noise = std::clamp(cfg_.td3_policy_noise * rng.normal(),
                                        -cfg_.td3_noise_clip, cfg_.td3_noise_clip);
        next_u(i, c) = std::clamp(next_u(i, c) + noise, -1.0, 1.0);
      }
    const MatrixXd xt = stack(s_next, next_u);
    const Eigen::RowVectorXd q1t = critic1_t_.forward(xt).row(0);
    const Eigen::RowVectorXd q2t = critic2_t_.forward(xt).row(0);
    Eigen::RowVectorXd y(B);
    for (Eigen::Index i = 0; i < B; ++i)
      y(i) = batch.r(i) +
             cfg_.gamma * (1.0 - batch.done(i)) * std::min(q1t(i), q2t(i));

    UpdateDiagnostics diag;
    const MatrixXd x = stack(s, normalize_actions(batch.a));
    double l1 = 0.0, l2 = 0.0;
    critic_regression(critic1_, critic1_opt_, x, y, l1);
    critic_regression(critic2_, critic2_opt_, x, y, l2);
    diag.critic_loss = 0.5 * (l1 + l2);

    if ((update_count_ + 1) % cfg_.td3_policy_delay == 0) {
      nn::Mlp::Cache actor_cache;
      const MatrixXd u = actor_.forward(s, &actor_cache);
      nn::Mlp::Cache critic_cache;
      const Eigen::RowVectorXd q = critic1_.forward(stack(s, u), &critic_cache).row(0);
      diag.actor_loss = -q.sum() / static_cast<double>(B);
      nn::MlpGrads scratch;
      const MatrixXd dq_dx =
          critic1_.backward(critic_cache, Eigen::RowVectorXd::Ones(B), scratch);
      const MatrixXd dq_du = dq_dx.bottomRows(m);
      const double invB = 1.0 / static_cast<double>(B);
      const MatrixXd upstream = (-invB * dq_du.array()).matrix();
      nn::MlpGrads actor_grads;
      actor_.backward(actor_cache, upstream, actor_grads);
      nn::adam_step(actor_, actor_grads, actor_opt_, cfg_.lr);
      diag.actor_updated = true;
      nn::soft_update(critic1_t_, critic1_, cfg_.tau);
      nn::soft_update(critic2_t_, critic2_, cfg_.tau);
      nn::soft_update(actor_t_, actor_, cfg_.tau);
    }
    return diag;
  }

  AgentConfig cfg_;
  std::size_t state_dim_ = 0, action_dim_ = 0;
  VectorXd low_, high_, center_, halfrange_;
  VectorXd inv_obs_scale_;
  nn::Mlp actor_, actor_t_, critic1_, critic1_t_, critic2_, critic2_t_;
  nn::AdamState actor_opt_, critic1_opt_, critic2_opt_;
  double log_alpha_ = 0.0;
  nn::ScalarAdam alpha_opt_;
  std::size_t update_count_ = 0;
};

} // namespace asap::rl
