#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "asap/env/env.hpp"
#include "asap/reward.hpp"
#include "asap/rl/agent.hpp"
#include "asap/stl/semantics.hpp"

namespace asap {

enum class RewardTiming { Pre, Post };

inline RewardTiming reward_timing_from_string(const std::string& s) {
  if (s == "pre") return RewardTiming::Pre;
  if (s == "post") return RewardTiming::Post;
  throw Error("unknown reward timing: " + s);
}

struct TrainConfig {
  EnvSpec env;
  rl::AgentConfig agent;
  RewardSpec reward;
  int k_min = 30;
  int k_max = 30;
  std::size_t total_samples = 0; // m
  std::uint64_t seed = 0;
  /* Pre: the stored reward is evaluated at s_t on the prefix s_0..s_t before
   * acting. Post: evaluated at s_{t+1} after the step. Sparse rewards are
   * paid on the final transition either way. */
  RewardTiming timing = RewardTiming::Pre;
  /* Per-step updates interleave one gradient step per transition; episode-end
   * mode defers the same number of updates to the episode boundary. */
  bool update_per_step = true;
  std::size_t eval_every = 0; // episodes between progress callbacks, 0 = off
  stl::FormulaPtr phi_o;      // obstacle property; set by the recovery loop

  void validate() const {
    env.validate();
    agent.validate();
    reward.validate();
    if (!reward.phi_t) throw Error("training requires a target formula");
    if (k_min < 1 || k_min > k_max) throw Error("require 1 <= k_min <= k_max");
    const std::size_t need = stl::max_state_index(*reward.phi_t);
    if (need != static_cast<std::size_t>(-1) && need >= env.state_dim)
      throw Error("target formula references components beyond the state dimension");
    if (phi_o) {
      const std::size_t need_o = stl::max_state_index(*phi_o);
      if (need_o != static_cast<std::size_t>(-1) && need_o >= env.state_dim)
        throw Error("obstacle formula references components beyond the state dimension");
    }
  }
};

struct EpisodeRecord {
  std::size_t episode = 0;
  std::size_t steps = 0; // transitions executed
  double episode_return = 0.0;
  double final_rho = 0.0;
  bool reached = false;
  long steps_to_reach = -1;
  bool violated = false;
  bool diverged = false;
  bool truncated = false; // stopped early to land exactly on m samples
};

struct TrainResult {
  rl::Agent agent;
  std::vector<EpisodeRecord> log;
  std::size_t total_samples = 0;   // transitions collected (the m accounting)
  std::size_t gradient_updates = 0;
  std::size_t diverged_episodes = 0;
  bool truncated_final_episode = false;
};

using ProgressCallback = std::function<void(std::size_t episode, const rl::Agent&)>;

namespace detail {

inline bool sat_or_false(const stl::Trace& tr, std::size_t t, const stl::Formula& f) {
  try {
    return stl::boolean_sat(tr, t, f);
  } catch (const HorizonError&) {
    return false;
  }
}

inline double rho_or_nan(const stl::Trace& tr, std::size_t t, const stl::Formula& f) {
  try {
    return stl::robustness(tr, t, f);
  } catch (const HorizonError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

/* Reward for the transition ending the prefix sigma at state index tau.
 * For sparse mode the payout happens only on the episode's last transition. */
inline double step_reward(const RewardSpec& rs, const EnvSpec& env, const stl::Trace& sigma,
                          std::size_t tau, bool episode_end) {
  switch (rs.mode) {
    case RewardMode::Asap:
      return reward_asap(sigma, tau, *rs.phi_t, rs.r_sat);
    case RewardMode::SparseRho:
      return reward_sparse_rho(sigma, tau, *rs.phi_t, episode_end);
    case RewardMode::DenseRho:
      return reward_dense_rho(sigma, tau, *rs.phi_t);
    case RewardMode::FiniteDenseRho:
      return reward_finite_dense_rho(sigma, tau, *rs.phi_t, rs.window_d);
    case RewardMode::Distance:
      return reward_distance(sigma[tau], env.target, env.unsafe, rs.lambda_t, rs.lambda_o,
                             rs.r_base);
  }
  throw Error("unreachable reward mode");
}

} // namespace detail

/* Core training loop. Episodes draw a length k uniformly from
 * {k_min..k_max} and an initial state uniformly from the init box, then run
 * k transitions: reward on the cached prefix, action from the policy (or
 * uniformly random during warmup), one environment step, one replay push,
 * one gradient update. With an obstacle property set, an episode breaks as
 * soon as the prefix stops satisfying it, and the transition that entered
 * the obstacle carries done=true; time running out never sets done. */
inline TrainResult run_training(const TrainConfig& cfg,
                                const ProgressCallback& progress = nullptr) {
  cfg.validate();
  Rng init_stream = make_stream(cfg.seed, "init-sampling");
  Rng agent_stream = make_stream(cfg.seed, "agent");
  std::uint64_t agent_init_seed = cfg.seed ^ hash_stream_name("agent-init");

  Env env(cfg.env, cfg.seed);
  rl::Agent agent(cfg.agent, cfg.env.state_dim,
                  cfg.env.action_low, cfg.env.action_high, agent_init_seed);
  rl::ReplayBuffer buffer(cfg.agent.replay_capacity, cfg.env.state_dim,
                          cfg.env.action_dim);

  TrainResult result{std::move(agent), {}, 0, 0, 0, false};
  rl::Agent& ag = result.agent;
  const bool recovery = cfg.phi_o != nullptr;

  auto maybe_update = [&](std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      if (result.total_samples <= cfg.agent.warmup) continue;
      if (buffer.size() < cfg.agent.batch) continue;
      ag.update(buffer.sample(cfg.agent.batch, agent_stream), agent_stream);
      ++result.gradient_updates;
    }
  };

  std::size_t episode = 0;
  std::size_t zero_sample_streak = 0;
  while (result.total_samples < cfg.total_samples) {
    if (zero_sample_streak > 10'000)
      throw Error("training cannot progress: every recent episode ended before "
                  "collecting a single transition");
    const int k = cfg.k_min == cfg.k_max
                      ? cfg.k_min
                      : static_cast<int>(init_stream.uniform_int(cfg.k_min, cfg.k_max));
    const Vec s0 = sample_initial(cfg.env, init_stream);
    env.reset(s0);
    stl::Trace sigma;
    sigma.push_back(s0);

    EpisodeRecord rec;
    rec.episode = episode;
    std::size_t deferred_updates = 0;

    for (std::size_t t = 0; t <= static_cast<std::size_t>(k); ++t) {
      if (recovery && !detail::sat_or_false(sigma, t, *cfg.phi_o)) {
        rec.violated = true;
        break;
      }
      if (!rec.reached && detail::sat_or_false(sigma, t, *cfg.reward.phi_t)) {
        rec.reached = true;
        rec.steps_to_reach = static_cast<long>(t);
      }
      if (t == static_cast<std::size_t>(k)) break; // k transitions per episode
      if (result.total_samples >= cfg.total_samples) {
        rec.truncated = true;
        result.truncated_final_episode = true;
        break;
      }

      double r = 0.0;
      const bool pre = cfg.timing == RewardTiming::Pre &&
                       cfg.reward.mode != RewardMode::SparseRho;
      if (pre) r = detail::step_reward(cfg.reward, cfg.env, sigma, t, false);

      const Vec s_t = sigma[t];
      Vec action(cfg.env.action_dim);
      if (result.total_samples < cfg.agent.warmup) {
        for (std::size_t i = 0; i < action.size(); ++i)
          action[i] = agent_stream.uniform(cfg.env.action_low[i], cfg.env.action_high[i]);
      } else {
        action = ag.select_action(s_t, /*explore=*/true, agent_stream);
      }

      Vec s_next;
      try {
        s_next = env.step(action);
      } catch (const DivergedError&) {
        rec.diverged = true;
        ++result.diverged_episodes;
        break;
      }
      sigma.push_back(s_next);

      if (!pre)
        r = detail::step_reward(cfg.reward, cfg.env, sigma, t + 1,
                                t + 1 == static_cast<std::size_t>(k));

      if (result.total_samples % 10'000 == 0 && !ag.parameters_finite())
        throw Error("agent parameters became non-finite at sample " +
                    std::to_string(result.total_samples));

      const bool done = recovery && !detail::sat_or_false(sigma, t + 1, *cfg.phi_o);
      if (done && cfg.reward.mode == RewardMode::Asap) {
        // A transition entering the obstacle never pays the satisfied branch;
        // it keeps the plain robustness score instead.
        const std::size_t tau = pre ? t : t + 1;
        r = stl::robustness(sigma, tau, *cfg.reward.phi_t);
      }
      buffer.push({s_t, action, r, s_next, done});
      ++result.total_samples;
      rec.episode_return += r;
      ++rec.steps;

      if (cfg.update_per_step)
        maybe_update(1);
      else
        ++deferred_updates;
    }
    maybe_update(deferred_updates);

    rec.final_rho = detail::rho_or_nan(sigma, 0, *cfg.reward.phi_t);
    zero_sample_streak = rec.steps == 0 ? zero_sample_streak + 1 : 0;
    result.log.push_back(rec);
    ++episode;
    if (progress && cfg.eval_every != 0 && episode % cfg.eval_every == 0)
      progress(episode, ag);
  }
  return result;
}

/* Reach training: no obstacle property. */
inline TrainResult train_asap_phi(const TrainConfig& cfg,
                                  const ProgressCallback& progress = nullptr) {
  TrainConfig c = cfg;
  c.phi_o = nullptr;
  return run_training(c, progress);
}

/* Reach/avoid training: rewards target phi_t only; violating phi_o breaks
 * the episode before any reward or update at that step. */
inline TrainResult train_recovery(const TrainConfig& cfg, stl::FormulaPtr phi_t,
                                  stl::FormulaPtr phi_o,
                                  const ProgressCallback& progress = nullptr) {
  TrainConfig c = cfg;
  c.reward.phi_t = std::move(phi_t);
  c.phi_o = std::move(phi_o); // an absent obstacle degrades to plain reach
  return run_training(c, progress);
}

struct RolloutResult {
  stl::Trace trace;
  std::size_t first_sat = stl::kNever;       // against phi_t, prefix semantics
  std::size_t first_violation = stl::kNever; // against phi_o
  bool diverged = false;
};

/* Evaluation rollout: deterministic policy, no learning. The trace is
 * truncated at (and includes) the first violating state. */
inline RolloutResult episode_rollout(const rl::Agent& policy, Env& env, const Vec& s0,
                                     std::size_t max_len, const stl::Formula& phi_t,
                                     const stl::Formula* phi_o, Rng& rng) {
  RolloutResult out;
  env.reset(s0, /*force=*/true);
  out.trace.push_back(s0);
  for (std::size_t t = 0;; ++t) {
    if (phi_o && out.first_violation == stl::kNever &&
        !detail::sat_or_false(out.trace, t, *phi_o))
      out.first_violation = t;
    if (out.first_sat == stl::kNever && detail::sat_or_false(out.trace, t, phi_t))
      out.first_sat = t;
    if (out.first_violation != stl::kNever) break; // terminated on obstacle
    if (t == max_len) break;
    Vec action = policy.select_action(out.trace[t], /*explore=*/false, rng);
    try {
      out.trace.push_back(env.step(action));
    } catch (const DivergedError&) {
      out.diverged = true;
      break;
    }
  }
  return out;
}

/* Training log CSV, one row per episode. */
inline void write_train_log_csv(std::ostream& os, const std::vector<EpisodeRecord>& log) {
  os << "episode,steps,return,final_rho,reached,steps_to_reach,violated\n";
  char buf[64];
  for (const auto& rec : log) {
    os << rec.episode << "," << rec.steps << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", rec.episode_return);
    os << buf << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", rec.final_rho);
    os << buf << "," << (rec.reached ? 1 : 0) << "," << rec.steps_to_reach << ","
       << (rec.violated ? 1 : 0) << "\n";
  }
}

} // namespace asap
