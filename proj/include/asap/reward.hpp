#pragma once

#include <optional>
#include <string>

#include "asap/env/ball.hpp"
#include "asap/stl/semantics.hpp"

namespace asap {

enum class RewardMode { Asap, SparseRho, DenseRho, FiniteDenseRho, Distance };

inline const char* to_string(RewardMode m) {
  switch (m) {
    case RewardMode::Asap: return "asap";
    case RewardMode::SparseRho: return "sparse_rho";
    case RewardMode::DenseRho: return "dense_rho";
    case RewardMode::FiniteDenseRho: return "finite_dense_rho";
    case RewardMode::Distance: return "distance";
  }
  return "?";
}

inline RewardMode reward_mode_from_string(const std::string& s) {
  if (s == "asap") return RewardMode::Asap;
  if (s == "sparse_rho") return RewardMode::SparseRho;
  if (s == "dense_rho") return RewardMode::DenseRho;
  if (s == "finite_dense_rho") return RewardMode::FiniteDenseRho;
  if (s == "distance") return RewardMode::Distance;
  throw Error("unknown reward mode: " + s);
}

/* Constant paid from the first satisfying step on. Any value strictly above
 * rho_max + (rho_max - rho_min) * k_max preserves the return ordering
 * between earlier- and later-satisfying traces; margin supplies the strict
 * slack. */
inline double choose_r_sat(double rho_min, double rho_max, int k_max, double margin) {
  if (!(rho_min < rho_max)) throw Error("choose_r_sat requires rho_min < rho_max");
  if (k_max <= 0) throw Error("choose_r_sat requires k_max >= 1");
  if (!(margin > 0.0)) throw Error("choose_r_sat requires margin > 0");
  return rho_max + (rho_max - rho_min) * static_cast<double>(k_max) + margin;
}

/* Piece-wise reward: robustness while the trace does not yet satisfy the
 * formula at t, the large constant r_sat once it does. Satisfaction is
 * Boolean with window clamping, so the reward is total on bounded traces. */
inline double reward_asap(const stl::Trace& tr, std::size_t t, const stl::Formula& phi,
                          double r_sat) {
  if (stl::boolean_sat(tr, t, phi)) return r_sat;
  return stl::robustness(tr, t, phi);
}

/* Zero everywhere except the end of the episode, where the whole-trace
 * robustness at time 0 is paid out. */
inline double reward_sparse_rho(const stl::Trace& tr, std::size_t t, const stl::Formula& phi,
                                bool episode_end) {
  if (tr.empty() || t > tr.last_index()) throw Error("time index past trace end");
  if (!episode_end) return 0.0;
  return stl::robustness(tr, 0, phi);
}

/* Robustness of the prefix s_0..s_t evaluated at time 0. */
inline double reward_dense_rho(const stl::Trace& tr, std::size_t t, const stl::Formula& phi) {
  return stl::robustness(tr.slice(0, t), 0, phi);
}

/* Robustness of the window holding the most recent d states ending at t,
 * evaluated at the window's own time 0. */
inline double reward_finite_dense_rho(const stl::Trace& tr, std::size_t t,
                                      const stl::Formula& phi, int d) {
  if (d <= 0) throw Error("finite dense window d must be positive");
  const std::size_t lo = t + 1 >= static_cast<std::size_t>(d) ? t + 1 - static_cast<std::size_t>(d) : 0;
  return stl::robustness(tr.slice(lo, t), 0, phi);
}

/* Heuristic baseline: -lambda_T * d_T + lambda_O * d_O + r_base with
 * d = max(0, ||s - c|| - r); the obstacle term is dropped when there is no
 * unsafe set. */
inline double reward_distance(const stl::State& s, const Ball& target,
                              const std::optional<Ball>& unsafe, double lambda_t,
                              double lambda_o, double r_base) {
  const double d_t = std::max(0.0, dist_to_ball(s, target));
  double r = -lambda_t * d_t + r_base;
  if (unsafe) r += lambda_o * std::max(0.0, dist_to_ball(s, *unsafe));
  return r;
}

/* Reward configuration shared by trainer and CLI. */
struct RewardSpec {
  RewardMode mode = RewardMode::Asap;
  stl::FormulaPtr phi_t;
  double r_sat = 0.0;
  double rho_min = -1.0;
  double rho_max = 1.0;
  int k_max = 1;
  int window_d = 1;      // finite_dense_rho only
  double lambda_t = 1.0; // distance mode
  double lambda_o = 0.0;
  double r_base = 0.0;

  void validate() const {
    if (!(rho_min < rho_max)) throw Error("reward spec requires rho_min < rho_max");
    if (k_max <= 0) throw Error("reward spec requires k_max >= 1");
    if (mode == RewardMode::FiniteDenseRho && window_d <= 0)
      throw Error("finite dense window d must be positive");
    if (mode == RewardMode::Asap &&
        !(r_sat > rho_max + (rho_max - rho_min) * static_cast<double>(k_max)))
      throw Error("asap reward requires r_sat > rho_max + (rho_max - rho_min) * k_max");
    if (mode == RewardMode::Distance) {
      if (lambda_t < 0.0 || lambda_o < 0.0)
        throw Error("distance reward requires lambda_T, lambda_O >= 0");
    }
  }
};

} // namespace asap
