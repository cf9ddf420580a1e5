#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "asap/errors.hpp"
#include "asap/reward.hpp"
#include "asap/rng.hpp"
#include "asap/stl/parser.hpp"

namespace asap::tabular {

inline constexpr std::size_t kNeverSat = static_cast<std::size_t>(-1);

/* Finite MDP with a per-state robustness score and a satisfying-state
 * predicate. Rewards follow the piecewise rule: r_sat at satisfying states,
 * rho[s] elsewhere. */
struct TabularMdp {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  /* trans[s][a] = sparse row of (next state, probability). */
  std::vector<std::vector<std::vector<std::pair<std::size_t, double>>>> trans;
  std::vector<char> satisfying;
  std::vector<double> rho;

  void validate() const {
    if (n_states == 0 || n_actions == 0) throw Error("mdp must have states and actions");
    if (trans.size() != n_states || satisfying.size() != n_states || rho.size() != n_states)
      throw Error("mdp table sizes do not match state count");
    for (std::size_t s = 0; s < n_states; ++s) {
      if (trans[s].size() != n_actions) throw Error("mdp row missing actions");
      for (std::size_t a = 0; a < n_actions; ++a) {
        double total = 0.0;
        for (const auto& [next, p] : trans[s][a]) {
          if (next >= n_states) throw Error("mdp transition target out of range");
          if (p < 0.0) throw Error("mdp probabilities must be nonnegative");
          total += p;
        }
        if (std::abs(total - 1.0) > 1e-12)
          throw Error("mdp transition row does not sum to 1");
      }
    }
  }

  double reward(std::size_t s, double r_sat) const {
    return satisfying[s] ? r_sat : rho[s];
  }
};

struct ViResult {
  std::vector<double> values;       // V(s) after the final sweep
  std::vector<double> q;            // Q(s, a) row-major [s * n_actions + a]
  std::vector<std::size_t> greedy;  // argmax action, ties to lowest index

  /* One-hot matrix form for the ordering checker. */
  std::vector<std::vector<double>> policy_matrix(std::size_t n_actions) const {
    std::vector<std::vector<double>> pi(greedy.size(), std::vector<double>(n_actions, 0.0));
    for (std::size_t s = 0; s < greedy.size(); ++s) pi[s][greedy[s]] = 1.0;
    return pi;
  }
};

/* Exact finite-horizon value iteration:
 *   V_0 = 0,  V_{h+1}(s) = r(s) + gamma * max_a sum_s' P(s'|s,a) V_h(s').
 * `iterations` Bellman sweeps; the greedy policy comes from the last sweep. */
inline ViResult value_iteration(const TabularMdp& mdp, double r_sat, double gamma,
                                std::size_t iterations) {
  mdp.validate();
  if (!(gamma > 0.0 && gamma < 1.0)) throw Error("gamma must lie in (0, 1)");
  ViResult out;
  out.values.assign(mdp.n_states, 0.0);
  out.q.assign(mdp.n_states * mdp.n_actions, 0.0);
  out.greedy.assign(mdp.n_states, 0);
  std::vector<double> next(mdp.n_states, 0.0);
  for (std::size_t it = 0; it < iterations; ++it) {
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      std::size_t best_a = 0;
      for (std::size_t a = 0; a < mdp.n_actions; ++a) {
        double exp_v = 0.0;
        for (const auto& [sn, p] : mdp.trans[s][a]) exp_v += p * out.values[sn];
        const double q = mdp.reward(s, r_sat) + gamma * exp_v;
        out.q[s * mdp.n_actions + a] = q;
        if (q > best) {
          best = q;
          best_a = a;
        }
      }
      next[s] = best;
      out.greedy[s] = best_a;
    }
    out.values.swap(next);
  }
  return out;
}

/* First satisfying index along a state sequence, or kNeverSat. */
inline std::size_t trace_first_sat(const TabularMdp& mdp, const std::vector<std::size_t>& states) {
  for (std::size_t t = 0; t < states.size(); ++t)
    if (mdp.satisfying[states[t]]) return t;
  return kNeverSat;
}

struct TracePath {
  std::vector<std::size_t> states;
  double prob = 1.0;
  std::size_t t_sat = kNeverSat;
};

struct OrderingViolation {
  std::size_t s0 = 0;
  TracePath earlier; // satisfies sooner but is not strictly more probable
  TracePath later;
};

struct OrderingResult {
  bool pass = true;
  std::optional<OrderingViolation> violation;
  std::size_t traces_enumerated = 0;
  std::size_t pairs_checked = 0;
};

/* Enumerates every positive-probability trace of `horizon` transitions from
 * each initial state under the (possibly stochastic) policy, then requires
 * each earlier-satisfying trace to be strictly more probable than every
 * later-satisfying one. Probabilities within `tol` count as equal, which is
 * a violation unless the first-satisfaction times agree. */
inline OrderingResult check_asap_ordering(const TabularMdp& mdp,
                                          const std::vector<std::vector<double>>& policy,
                                          std::size_t horizon, double tol = 1e-12,
                                          std::size_t max_traces = 2'000'000) {
  mdp.validate();
  if (policy.size() != mdp.n_states) throw Error("policy rows do not match state count");
  for (const auto& row : policy) {
    if (row.size() != mdp.n_actions) throw Error("policy columns do not match action count");
    double total = 0.0;
    for (double p : row) {
      if (p < 0.0) throw Error("policy probabilities must be nonnegative");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error("policy row does not sum to 1");
  }

  /* Marginal step kernel under the policy. */
  std::vector<std::vector<std::pair<std::size_t, double>>> step(mdp.n_states);
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    std::vector<double> dense(mdp.n_states, 0.0);
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      if (policy[s][a] == 0.0) continue;
      for (const auto& [sn, p] : mdp.trans[s][a]) dense[sn] += policy[s][a] * p;
    }
    for (std::size_t sn = 0; sn < mdp.n_states; ++sn)
      if (dense[sn] > 0.0) step[s].emplace_back(sn, dense[sn]);
  }

  OrderingResult result;
  for (std::size_t s0 = 0; s0 < mdp.n_states; ++s0) {
    std::vector<TracePath> paths;
    TracePath seed;
    seed.states = {s0};
    std::vector<TracePath> frontier{seed};
    for (std::size_t t = 0; t < horizon; ++t) {
      std::vector<TracePath> grown;
      for (const auto& path : frontier) {
        for (const auto& [sn, p] : step[path.states.back()]) {
          TracePath ext = path;
          ext.states.push_back(sn);
          ext.prob *= p;
          grown.push_back(std::move(ext));
        }
        if (grown.size() > max_traces)
          throw Error("state space too large for exhaustive trace enumeration");
      }
      frontier.swap(grown);
    }
    paths = std::move(frontier);
    for (auto& path : paths) path.t_sat = trace_first_sat(mdp, path.states);
    result.traces_enumerated += paths.size();

    std::sort(paths.begin(), paths.end(), [](const TracePath& a, const TracePath& b) {
      return a.t_sat < b.t_sat;
    });
    /* For each earlier-satisfaction class, every member must beat the most
     * probable trace of every later class by more than tol. */
    std::vector<double> suffix_max(paths.size() + 1, -1.0);
    std::vector<std::size_t> suffix_arg(paths.size() + 1, 0);
    for (std::size_t i = paths.size(); i-- > 0;) {
      suffix_max[i] = suffix_max[i + 1];
      suffix_arg[i] = suffix_arg[i + 1];
      if (paths[i].prob > suffix_max[i]) {
        suffix_max[i] = paths[i].prob;
        suffix_arg[i] = i;
      }
    }
    for (std::size_t i = 0; i < paths.size(); ++i) {
      std::size_t j = i + 1;
      while (j < paths.size() && paths[j].t_sat == paths[i].t_sat) ++j;
      if (j == paths.size()) break;
      ++result.pairs_checked;
      if (suffix_max[j] >= paths[i].prob - tol) {
        result.pass = false;
        result.violation = OrderingViolation{s0, paths[i], paths[suffix_arg[j]]};
        return result;
      }
    }
  }
  return result;
}

/* Seeded generator for the verification suite: deterministic transitions,
 * one or two absorbing satisfying states, per-state scores in
 * [rho_min, rho_max]. Deterministic dynamics keep the trace distribution of
 * a deterministic policy enumerable (nature cannot reorder probabilities). */
inline TabularMdp random_small_mdp(Rng& rng, std::size_t max_states = 12,
                                   std::size_t max_actions = 3, double rho_min = -1.0,
                                   double rho_max = 1.0) {
  TabularMdp mdp;
  mdp.n_states = static_cast<std::size_t>(rng.uniform_int(3, static_cast<std::int64_t>(max_states)));
  mdp.n_actions = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(max_actions)));
  mdp.satisfying.assign(mdp.n_states, 0);
  const std::size_t n_sat = static_cast<std::size_t>(rng.uniform_int(1, 2));
  for (std::size_t i = 0; i < n_sat; ++i)
    mdp.satisfying[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(mdp.n_states) - 1))] = 1;
  mdp.rho.resize(mdp.n_states);
  for (std::size_t s = 0; s < mdp.n_states; ++s)
    mdp.rho[s] = rng.uniform(rho_min, rho_max < 0.0 ? rho_max : std::min(0.0, rho_max));
  mdp.trans.assign(mdp.n_states, {});
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    mdp.trans[s].assign(mdp.n_actions, {});
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      if (mdp.satisfying[s]) {
        mdp.trans[s][a] = {{s, 1.0}}; // absorbing once satisfying
      } else {
        const auto target = static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<std::int64_t>(mdp.n_states) - 1));
        mdp.trans[s][a] = {{target, 1.0}};
      }
    }
  }
  return mdp;
}

/* Fixed two-path fixture: from state 0, action 0 satisfies at t = 1, action
 * 1 at t = 3. States: 0 start, 1 fast target, 2-3 slow corridor, 4 slow
 * target; targets absorb. */
inline TabularMdp two_path_mdp() {
  TabularMdp mdp;
  mdp.n_states = 5;
  mdp.n_actions = 2;
  mdp.satisfying = {0, 1, 0, 0, 1};
  mdp.rho = {-0.5, 0.5, -0.8, -0.6, 0.5};
  mdp.trans.assign(5, std::vector<std::vector<std::pair<std::size_t, double>>>(2));
  auto dirac = [](std::size_t s) {
    return std::vector<std::pair<std::size_t, double>>{{s, 1.0}};
  };
  mdp.trans[0][0] = dirac(1);
  mdp.trans[0][1] = dirac(2);
  mdp.trans[1][0] = mdp.trans[1][1] = dirac(1);
  mdp.trans[2][0] = mdp.trans[2][1] = dirac(3);
  mdp.trans[3][0] = mdp.trans[3][1] = dirac(4);
  mdp.trans[4][0] = mdp.trans[4][1] = dirac(4);
  return mdp;
}

/* Stochastic policy preferring the slow corridor; fails the ordering check
 * with the two-path pair as counterexample. */
inline std::vector<std::vector<double>> anti_asap_policy() {
  std::vector<std::vector<double>> pi(5, {0.5, 0.5});
  pi[0] = {0.1, 0.9};
  return pi;
}

struct SuiteOptions {
  std::size_t n_mdps = 100;
  std::uint64_t seed = 20240817;
  std::vector<double> gammas{0.9, 0.99};
  std::size_t horizon = 5;
  std::size_t vi_iterations = 200;
  double rho_min = -1.0;
  double rho_max = 1.0;
  double margin = 1.0;
  std::size_t max_states = 12;
  std::size_t max_actions = 3;
};

struct SuiteResult {
  bool pass = true;
  std::size_t mdps_checked = 0;
  std::size_t traces_enumerated = 0;
  std::string failure; // human-readable description of the first failure
};

inline std::string describe_path(const TracePath& p) {
  std::string out = "[";
  for (std::size_t i = 0; i < p.states.size(); ++i) {
    if (i) out += " ";
    out += std::to_string(p.states[i]);
  }
  out += "] prob=" + std::to_string(p.prob) +
         " t_sat=" + (p.t_sat == kNeverSat ? std::string("inf") : std::to_string(p.t_sat));
  return out;
}

/* Ordering verification across a family of generated MDPs: exact value
 * iteration under the piecewise reward, greedy policy, exhaustive trace
 * ordering check at every gamma. */
inline SuiteResult run_ordering_suite(const SuiteOptions& opts) {
  SuiteResult result;
  Rng rng(opts.seed);
  const double r_sat = choose_r_sat(opts.rho_min, opts.rho_max,
                                    static_cast<int>(opts.horizon), opts.margin);
  for (std::size_t i = 0; i < opts.n_mdps; ++i) {
    const TabularMdp mdp =
        random_small_mdp(rng, opts.max_states, opts.max_actions, opts.rho_min, opts.rho_max);
    for (double gamma : opts.gammas) {
      const ViResult vi = value_iteration(mdp, r_sat, gamma, opts.vi_iterations);
      const OrderingResult check =
          check_asap_ordering(mdp, vi.policy_matrix(mdp.n_actions), opts.horizon);
      result.traces_enumerated += check.traces_enumerated;
      if (!check.pass) {
        result.pass = false;
        result.failure = "mdp " + std::to_string(i) + " gamma " + std::to_string(gamma) +
                         ": s0=" + std::to_string(check.violation->s0) + " earlier " +
                         describe_path(check.violation->earlier) + " vs later " +
                         describe_path(check.violation->later);
        return result;
      }
    }
    ++result.mdps_checked;
  }
  return result;
}

struct ReturnOrderingOptions {
  int k_max = 5;
  double rho_min = -1.0;
  double rho_max = 1.0;
  double margin = 1.0;
  std::vector<double> gammas{0.9, 0.99};
  std::optional<double> r_sat_override; // bypasses choose_r_sat, tests only
};

struct ReturnOrderingResult {
  bool pass = true;
  std::size_t pairs_checked = 0;
  std::string failure;
};

/* Exhaustive discounted-return comparison over padded trace pairs: both
 * traces share a length k <= k_max; one first satisfies at t_a, the other at
 * t_b > t_a; pre-satisfaction states range over a fixed unsatisfying grid
 * and satisfaction is maintained once reached. The earlier trace must earn
 * the strictly larger discounted return at every gamma. */
inline ReturnOrderingResult check_return_ordering(const ReturnOrderingOptions& opts) {
  ReturnOrderingResult result;
  const stl::FormulaPtr phi = stl::parse_formula("x0 <= 0", 1);
  const double r_sat =
      opts.r_sat_override
          ? *opts.r_sat_override
          : choose_r_sat(opts.rho_min, opts.rho_max, opts.k_max, opts.margin);
  const std::vector<double> unsat_grid{-opts.rho_min, -0.5 * opts.rho_min}; // rho = -x
  const double sat_state = -opts.rho_max;                                   // rho = rho_max

  auto build_trace = [&](int k, int t_first, unsigned prefix_code) {
    std::vector<stl::State> states;
    for (int t = 0; t < k; ++t) {
      if (t < t_first) {
        const double x = unsat_grid[(prefix_code >> t) & 1u];
        states.push_back({x});
      } else {
        states.push_back({sat_state});
      }
    }
    return stl::Trace(states);
  };
  auto discounted_return = [&](const stl::Trace& tr, double gamma) {
    double total = 0.0, g = 1.0;
    for (std::size_t t = 0; t < tr.size(); ++t, g *= gamma)
      total += g * reward_asap(tr, t, *phi, r_sat);
    return total;
  };

  for (int k = 2; k <= opts.k_max; ++k) {
    for (int t_a = 0; t_a + 1 < k; ++t_a) {
      for (int t_b = t_a + 1; t_b < k; ++t_b) {
        for (unsigned ca = 0; ca < (1u << t_a); ++ca) {
          const stl::Trace early = build_trace(k, t_a, ca);
          for (unsigned cb = 0; cb < (1u << t_b); ++cb) {
            const stl::Trace late = build_trace(k, t_b, cb);
            for (double gamma : opts.gammas) {
              ++result.pairs_checked;
              const double ra = discounted_return(early, gamma);
              const double rb = discounted_return(late, gamma);
              if (!(ra > rb)) {
                result.pass = false;
                result.failure = "k=" + std::to_string(k) + " t_a=" + std::to_string(t_a) +
                                 " t_b=" + std::to_string(t_b) +
                                 " gamma=" + std::to_string(gamma) +
                                 " return_early=" + std::to_string(ra) +
                                 " return_late=" + std::to_string(rb);
                return result;
              }
            }
          }
        }
      }
    }
  }
  return result;
}

} // namespace asap::tabular
