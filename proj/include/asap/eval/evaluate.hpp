#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "asap/trainer.hpp"

#include <json.hpp>

namespace asap {

enum class EvalTask { Reach, ReachAvoid };

inline const char* to_string(EvalTask t) {
  return t == EvalTask::Reach ? "reach" : "reach_avoid";
}

inline EvalTask eval_task_from_string(const std::string& s) {
  if (s == "reach") return EvalTask::Reach;
  if (s == "reach_avoid") return EvalTask::ReachAvoid;
  throw Error("unknown task: " + s);
}

enum class Outcome { Success, Timeout, Violation, Diverged };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Success: return "success";
    case Outcome::Timeout: return "timeout";
    case Outcome::Violation: return "violation";
    case Outcome::Diverged: return "diverged";
  }
  return "?";
}

struct EvalEpisode {
  std::size_t index = 0;
  Vec s0;
  Outcome outcome = Outcome::Timeout;
  long steps_to_reach = -1;   // -1 unless success
  long violation_time = -1;   // -1 unless violation observed
};

struct EvalReport {
  std::size_t n_points = 0;
  std::size_t tolerance = 0;
  EvalTask task = EvalTask::Reach;
  double success_rate = 0.0;
  double violation_rate = 0.0;
  double mean_steps_to_reach = 0.0;   // over successes
  double median_steps_to_reach = 0.0; // over successes
  std::vector<EvalEpisode> episodes;
};

struct EvalOptions {
  std::size_t n_points = 1000;
  std::size_t tolerance = 30;
  EvalTask task = EvalTask::Reach;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string dump_dir; // when nonempty, per-episode trace CSVs land here
};

/* Success-rate protocol: n uniformly drawn initial points, one deterministic
 * rollout of at most `tolerance` steps each. A rollout succeeds when the
 * target property fires at some t <= tolerance with no earlier obstacle
 * violation; reach_avoid failures are classified violation/timeout/diverged. */
inline EvalReport evaluate(const rl::Agent& policy, const EnvSpec& spec,
                           const stl::Formula& phi_t, const stl::Formula* phi_o,
                           const EvalOptions& opts) {
  if (opts.task == EvalTask::ReachAvoid && phi_o == nullptr)
    throw Error("reach_avoid evaluation needs an obstacle property");
  EvalReport report;
  report.n_points = opts.n_points;
  report.tolerance = opts.tolerance;
  report.task = opts.task;
  report.episodes.resize(opts.n_points);

  // Initial states are drawn sequentially so that per-episode work can be
  // distributed without changing the report.
  Rng eval_stream = make_stream(opts.seed, "eval");
  std::vector<Vec> starts(opts.n_points);
  for (auto& s0 : starts) s0 = sample_initial(spec, eval_stream);

  if (!opts.dump_dir.empty()) std::filesystem::create_directories(opts.dump_dir);

  auto run_range = [&](std::size_t lo, std::size_t hi) {
    Rng rollout_rng = make_stream(opts.seed, "eval-rollout"); // unused by greedy actions
    for (std::size_t i = lo; i < hi; ++i) {
      Env env(spec, opts.seed);
      const stl::Formula* obstacle = opts.task == EvalTask::ReachAvoid ? phi_o : nullptr;
      RolloutResult roll =
          episode_rollout(policy, env, starts[i], opts.tolerance, phi_t, obstacle,
                          rollout_rng);
      EvalEpisode& ep = report.episodes[i];
      ep.index = i;
      ep.s0 = starts[i];
      const bool sat = roll.first_sat != stl::kNever;
      const bool violated = roll.first_violation != stl::kNever;
      if (violated) ep.violation_time = static_cast<long>(roll.first_violation);
      if (sat && (!violated || roll.first_sat < roll.first_violation)) {
        ep.outcome = Outcome::Success;
        ep.steps_to_reach = static_cast<long>(roll.first_sat);
      } else if (violated) {
        ep.outcome = Outcome::Violation;
      } else if (roll.diverged) {
        ep.outcome = Outcome::Diverged;
      } else {
        ep.outcome = Outcome::Timeout;
      }
      if (!opts.dump_dir.empty()) {
        char name[64];
        std::snprintf(name, sizeof(name), "ep_%06zu.csv", i);
        stl::write_trace_csv((std::filesystem::path(opts.dump_dir) / name).string(),
                             roll.trace);
      }
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, opts.jobs);
  if (jobs == 1 || opts.n_points < 2 * jobs) {
    run_range(0, opts.n_points);
  } else {
    std::vector<std::thread> workers;
    const std::size_t chunk = (opts.n_points + jobs - 1) / jobs;
    for (std::size_t w = 0; w < jobs; ++w) {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(opts.n_points, lo + chunk);
      if (lo >= hi) break;
      workers.emplace_back(run_range, lo, hi);
    }
    for (auto& th : workers) th.join();
  }

  std::size_t successes = 0, violations = 0;
  std::vector<double> steps;
  for (const auto& ep : report.episodes) {
    if (ep.outcome == Outcome::Success) {
      ++successes;
      steps.push_back(static_cast<double>(ep.steps_to_reach));
    } else if (ep.outcome == Outcome::Violation) {
      ++violations;
    }
  }
  report.success_rate = opts.n_points ? static_cast<double>(successes) / opts.n_points : 0.0;
  report.violation_rate = opts.n_points ? static_cast<double>(violations) / opts.n_points : 0.0;
  if (!steps.empty()) {
    double sum = 0.0;
    for (double v : steps) sum += v;
    report.mean_steps_to_reach = sum / static_cast<double>(steps.size());
    std::sort(steps.begin(), steps.end());
    const std::size_t n = steps.size();
    report.median_steps_to_reach =
        n % 2 == 1 ? steps[n / 2] : 0.5 * (steps[n / 2 - 1] + steps[n / 2]);
  }
  return report;
}

inline void write_eval_csv(std::ostream& os, const EvalReport& report) {
  os << "episode,outcome,steps_to_reach,violation_time";
  const std::size_t dim = report.episodes.empty() ? 0 : report.episodes.front().s0.size();
  for (std::size_t j = 0; j < dim; ++j) os << ",s0_x" << j;
  os << "\n";
  char buf[64];
  for (const auto& ep : report.episodes) {
    os << ep.index << "," << to_string(ep.outcome) << "," << ep.steps_to_reach << ","
       << ep.violation_time;
    for (double v : ep.s0) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      os << "," << buf;
    }
    os << "\n";
  }
}

inline nlohmann::json eval_summary_json(const EvalReport& report) {
  std::size_t timeouts = 0, diverged = 0, violations = 0, successes = 0;
  for (const auto& ep : report.episodes) {
    switch (ep.outcome) {
      case Outcome::Success: ++successes; break;
      case Outcome::Timeout: ++timeouts; break;
      case Outcome::Violation: ++violations; break;
      case Outcome::Diverged: ++diverged; break;
    }
  }
  return nlohmann::json{{"n_points", report.n_points},
                        {"tolerance", report.tolerance},
                        {"task", to_string(report.task)},
                        {"success_rate", report.success_rate},
                        {"violation_rate", report.violation_rate},
                        {"mean_steps_to_reach", report.mean_steps_to_reach},
                        {"median_steps_to_reach", report.median_steps_to_reach},
                        {"successes", successes},
                        {"timeouts", timeouts},
                        {"violations", violations},
                        {"diverged", diverged}};
}

} // namespace asap
