#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "asap/config.hpp"
#include "asap/eval/evaluate.hpp"
#include "asap/eval/tabular.hpp"
#include "asap/nn/checkpoint.hpp"
#include "asap/trainer.hpp"
#include "asap/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kCheckpointMagic = "ASAPCKP1";
constexpr int kExitOk = 0;
constexpr int kExitVerificationFailure = 1;
constexpr int kExitUsage = 2;

std::string hash_hex(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void save_checkpoint(const std::string& path, const asap::rl::Agent& agent,
                     const std::string& config_echo) {
  asap::nn::BinaryWriter w(path);
  w.raw(kCheckpointMagic, 8);
  w.u32(1);
  w.str(config_echo);
  agent.save(w);
}

asap::rl::Agent load_checkpoint(const std::string& path) {
  if (!fs::exists(path)) throw asap::Error("checkpoint not found: " + path);
  asap::nn::BinaryReader r(path);
  char magic[9] = {};
  r.raw(magic, 8);
  if (std::string(magic) != kCheckpointMagic)
    throw asap::Error("not a checkpoint file: " + path);
  if (r.u32() != 1) throw asap::Error("unsupported checkpoint version");
  (void)r.str(); // config echo, informational
  return asap::rl::Agent::load(r);
}

void write_run_meta(const asap::RunConfig& rc, const fs::path& dir,
                    const asap::TrainResult* result) {
  json meta{{"version", asap::kVersionString},
            {"seed", rc.seed},
            {"config_hash", hash_hex(rc.config_hash)}};
  if (result) {
    meta["total_samples"] = result->total_samples;
    meta["gradient_updates"] = result->gradient_updates;
    meta["episodes"] = result->log.size();
    meta["diverged_episodes"] = result->diverged_episodes;
    meta["truncated_final_episode"] = result->truncated_final_episode;
  }
  std::ofstream os(dir / "run_meta.json");
  os << meta.dump(2) << "\n";
}

/* Refuses to reuse an output directory holding a run with a different
 * configuration. */
void check_resume_hash(const asap::RunConfig& rc, const fs::path& dir) {
  const fs::path meta_path = dir / "run_meta.json";
  if (!fs::exists(meta_path)) return;
  std::ifstream is(meta_path);
  json meta;
  try {
    is >> meta;
  } catch (const json::exception&) {
    return; // unreadable metadata: treat as fresh
  }
  if (meta.contains("config_hash") &&
      meta["config_hash"].get<std::string>() != hash_hex(rc.config_hash))
    throw asap::ConfigError("output.dir", "directory " + dir.string() +
                                              " holds a run with a different config "
                                              "(refusing to resume)");
}

int cmd_train(const asap::RunConfig& rc) {
  const fs::path dir(rc.out_dir);
  fs::create_directories(dir);
  check_resume_hash(rc, dir);
  {
    std::ofstream echo(dir / "config_echo.ini");
    echo << rc.canonical;
  }

  std::ofstream eval_log;
  asap::ProgressCallback progress;
  if (rc.trainer.eval_every != 0) {
    eval_log.open(dir / "eval_log.csv");
    eval_log << "episode,success_rate,mean_steps_to_reach\n";
    progress = [&](std::size_t episode, const asap::rl::Agent& agent) {
      asap::EvalOptions opts = rc.eval;
      opts.n_points = std::min<std::size_t>(opts.n_points, 100);
      const asap::EvalReport rep = asap::evaluate(
          agent, rc.env, *rc.phi_t, rc.phi_o ? rc.phi_o.get() : nullptr, opts);
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", rep.success_rate);
      eval_log << episode << "," << buf << "," << rep.mean_steps_to_reach << "\n";
    };
  }

  asap::TrainResult result =
      rc.task == asap::EvalTask::ReachAvoid
          ? asap::train_recovery(rc.trainer, rc.phi_t, rc.phi_o, progress)
          : asap::train_asap_phi(rc.trainer, progress);

  {
    std::ofstream log(dir / "train_log.csv");
    asap::write_train_log_csv(log, result.log);
  }
  save_checkpoint((dir / "checkpoint.bin").string(), result.agent, rc.canonical);
  write_run_meta(rc, dir, &result);

  std::size_t reached = 0;
  for (const auto& rec : result.log) reached += rec.reached ? 1 : 0;
  std::cout << "trained " << result.total_samples << " samples over " << result.log.size()
            << " episodes (" << result.gradient_updates << " gradient updates, "
            << reached << " episodes reached the target)\n"
            << "artifacts in " << dir.string() << "\n";
  return kExitOk;
}

int cmd_eval(const std::string& checkpoint, const asap::RunConfig& rc) {
  asap::rl::Agent agent = load_checkpoint(checkpoint);
  if (agent.state_dim() != rc.env.state_dim || agent.action_dim() != rc.env.action_dim)
    throw asap::Error("checkpoint dimensions do not match the configured environment");
  const fs::path dir(rc.out_dir);
  fs::create_directories(dir);
  asap::EvalOptions opts = rc.eval;
  if (!opts.dump_dir.empty()) opts.dump_dir = (dir / "traces").string();
  const asap::EvalReport report = asap::evaluate(
      agent, rc.env, *rc.phi_t, rc.phi_o ? rc.phi_o.get() : nullptr, opts);
  {
    std::ofstream os(dir / "eval_report.csv");
    asap::write_eval_csv(os, report);
  }
  const json summary = asap::eval_summary_json(report);
  {
    std::ofstream os(dir / "eval_summary.json");
    os << summary.dump(2) << "\n";
  }
  std::cout << summary.dump(2) << "\n";
  return kExitOk;
}

int cmd_monitor(const std::string& trace_path, const std::string& formula_text) {
  const asap::stl::Trace trace = asap::stl::read_trace_csv(trace_path);
  const asap::stl::FormulaPtr phi = asap::stl::parse_formula(formula_text, trace.dim());
  std::cout << "t,rho,sat\n";
  char buf[64];
  for (std::size_t t = 0; t <= trace.last_index(); ++t) {
    std::cout << t << ",";
    try {
      const double rho = asap::stl::robustness(trace, t, *phi);
      const bool sat = asap::stl::boolean_sat(trace, t, *phi);
      std::snprintf(buf, sizeof(buf), "%.17g", rho);
      std::cout << buf << "," << (sat ? 1 : 0) << "\n";
    } catch (const asap::HorizonError&) {
      std::cout << "horizon,horizon\n";
    }
  }
  const std::size_t first = asap::stl::first_sat_time(trace, *phi);
  std::cout << "first_sat_time,"
            << (first == asap::stl::kNever ? std::string("inf") : std::to_string(first))
            << "\n";
  return kExitOk;
}

int cmd_verify(std::uint64_t seed, std::size_t count, const std::string& fixture) {
  using namespace asap::tabular;
  if (!fixture.empty()) {
    if (fixture != "anti-asap")
      throw asap::ConfigError("--fixture", "known fixtures: anti-asap");
    const TabularMdp mdp = two_path_mdp();
    const OrderingResult check = check_asap_ordering(mdp, anti_asap_policy(), 3);
    if (!check.pass) {
      std::cout << "anti-asap fixture: ordering violated as expected\n"
                << "  s0=" << check.violation->s0 << "\n"
                << "  earlier " << describe_path(check.violation->earlier) << "\n"
                << "  later   " << describe_path(check.violation->later) << "\n";
      return kExitVerificationFailure;
    }
    std::cout << "anti-asap fixture unexpectedly passed\n";
    return kExitOk;
  }

  SuiteOptions opts;
  opts.seed = seed;
  opts.n_mdps = count;
  const SuiteResult suite = run_ordering_suite(opts);
  std::cout << "ordering suite: " << suite.mdps_checked << "/" << opts.n_mdps
            << " mdps, " << suite.traces_enumerated << " traces enumerated: "
            << (suite.pass ? "pass" : "FAIL") << "\n";
  if (!suite.pass) std::cout << "  counterexample: " << suite.failure << "\n";

  const ReturnOrderingResult ret = check_return_ordering({});
  std::cout << "return ordering: " << ret.pairs_checked
            << " padded trace pairs: " << (ret.pass ? "pass" : "FAIL") << "\n";
  if (!ret.pass) std::cout << "  counterexample: " << ret.failure << "\n";

  return suite.pass && ret.pass ? kExitOk : kExitVerificationFailure;
}

struct BenchRun {
  std::string label;
  std::string config_text;
};

std::string bench_config(const std::string& env_name, const std::string& mode,
                         std::size_t m, std::uint64_t seed, const std::string& extra) {
  std::string ini = "[env]\nname = " + env_name + "\n[agent]\nalgo = sac\nhidden = 64,64\n";
  ini += "[reward]\nmode = " + mode + "\n";
  ini += "[trainer]\nm = " + std::to_string(m) + "\nseed = " + std::to_string(seed) + "\n";
  ini += "[eval]\ntask = reach\nn_points = 1000\n";
  ini += extra;
  return ini;
}

int cmd_bench(const std::string& suite, const std::string& out_root, std::uint64_t seed,
              std::size_t jobs) {
  const std::vector<std::string> known{"smoke", "dc_motor", "bicycle", "attitude"};
  if (std::find(known.begin(), known.end(), suite) == known.end()) {
    std::string list;
    for (const auto& s : known) list += (list.empty() ? "" : ", ") + s;
    throw asap::ConfigError("--suite", "unknown suite '" + suite + "' (known: " + list + ")");
  }

  std::vector<BenchRun> runs;
  std::vector<std::size_t> tolerances;
  if (suite == "smoke") {
    runs.push_back({"asap", bench_config("dc_motor", "asap", 10'000, seed,
                                         "[output]\ndir = unused\n")});
    tolerances = {30};
  } else if (suite == "dc_motor") {
    for (const std::string mode : {"asap", "sparse_rho", "distance"})
      runs.push_back({mode, bench_config("dc_motor", mode, 1'000'000, seed,
                                         "[output]\ndir = unused\n")});
    tolerances = {15, 25, 30};
  } else {
    runs.push_back({"asap", bench_config(suite, "asap", 3'000'000, seed,
                                         "[output]\ndir = unused\n")});
    tolerances = {15, 25, 30};
  }

  const fs::path root = fs::path(out_root) / ("bench_" + suite);
  fs::create_directories(root);
  std::ofstream table(root / "summary.csv");
  table << "suite,mode,tolerance,success_rate,mean_steps_to_reach\n";

  for (const auto& run : runs) {
    const fs::path dir = root / run.label;
    fs::create_directories(dir);
    const fs::path cfg_path = dir / "config.ini";
    {
      std::ofstream os(cfg_path);
      os << run.config_text;
    }
    asap::RunConfig rc =
        asap::RunConfig::from_file(cfg_path.string(), {}, seed, dir.string());
    std::cout << "[bench " << suite << "] training " << run.label << " ("
              << rc.trainer.total_samples << " samples)\n";
    const int rcode = cmd_train(rc);
    if (rcode != kExitOk) return rcode;
    asap::rl::Agent agent = load_checkpoint((dir / "checkpoint.bin").string());
    for (std::size_t tol : tolerances) {
      asap::EvalOptions opts = rc.eval;
      opts.tolerance = tol;
      opts.jobs = jobs;
      const asap::EvalReport report = asap::evaluate(
          agent, rc.env, *rc.phi_t, rc.phi_o ? rc.phi_o.get() : nullptr, opts);
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.6g", report.success_rate);
      table << suite << "," << run.label << "," << tol << "," << buf << ","
            << report.mean_steps_to_reach << "\n";
      std::cout << "[bench " << suite << "] " << run.label << " tolerance " << tol
                << ": success_rate " << buf << "\n";
      const json summary = asap::eval_summary_json(report);
      std::ofstream os(dir / ("eval_tol" + std::to_string(tol) + ".json"));
      os << summary.dump(2) << "\n";
    }
  }
  std::cout << "bench summary written to " << (root / "summary.csv").string() << "\n";
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"STL-guided reward shaping and actor-critic training for "
               "reach / reach-avoid recovery control"};
  app.set_version_flag("--version", asap::kVersionString);
  app.require_subcommand(1);

  std::string config_path, checkpoint_path, out_dir, trace_path, formula_text;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* opt = cmd->add_option("--config", config_path, "run configuration (INI or JSON)");
    if (needs_config) opt->required();
    cmd->add_option("--seed", seed, "master seed override");
    cmd->add_option("--out", out_dir, "output directory override");
    cmd->add_option("--override", overrides, "config override section.key=value")
        ->take_all();
    cmd->add_option("--jobs", jobs, "worker threads for evaluation");
  };

  auto* train = app.add_subcommand("train", "train a policy per the configuration");
  add_common(train, true);

  auto* eval = app.add_subcommand("eval", "evaluate a trained checkpoint");
  eval->add_option("--checkpoint", checkpoint_path, "policy checkpoint")->required();
  add_common(eval, true);

  auto* monitor = app.add_subcommand("monitor", "robustness table for a trace CSV");
  monitor->add_option("--trace", trace_path, "trace CSV file")->required();
  monitor->add_option("--formula", formula_text, "formula text")->required();

  auto* verify = app.add_subcommand("verify", "tabular ordering verification suite");
  std::uint64_t verify_seed = 20240817;
  std::size_t verify_count = 100;
  std::string fixture;
  verify->add_option("--seed", verify_seed, "suite generator seed");
  verify->add_option("--count", verify_count, "number of generated MDPs");
  verify->add_option("--fixture", fixture, "run a named failure fixture (anti-asap)");

  auto* bench = app.add_subcommand("bench", "benchmark suites");
  std::string suite_name, bench_out = "runs";
  std::uint64_t bench_seed = 1;
  bench->add_option("--suite", suite_name, "smoke | dc_motor | bicycle | attitude")
      ->required();
  bench->add_option("--out", bench_out, "output root");
  bench->add_option("--seed", bench_seed, "master seed");
  bench->add_option("--jobs", jobs, "worker threads for evaluation");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      auto rc = asap::RunConfig::from_file(config_path, overrides, seed, out_dir);
      if (jobs > 1) rc.eval.jobs = jobs;
      return cmd_train(rc);
    }
    if (eval->parsed()) {
      auto rc = asap::RunConfig::from_file(config_path, overrides, seed, out_dir);
      if (jobs > 1) rc.eval.jobs = jobs;
      return cmd_eval(checkpoint_path, rc);
    }
    if (monitor->parsed()) return cmd_monitor(trace_path, formula_text);
    if (verify->parsed()) return cmd_verify(verify_seed, verify_count, fixture);
    if (bench->parsed()) return cmd_bench(suite_name, bench_out, bench_seed, jobs);
  } catch (const asap::SyntaxError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const asap::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const asap::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
