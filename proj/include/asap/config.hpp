#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "asap/eval/evaluate.hpp"
#include "asap/stl/parser.hpp"
#include "asap/trainer.hpp"

#include <json.hpp>

namespace asap {

/* Flat section/key/value store shared by the INI and JSON front ends. Typed
 * getters track consumption so unknown keys can be rejected wholesale. */
class ConfigStore {
 public:
  void set(const std::string& section, const std::string& key, const std::string& value) {
    raw_[section][key] = value;
  }

  bool has(const std::string& section, const std::string& key) const {
    auto sec = raw_.find(section);
    return sec != raw_.end() && sec->second.count(key) > 0;
  }

  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback) {
    consumed_.insert(section + "." + key);
    auto sec = raw_.find(section);
    if (sec == raw_.end()) return fallback;
    auto it = sec->second.find(key);
    return it == sec->second.end() ? fallback : it->second;
  }

  double get_double(const std::string& section, const std::string& key, double fallback) {
    const std::string s = get_string(section, key, "");
    if (s.empty()) return fallback;
    return parse_double(section + "." + key, s);
  }

  std::int64_t get_int(const std::string& section, const std::string& key,
                       std::int64_t fallback) {
    const std::string s = get_string(section, key, "");
    if (s.empty()) return fallback;
    try {
      std::size_t used = 0;
      const std::int64_t v = std::stoll(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(section + "." + key, "expected an integer, got '" + s + "'");
    }
  }

  bool get_bool(const std::string& section, const std::string& key, bool fallback) {
    const std::string s = get_string(section, key, "");
    if (s.empty()) return fallback;
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(section + "." + key, "expected a boolean, got '" + s + "'");
  }

  std::vector<double> get_doubles(const std::string& section, const std::string& key,
                                  const std::vector<double>& fallback) {
    const std::string s = get_string(section, key, "");
    if (s.empty()) return fallback;
    std::vector<double> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(parse_double(section + "." + key, cell));
    if (out.empty()) throw ConfigError(section + "." + key, "expected a number list");
    return out;
  }

  std::vector<std::size_t> get_sizes(const std::string& section, const std::string& key,
                                     const std::vector<std::size_t>& fallback) {
    const std::string s = get_string(section, key, "");
    if (s.empty()) return fallback;
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      const double v = parse_double(section + "." + key, cell);
      if (v < 0 || v != std::floor(v))
        throw ConfigError(section + "." + key, "expected nonnegative integers");
      out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw ConfigError(section + "." + key, "expected an integer list");
    return out;
  }

  /* Every stored key must have been consumed by a getter. */
  void reject_unknown_keys() const {
    for (const auto& [section, keys] : raw_)
      for (const auto& [key, value] : keys)
        if (consumed_.count(section + "." + key) == 0)
          throw ConfigError(section + "." + key, "unknown key");
  }

  /* Canonical dump: sorted sections and keys; the reproducibility echo. */
  std::string canonical_dump() const {
    std::string out;
    for (const auto& [section, keys] : raw_) {
      out += "[" + section + "]\n";
      for (const auto& [key, value] : keys) out += key + " = " + value + "\n";
    }
    return out;
  }

  std::uint64_t hash() const { return hash_stream_name(canonical_dump()); }

  static ConfigStore from_ini(std::istream& is) {
    ConfigStore store;
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      const std::string trimmed = trim(strip_comment(line));
      if (trimmed.empty()) continue;
      if (trimmed.front() == '[') {
        if (trimmed.back() != ']')
          throw ConfigError("line " + std::to_string(lineno), "unterminated section header");
        section = trim(trimmed.substr(1, trimmed.size() - 2));
        if (section.empty())
          throw ConfigError("line " + std::to_string(lineno), "empty section name");
        continue;
      }
      const std::size_t eq = trimmed.find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(lineno), "expected key = value");
      const std::string key = trim(trimmed.substr(0, eq));
      const std::string value = trim(trimmed.substr(eq + 1));
      if (section.empty())
        throw ConfigError(key, "key appears before any [section]");
      if (key.empty()) throw ConfigError("line " + std::to_string(lineno), "empty key");
      store.set(section, key, value);
    }
    return store;
  }

  static ConfigStore from_json(std::istream& is) {
    nlohmann::json doc;
    try {
      is >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("<json>", e.what());
    }
    if (!doc.is_object()) throw ConfigError("<json>", "top level must be an object");
    ConfigStore store;
    for (const auto& [section, body] : doc.items()) {
      if (!body.is_object())
        throw ConfigError(section, "section must be an object of keys");
      for (const auto& [key, value] : body.items())
        store.set(section, key, scalar_to_string(section + "." + key, value));
    }
    return store;
  }

  static ConfigStore from_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(path, "cannot open config file");
    if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0)
      return from_json(is);
    /* Sniff: JSON configs may come without the extension. */
    const int c = is.peek();
    if (c == '{') return from_json(is);
    return from_ini(is);
  }

  /* "section.key=value" from a --override flag. */
  void apply_override(const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos)
      throw ConfigError(assignment, "override must look like section.key=value");
    const std::string path = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    const std::size_t dot = path.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == path.size())
      throw ConfigError(path, "override key must be section.key");
    set(path.substr(0, dot), path.substr(dot + 1), value);
  }

 private:
  static std::string strip_comment(const std::string& s) {
    for (std::size_t i = 0; i < s.size(); ++i)
      if (s[i] == '#' || s[i] == ';') return s.substr(0, i);
    return s;
  }
  static std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
  }
  double parse_double(const std::string& keypath, const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != trim(s).size() && used != s.size())
        throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(keypath, "expected a number, got '" + s + "'");
    }
  }
  static std::string scalar_to_string(const std::string& keypath, const nlohmann::json& v) {
    char buf[64];
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number()) {
      std::snprintf(buf, sizeof(buf), "%.17g", v.get<double>());
      return buf;
    }
    if (v.is_array()) {
      std::string out;
      for (const auto& item : v) {
        if (!out.empty()) out += ",";
        out += scalar_to_string(keypath, item);
      }
      return out;
    }
    throw ConfigError(keypath, "unsupported value type");
  }

  std::map<std::string, std::map<std::string, std::string>> raw_;
  std::set<std::string> consumed_;
};

/* Fully parsed run configuration: every module's invariants are revalidated
 * here so a bad file fails before any work starts. */
struct RunConfig {
  EnvSpec env;
  rl::AgentConfig agent;
  RewardSpec reward;
  TrainConfig trainer;
  EvalOptions eval;
  EvalTask task = EvalTask::Reach;
  stl::FormulaPtr phi_t, phi_o;
  std::string out_dir;
  std::uint64_t seed = 1;
  std::string canonical;     // canonical config echo
  std::uint64_t config_hash = 0;

  static RunConfig from_store(ConfigStore store);
  static RunConfig from_file(const std::string& path,
                             const std::vector<std::string>& overrides = {},
                             std::optional<std::uint64_t> seed_override = {},
                             const std::string& out_override = "");
};

namespace detail {

struct BenchmarkDefaults {
  double rho_min, rho_max;
  std::size_t total_samples;
  std::vector<double> obs_scale; // fixed input scaling over operating ranges
};

inline BenchmarkDefaults benchmark_defaults(const std::string& name) {
  if (name == "dc_motor") return {-6.0, 0.5, 1'000'000, {3.2, 6.0, 12.0}};
  if (name == "bicycle") return {-5.0, 0.8, 3'000'000, {4.0, 4.0, 3.2, 3.0}};
  if (name == "attitude") return {-4.0, 0.8, 3'000'000, {2.0, 2.0, 2.0, 2.0, 2.0, 2.0}};
  throw Error("unknown environment: " + name);
}

inline std::string dist_to_center(const std::vector<double>& center) {
  std::string out = "dist(";
  for (std::size_t i = 0; i < center.size(); ++i) {
    if (i) out += ",";
    out += "x" + std::to_string(i);
  }
  out += ";";
  char buf[64];
  for (std::size_t i = 0; i < center.size(); ++i) {
    if (i) out += ",";
    std::snprintf(buf, sizeof(buf), "%.17g", center[i]);
    out += buf;
  }
  return out + ")";
}

/* Default target property in the benchmark house style:
 * F[0,w](Euclid(target) <= r_t). */
inline std::string default_phi_t(const EnvSpec& env, int window) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", env.target.radius);
  return "F[0," + std::to_string(window) + "](" + dist_to_center(env.target.center) +
         " <= " + buf + ")";
}

/* Default obstacle property: Euclid(unsafe) >= r_u at the current step. */
inline std::string default_phi_o(const EnvSpec& env) {
  if (!env.unsafe) throw Error("no unsafe ball configured for this environment");
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", env.unsafe->radius);
  return dist_to_center(env.unsafe->center) + " >= " + std::string(buf);
}

} // namespace detail

inline RunConfig RunConfig::from_store(ConfigStore store) {
  RunConfig rc;

  const std::string env_name = store.get_string("env", "name", "");
  if (env_name.empty()) throw ConfigError("env.name", "required (dc_motor|bicycle|attitude)");
  rc.env = builtin_env_spec(env_name);
  rc.env.integrator =
      integrator_from_string(store.get_string("env", "integrator", "rk4"));
  rc.env.dt = store.get_double("env", "dt", rc.env.dt);
  rc.env.state_bound = store.get_double("env", "state_bound", rc.env.state_bound);
  rc.env.init_low = store.get_doubles("env", "init_low", rc.env.init_low);
  rc.env.init_high = store.get_doubles("env", "init_high", rc.env.init_high);
  rc.env.action_low = store.get_doubles("env", "action_low", rc.env.action_low);
  rc.env.action_high = store.get_doubles("env", "action_high", rc.env.action_high);
  rc.env.target.center = store.get_doubles("env", "target_center", rc.env.target.center);
  rc.env.target.radius = store.get_double("env", "target_radius", rc.env.target.radius);
  if (store.has("env", "unsafe_center") || store.has("env", "unsafe_radius")) {
    Ball unsafe;
    unsafe.center = store.get_doubles("env", "unsafe_center",
                                      rc.env.unsafe ? rc.env.unsafe->center
                                                    : std::vector<double>{});
    unsafe.radius =
        store.get_double("env", "unsafe_radius", rc.env.unsafe ? rc.env.unsafe->radius : 0.0);
    rc.env.unsafe = unsafe;
  }
  if (!store.get_bool("env", "unsafe", true)) rc.env.unsafe.reset();
  rc.env.validate();

  const auto defaults = detail::benchmark_defaults(env_name);

  rc.agent = rl::AgentConfig::defaults(
      rl::algo_from_string(store.get_string("agent", "algo", "sac")));
  rc.agent.obs_scale = store.get_doubles("agent", "obs_scale", defaults.obs_scale);
  rc.agent.hidden = store.get_sizes("agent", "hidden", rc.agent.hidden);
  rc.agent.lr = store.get_double("agent", "lr", rc.agent.lr);
  rc.agent.batch = static_cast<std::size_t>(
      store.get_int("agent", "batch", static_cast<std::int64_t>(rc.agent.batch)));
  rc.agent.gamma = store.get_double("agent", "gamma", rc.agent.gamma);
  rc.agent.tau = store.get_double("agent", "tau", rc.agent.tau);
  rc.agent.noise_sigma = store.get_double("agent", "noise_sigma", rc.agent.noise_sigma);
  rc.agent.alpha_auto = store.get_bool("agent", "alpha_auto", rc.agent.alpha_auto);
  rc.agent.alpha_init = store.get_double("agent", "alpha_init", rc.agent.alpha_init);
  rc.agent.warmup = static_cast<std::size_t>(
      store.get_int("agent", "warmup", static_cast<std::int64_t>(rc.agent.warmup)));
  rc.agent.replay_capacity = static_cast<std::size_t>(store.get_int(
      "agent", "replay_capacity", static_cast<std::int64_t>(rc.agent.replay_capacity)));
  rc.agent.td3_policy_noise =
      store.get_double("agent", "td3_policy_noise", rc.agent.td3_policy_noise);
  rc.agent.td3_noise_clip =
      store.get_double("agent", "td3_noise_clip", rc.agent.td3_noise_clip);
  rc.agent.td3_policy_delay = static_cast<std::size_t>(store.get_int(
      "agent", "td3_policy_delay", static_cast<std::int64_t>(rc.agent.td3_policy_delay)));
  rc.agent.validate();

  rc.trainer.k_min = static_cast<int>(store.get_int("trainer", "k_min", 30));
  rc.trainer.k_max = static_cast<int>(store.get_int("trainer", "k_max", 30));
  rc.trainer.total_samples = static_cast<std::size_t>(store.get_int(
      "trainer", "m", static_cast<std::int64_t>(defaults.total_samples)));
  rc.seed = static_cast<std::uint64_t>(store.get_int("trainer", "seed", 1));
  rc.trainer.timing =
      reward_timing_from_string(store.get_string("trainer", "reward_timing", "pre"));
  rc.trainer.update_per_step = store.get_bool("trainer", "update_per_step", true);
  rc.trainer.eval_every = static_cast<std::size_t>(store.get_int("trainer", "eval_every", 0));

  rc.reward.mode = reward_mode_from_string(store.get_string("reward", "mode", "asap"));
  rc.reward.rho_min = store.get_double("reward", "rho_min", defaults.rho_min);
  rc.reward.rho_max = store.get_double("reward", "rho_max", defaults.rho_max);
  rc.reward.k_max = rc.trainer.k_max;
  const double margin = store.get_double("reward", "margin", 1.0);
  const double default_r_sat =
      rc.reward.rho_min < rc.reward.rho_max
          ? choose_r_sat(rc.reward.rho_min, rc.reward.rho_max, rc.reward.k_max, margin)
          : 0.0;
  rc.reward.r_sat = store.get_double("reward", "r_sat", default_r_sat);
  rc.reward.window_d = static_cast<int>(store.get_int("reward", "window_d", 1));
  rc.reward.lambda_t = store.get_double("reward", "lambda_t", 1.0);
  rc.reward.lambda_o = store.get_double("reward", "lambda_o", 0.0);
  rc.reward.r_base = store.get_double("reward", "r_base", 0.0);

  const int phi_window = static_cast<int>(store.get_int("reward", "phi_window", 10));
  const std::string phi_t_text =
      store.get_string("reward", "phi_t", detail::default_phi_t(rc.env, phi_window));
  rc.phi_t = stl::parse_formula(phi_t_text, rc.env.state_dim);
  rc.reward.phi_t = rc.phi_t;

  rc.task = eval_task_from_string(store.get_string("eval", "task", "reach"));
  std::string phi_o_text = store.get_string("reward", "phi_o", "");
  if (phi_o_text.empty() && rc.task == EvalTask::ReachAvoid) {
    if (!rc.env.unsafe)
      throw ConfigError("eval.task", "reach_avoid needs an unsafe ball or reward.phi_o");
    phi_o_text = detail::default_phi_o(rc.env);
  }
  if (!phi_o_text.empty()) rc.phi_o = stl::parse_formula(phi_o_text, rc.env.state_dim);
  if (rc.task == EvalTask::ReachAvoid) rc.trainer.phi_o = rc.phi_o;

  rc.eval.n_points = static_cast<std::size_t>(store.get_int("eval", "n_points", 1000));
  rc.eval.tolerance = static_cast<std::size_t>(store.get_int("eval", "tolerance", 30));
  rc.eval.task = rc.task;
  rc.eval.jobs = static_cast<std::size_t>(store.get_int("eval", "jobs", 1));
  rc.eval.seed = rc.seed;
  if (store.get_bool("eval", "dump_traces", false))
    rc.eval.dump_dir = "traces"; // tools relocate this under the run directory

  const char* env_out = std::getenv("ASAP_PHI_OUT");
  rc.out_dir = store.get_string("output", "dir", env_out ? env_out : "runs");

  rc.trainer.env = rc.env;
  rc.trainer.agent = rc.agent;
  rc.trainer.reward = rc.reward;
  rc.trainer.seed = rc.seed;
  rc.trainer.validate();

  store.reject_unknown_keys();
  rc.canonical = store.canonical_dump();
  rc.config_hash = store.hash();
  return rc;
}

inline RunConfig RunConfig::from_file(const std::string& path,
                                      const std::vector<std::string>& overrides,
                                      std::optional<std::uint64_t> seed_override,
                                      const std::string& out_override) {
  ConfigStore store = ConfigStore::from_file(path);
  for (const auto& ov : overrides) store.apply_override(ov);
  if (seed_override) store.set("trainer", "seed", std::to_string(*seed_override));
  if (!out_override.empty()) store.set("output", "dir", out_override);
  return from_store(std::move(store));
}

} // namespace asap
