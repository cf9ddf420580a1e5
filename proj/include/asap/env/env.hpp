#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "asap/env/ball.hpp"
#include "asap/errors.hpp"
#include "asap/rng.hpp"

namespace asap {

using Vec = std::vector<double>;

enum class Integrator { Rk4, Euler };

inline Integrator integrator_from_string(const std::string& s) {
  if (s == "rk4") return Integrator::Rk4;
  if (s == "euler") return Integrator::Euler;
  throw Error("unknown integrator: " + s);
}

/* Black-box benchmark description: dimensions, bounds, step size, and the
 * target/unsafe geometry of the recovery task. */
struct EnvSpec {
  std::string name;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  double dt = 0.1;
  Vec action_low, action_high;
  Vec init_low, init_high;
  Ball target;
  std::optional<Ball> unsafe;
  Integrator integrator = Integrator::Rk4;
  /* Operating envelope: a step whose result leaves |x_i| <= state_bound is
   * reported as diverged. The attitude parameterization escapes to infinity
   * in finite time, and unbounded states would break the bounded-score
   * assumption behind the reward. */
  double state_bound = 100.0;

  void validate() const {
    if (state_dim == 0 || action_dim == 0) throw Error("env dimensions must be positive");
    if (!(dt > 0.0)) throw Error("env dt must be positive");
    if (!(state_bound > 0.0)) throw Error("env state bound must be positive");
    auto check_box = [&](const Vec& lo, const Vec& hi, std::size_t dim, const char* what) {
      if (lo.size() != dim || hi.size() != dim)
        throw DimensionError(std::string(what) + " bounds do not match dimension");
      for (std::size_t i = 0; i < dim; ++i)
        if (!(lo[i] <= hi[i])) throw Error(std::string(what) + " bounds out of order");
    };
    check_box(action_low, action_high, action_dim, "action");
    check_box(init_low, init_high, state_dim, "init");
    target.validate();
    if (target.center.size() != state_dim)
      throw DimensionError("target ball dimension does not match state");
    if (unsafe) {
      unsafe->validate();
      if (unsafe->center.size() != state_dim)
        throw DimensionError("unsafe ball dimension does not match state");
      if (!balls_disjoint(target, *unsafe))
        throw Error("target and unsafe balls must be disjoint");
    }
  }
};

struct EnvState {
  Vec state;
  std::size_t step_count = 0;
};

namespace dynamics {

/* DC motor position: states [theta, omega, i], input voltage V. Linear
 * plant theta' = omega, J omega' = K i - b omega, L i' = -K omega - R i + V. */
struct DcMotor {
  static constexpr double J = 0.01, b = 0.05, K = 0.01, R = 1.0, L = 0.5;
  static void deriv(const Vec& s, const Vec& a, Vec& ds) {
    ds[0] = s[1];
    ds[1] = (K * s[2] - b * s[1]) / J;
    ds[2] = (-K * s[1] - R * s[2] + a[0]) / L;
  }
};

/* Kinematic bicycle: states [x, y, psi, v], inputs [steer delta, accel]. */
struct Bicycle {
  static constexpr double lf = 0.5, lr = 0.5;
  static void deriv(const Vec& s, const Vec& a, Vec& ds) {
    const double beta = std::atan(lr / (lf + lr) * std::tan(a[0]));
    ds[0] = s[3] * std::cos(s[2] + beta);
    ds[1] = s[3] * std::sin(s[2] + beta);
    ds[2] = s[3] / lr * std::sin(beta);
    ds[3] = a[1];
  }
};

/* Rigid-body attitude: states [w1, w2, w3, p1, p2, p3] with Rodrigues
 * parameter kinematics p' = 0.5 (I + p p^T + skew(p)) w. */
struct Attitude {
  static void deriv(const Vec& s, const Vec& a, Vec& ds) {
    const double w1 = s[0], w2 = s[1], w3 = s[2];
    const double p1 = s[3], p2 = s[4], p3 = s[5];
    ds[0] = 0.25 * (a[0] + w2 * w3);
    ds[1] = 0.5 * (a[1] - 3.0 * w1 * w3);
    ds[2] = a[2] + 2.0 * w1 * w2;
    ds[3] = 0.5 * ((1.0 + p1 * p1) * w1 + (p1 * p2 - p3) * w2 + (p1 * p3 + p2) * w3);
    ds[4] = 0.5 * ((p1 * p2 + p3) * w1 + (1.0 + p2 * p2) * w2 + (p2 * p3 - p1) * w3);
    ds[5] = 0.5 * ((p1 * p3 - p2) * w1 + (p2 * p3 + p1) * w2 + (1.0 + p3 * p3) * w3);
  }
};

} // namespace dynamics

inline EnvSpec builtin_env_spec(const std::string& name) {
  const double pi = M_PI;
  EnvSpec spec;
  spec.name = name;
  if (name == "dc_motor") {
    spec.state_dim = 3;
    spec.action_dim = 1;
    spec.action_low = {-48.0};
    spec.action_high = {48.0};
    spec.init_low = {-pi, -3.0, -2.0};
    spec.init_high = {pi, 3.0, 2.0};
    spec.target = {{pi / 2.0, 0.0, 0.0}, 0.5};
    spec.unsafe = Ball{{pi / 4.0, 0.0, 0.0}, 0.2};
  } else if (name == "bicycle") {
    spec.state_dim = 4;
    spec.action_dim = 2;
    spec.action_low = {-0.6, -3.0};
    spec.action_high = {0.6, 3.0};
    spec.init_low = {-2.0, -2.0, -pi, 0.0};
    spec.init_high = {2.0, 2.0, pi, 2.0};
    spec.target = {{1.0, 1.0, 0.0, std::sqrt(2.0)}, 0.8};
    // No default unsafe ball: the tabulated one overlaps the target, which
    // the disjointness check rejects. Configure one explicitly if needed.
  } else if (name == "attitude") {
    spec.state_dim = 6;
    spec.action_dim = 3;
    spec.action_low = {-2.0, -2.0, -2.0};
    spec.action_high = {2.0, 2.0, 2.0};
    spec.init_low = Vec(6, -1.0);
    spec.init_high = Vec(6, 1.0);
    spec.target = {Vec(6, 0.0), 0.8};
    // Same story as bicycle: the tabulated unsafe ball sits inside the
    // target ball, so none is installed by default.
  } else {
    throw Error("unknown environment: " + name +
                " (known: dc_motor, bicycle, attitude)");
  }
  return spec;
}

/* Deterministic single-owner environment handle. The transition kernel is a
 * Dirac at the integrated ODE step; identical seed, reset state, and action
 * sequence reproduce the trace bit-for-bit. */
class Env {
 public:
  explicit Env(EnvSpec spec, std::uint64_t seed)
      : spec_(std::move(spec)), rng_(make_stream(seed, "env")) {
    if (spec_.name == "dc_motor")
      deriv_ = &dynamics::DcMotor::deriv;
    else if (spec_.name == "bicycle")
      deriv_ = &dynamics::Bicycle::deriv;
    else if (spec_.name == "attitude")
      deriv_ = &dynamics::Attitude::deriv;
    else
      throw Error("unknown environment: " + spec_.name);
    spec_.validate();
    state_.state = Vec(spec_.state_dim, 0.0);
  }

  const EnvSpec& spec() const { return spec_; }
  const EnvState& state() const { return state_; }

  /* Resets to s0. Without `force`, s0 must lie inside the initial box. */
  const EnvState& reset(const Vec& s0, bool force = false) {
    if (s0.size() != spec_.state_dim)
      throw DimensionError("reset state dimension mismatch");
    if (!force) {
      for (std::size_t i = 0; i < s0.size(); ++i)
        if (s0[i] < spec_.init_low[i] || s0[i] > spec_.init_high[i])
          throw Error("reset state outside the initial box (component " +
                      std::to_string(i) + ")");
    }
    state_.state = s0;
    state_.step_count = 0;
    return state_;
  }

  /* Advances one control period. The action is clipped to bounds, held
   * constant over dt, and integrated with the configured scheme. */
  const Vec& step(const Vec& action) {
    if (action.size() != spec_.action_dim)
      throw DimensionError("action dimension mismatch");
    Vec a = action;
    for (std::size_t i = 0; i < a.size(); ++i)
      a[i] = std::clamp(a[i], spec_.action_low[i], spec_.action_high[i]);
    if (spec_.integrator == Integrator::Rk4)
      rk4_step(a);
    else
      euler_step(a);
    for (double v : state_.state)
      if (!std::isfinite(v) || std::abs(v) > spec_.state_bound)
        throw DivergedError("dynamics diverged at step " +
                            std::to_string(state_.step_count));
    ++state_.step_count;
    return state_.state;
  }

 private:
  void rk4_step(const Vec& a) {
    const std::size_t n = spec_.state_dim;
    const double h = spec_.dt;
    Vec k1(n), k2(n), k3(n), k4(n), tmp(n);
    const Vec& s = state_.state;
    deriv_(s, a, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + 0.5 * h * k1[i];
    deriv_(tmp, a, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + 0.5 * h * k2[i];
    deriv_(tmp, a, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = s[i] + h * k3[i];
    deriv_(tmp, a, k4);
    for (std::size_t i = 0; i < n; ++i)
      state_.state[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }

  void euler_step(const Vec& a) {
    const std::size_t n = spec_.state_dim;
    Vec ds(n);
    deriv_(state_.state, a, ds);
    for (std::size_t i = 0; i < n; ++i) state_.state[i] += spec_.dt * ds[i];
  }

  EnvSpec spec_;
  EnvState state_;
  Rng rng_; // reserved for stochastic transition kernels
  void (*deriv_)(const Vec&, const Vec&, Vec&) = nullptr;
};

inline Env make_env(const EnvSpec& spec, std::uint64_t seed) { return Env(spec, seed); }

/* Component-wise uniform draw from the initial box. */
inline Vec sample_initial(const EnvSpec& spec, Rng& rng) {
  Vec s(spec.state_dim);
  for (std::size_t i = 0; i < spec.state_dim; ++i)
    s[i] = rng.uniform(spec.init_low[i], spec.init_high[i]);
  return s;
}

} // namespace asap
