#pragma once

#include <cmath>

#include "asap/nn/mlp.hpp"

namespace asap::nn {

/* Adam with the usual bias correction. beta/epsilon are fixed; the learning
 * rate is the caller's knob. */
struct AdamConfig {
  static constexpr double beta1 = 0.9;
  static constexpr double beta2 = 0.999;
  static constexpr double epsilon = 1e-8;
};

struct AdamState {
  std::vector<MatrixXd> mw, vw;
  std::vector<VectorXd> mb, vb;
  long step = 0;

  explicit AdamState(const Mlp& net) {
    for (std::size_t l = 0; l < net.n_layers(); ++l) {
      mw.push_back(MatrixXd::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
      vw.push_back(MatrixXd::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
      mb.push_back(VectorXd::Zero(net.biases()[l].size()));
      vb.push_back(VectorXd::Zero(net.biases()[l].size()));
    }
  }
  AdamState() = default;
};

inline void adam_step(Mlp& net, const MlpGrads& grads, AdamState& state, double lr) {
  if (grads.w.size() != net.n_layers() || state.mw.size() != net.n_layers())
    throw Error("adam state/gradient shape mismatch");
  for (std::size_t l = 0; l < net.n_layers(); ++l)
    if (!grads.w[l].allFinite() || !grads.b[l].allFinite())
      throw Error("non-finite gradient in adam step");
  ++state.step;
  const double c1 = 1.0 - std::pow(AdamConfig::beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(AdamConfig::beta2, static_cast<double>(state.step));
  for (std::size_t l = 0; l < net.n_layers(); ++l) {
    auto& mw = state.mw[l];
    auto& vw = state.vw[l];
    mw = AdamConfig::beta1 * mw + (1.0 - AdamConfig::beta1) * grads.w[l];
    vw = (AdamConfig::beta2 * vw.array() +
          (1.0 - AdamConfig::beta2) * grads.w[l].array().square())
             .matrix();
    net.weights()[l].array() -=
        lr * (mw.array() / c1) / ((vw.array() / c2).sqrt() + AdamConfig::epsilon);
    auto& mb = state.mb[l];
    auto& vb = state.vb[l];
    mb = AdamConfig::beta1 * mb + (1.0 - AdamConfig::beta1) * grads.b[l];
    vb = (AdamConfig::beta2 * vb.array() +
          (1.0 - AdamConfig::beta2) * grads.b[l].array().square())
             .matrix();
    net.biases()[l].array() -=
        lr * (mb.array() / c1) / ((vb.array() / c2).sqrt() + AdamConfig::epsilon);
  }
}

/* Single-scalar Adam, used for tuned coefficients such as the SAC entropy
 * temperature. */
struct ScalarAdam {
  double m = 0.0, v = 0.0;
  long step = 0;

  double update(double param, double grad, double lr) {
    if (!std::isfinite(grad)) throw Error("non-finite gradient in adam step");
    ++step;
    m = AdamConfig::beta1 * m + (1.0 - AdamConfig::beta1) * grad;
    v = AdamConfig::beta2 * v + (1.0 - AdamConfig::beta2) * grad * grad;
    const double mh = m / (1.0 - std::pow(AdamConfig::beta1, static_cast<double>(step)));
    const double vh = v / (1.0 - std::pow(AdamConfig::beta2, static_cast<double>(step)));
    return param - lr * mh / (std::sqrt(vh) + AdamConfig::epsilon);
  }
};

} // namespace asap::nn
