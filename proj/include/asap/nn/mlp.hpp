#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "asap/errors.hpp"
#include "asap/rng.hpp"

namespace asap::nn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Activation { Identity, Relu, Tanh };

inline Activation activation_from_string(const std::string& s) {
  if (s == "identity") return Activation::Identity;
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  throw Error("unknown activation: " + s);
}

namespace detail {

inline void apply_activation(Activation act, MatrixXd& z) {
  switch (act) {
    case Activation::Identity:
      break;
    case Activation::Relu:
      z = z.cwiseMax(0.0);
      break;
    case Activation::Tanh:
      z = z.array().tanh().matrix();
      break;
  }
}

/* Derivative expressed through the post-activation value y. */
inline MatrixXd activation_grad(Activation act, const MatrixXd& y) {
  switch (act) {
    case Activation::Identity:
      return MatrixXd::Ones(y.rows(), y.cols());
    case Activation::Relu:
      return (y.array() > 0.0).cast<double>().matrix();
    case Activation::Tanh:
      return (1.0 - y.array().square()).matrix();
  }
  throw Error("unreachable activation");
}

} // namespace detail

struct MlpGrads {
  std::vector<MatrixXd> w;
  std::vector<VectorXd> b;
};

/* Fully-connected network. Batches are stored one sample per column, so a
 * forward pass is a chain of GEMMs. All parameters are doubles. */
class Mlp {
 public:
  Mlp() = default;

  /* Weights uniform in +-1/sqrt(fan_in), biases zero. */
  Mlp(const std::vector<std::size_t>& sizes, Activation hidden, Activation output,
      std::uint64_t seed)
      : sizes_(sizes), hidden_act_(hidden), output_act_(output) {
    if (sizes.size() < 2) throw Error("mlp needs at least input and output sizes");
    for (std::size_t s : sizes)
      if (s == 0) throw Error("mlp layer sizes must be positive");
    Rng rng(seed);
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      const auto in = static_cast<Eigen::Index>(sizes[l]);
      const auto out = static_cast<Eigen::Index>(sizes[l + 1]);
      const double bound = 1.0 / std::sqrt(static_cast<double>(in));
      MatrixXd w(out, in);
      for (Eigen::Index j = 0; j < in; ++j) // column-major fill order
        for (Eigen::Index i = 0; i < out; ++i) w(i, j) = rng.uniform(-bound, bound);
      weights_.push_back(std::move(w));
      biases_.push_back(VectorXd::Zero(out));
    }
  }

  const std::vector<std::size_t>& sizes() const { return sizes_; }
  std::size_t input_dim() const { return sizes_.front(); }
  std::size_t output_dim() const { return sizes_.back(); }
  std::size_t n_layers() const { return weights_.size(); }
  Activation hidden_activation() const { return hidden_act_; }
  Activation output_activation() const { return output_act_; }

  std::vector<MatrixXd>& weights() { return weights_; }
  std::vector<VectorXd>& biases() { return biases_; }
  const std::vector<MatrixXd>& weights() const { return weights_; }
  const std::vector<VectorXd>& biases() const { return biases_; }

  struct Cache {
    std::vector<MatrixXd> activations; // activations[0] is the input batch
  };

  /* Forward pass over a batch (one sample per column). */
  MatrixXd forward(const MatrixXd& x, Cache* cache = nullptr) const {
    if (static_cast<std::size_t>(x.rows()) != input_dim())
      throw DimensionError("mlp input dimension mismatch");
    if (cache) {
      cache->activations.clear();
      cache->activations.reserve(weights_.size() + 1);
      cache->activations.push_back(x);
    }
    MatrixXd a = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      MatrixXd z = (weights_[l] * a).colwise() + biases_[l];
      detail::apply_activation(l + 1 == weights_.size() ? output_act_ : hidden_act_, z);
      a = std::move(z);
      if (cache) cache->activations.push_back(a);
    }
    return a;
  }

  /* Single-sample convenience wrapper. */
  VectorXd forward_vec(const VectorXd& x, Cache* cache = nullptr) const {
    return forward(MatrixXd(x), cache).col(0);
  }

  /* Analytic gradients for the cached forward pass. `upstream` holds
   * dLoss/dOutput per sample; returns dLoss/dInput and fills `grads`. */
  MatrixXd backward(const Cache& cache, const MatrixXd& upstream, MlpGrads& grads) const {
    if (cache.activations.size() != weights_.size() + 1)
      throw Error("mlp backward cache does not match network depth");
    if (upstream.rows() != static_cast<Eigen::Index>(output_dim()) ||
        upstream.cols() != cache.activations.back().cols())
      throw DimensionError("mlp upstream gradient shape mismatch");
    grads.w.assign(weights_.size(), MatrixXd());
    grads.b.assign(weights_.size(), VectorXd());
    MatrixXd delta = upstream;
    for (std::size_t li = weights_.size(); li-- > 0;) {
      const Activation act = li + 1 == weights_.size() ? output_act_ : hidden_act_;
      delta = delta.cwiseProduct(detail::activation_grad(act, cache.activations[li + 1]));
      grads.w[li] = delta * cache.activations[li].transpose();
      grads.b[li] = delta.rowwise().sum();
      if (li > 0) delta = (weights_[li].transpose() * delta).eval();
      else return weights_[0].transpose() * delta;
    }
    throw Error("mlp has no layers");
  }

  /* Direct load of serialized parameters; shapes must already agree. */
  void set_parameters(std::vector<MatrixXd> w, std::vector<VectorXd> b) {
    if (w.size() != weights_.size() || b.size() != biases_.size())
      throw Error("parameter count mismatch");
    for (std::size_t l = 0; l < w.size(); ++l) {
      if (w[l].rows() != weights_[l].rows() || w[l].cols() != weights_[l].cols() ||
          b[l].size() != biases_[l].size())
        throw DimensionError("parameter shape mismatch");
    }
    weights_ = std::move(w);
    biases_ = std::move(b);
  }

 private:
  std::vector<std::size_t> sizes_;
  std::vector<MatrixXd> weights_;
  std::vector<VectorXd> biases_;
  Activation hidden_act_ = Activation::Relu;
  Activation output_act_ = Activation::Identity;
};

inline Mlp mlp_init(const std::vector<std::size_t>& sizes, Activation hidden,
                    Activation output, std::uint64_t seed) {
  return Mlp(sizes, hidden, output, seed);
}

/* Parameter-wise soft update: target <- (1 - tau) * target + tau * online. */
inline void soft_update(Mlp& target, const Mlp& online, double tau) {
  if (target.n_layers() != online.n_layers()) throw Error("soft update shape mismatch");
  for (std::size_t l = 0; l < target.n_layers(); ++l) {
    target.weights()[l] = (1.0 - tau) * target.weights()[l] + tau * online.weights()[l];
    target.biases()[l] = (1.0 - tau) * target.biases()[l] + tau * online.biases()[l];
  }
}

} // namespace asap::nn
