#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "auvlab/rng.hpp"

namespace auvlab {

struct ShapeMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFiniteGradient : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Fully-connected net: tanh on every hidden layer, linear output head.
/// Everything is 64-bit and batched column-wise (one sample per column),
/// and gradients are computed by the explicit layer-wise rules so they
/// can be validated against finite differences.
struct Mlp {
  std::vector<Eigen::MatrixXd> w;  ///< w[l]: (layer_sizes[l+1], layer_sizes[l])
  std::vector<Eigen::VectorXd> b;

  /// Xavier-uniform weights, zero biases; the output head is additionally
  /// scaled by head_scale (small head keeps initial policies gentle).
  static Mlp make(const std::vector<int>& layer_sizes, Rng& rng,
                  double head_scale = 1.0) {
    Mlp net;
    for (size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
      const int in = layer_sizes[l], out = layer_sizes[l + 1];
      const double limit = std::sqrt(6.0 / (in + out)) *
                           (l + 2 == layer_sizes.size() ? head_scale : 1.0);
      Eigen::MatrixXd m(out, in);
      for (int r = 0; r < out; ++r) {
        for (int c = 0; c < in; ++c) m(r, c) = rng.uniform(-limit, limit);
      }
      net.w.push_back(std::move(m));
      net.b.push_back(Eigen::VectorXd::Zero(out));
    }
    return net;
  }

  int input_dim() const { return static_cast<int>(w.front().cols()); }
  int output_dim() const { return static_cast<int>(w.back().rows()); }

  long parameter_count() const {
    long n = 0;
    for (size_t l = 0; l < w.size(); ++l) n += w[l].size() + b[l].size();
    return n;
  }

  Eigen::VectorXd flatten() const {
    Eigen::VectorXd out(parameter_count());
    long at = 0;
    for (size_t l = 0; l < w.size(); ++l) {
      out.segment(at, w[l].size()) =
          Eigen::Map<const Eigen::VectorXd>(w[l].data(), w[l].size());
      at += w[l].size();
      out.segment(at, b[l].size()) = b[l];
      at += b[l].size();
    }
    return out;
  }

  void set_from_flat(const Eigen::VectorXd& flat) {
    if (flat.size() != parameter_count()) {
      throw ShapeMismatch("flat parameter vector has wrong length");
    }
    long at = 0;
    for (size_t l = 0; l < w.size(); ++l) {
      Eigen::Map<Eigen::VectorXd>(w[l].data(), w[l].size()) =
          flat.segment(at, w[l].size());
      at += w[l].size();
      b[l] = flat.segment(at, b[l].size());
      at += b[l].size();
    }
  }
};

/// Activations saved by a forward pass, consumed by the backward pass.
struct MlpCache {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> hidden;  ///< post-tanh activations per layer
};

/// Forward pass over a batch (one column per sample).
inline Eigen::MatrixXd mlp_forward(const Mlp& net, const Eigen::MatrixXd& x,
                                   MlpCache* cache = nullptr) {
  if (x.rows() != net.input_dim()) {
    throw ShapeMismatch("mlp input dimension mismatch");
  }
  if (cache) {
    cache->input = x;
    cache->hidden.clear();
  }
  Eigen::MatrixXd h = x;
  for (size_t l = 0; l + 1 < net.w.size(); ++l) {
    h = ((net.w[l] * h).colwise() + net.b[l]).array().tanh().matrix();
    if (cache) cache->hidden.push_back(h);
  }
  return (net.w.back() * h).colwise() + net.b.back();
}

struct MlpGrads {
  std::vector<Eigen::MatrixXd> w;
  std::vector<Eigen::VectorXd> b;

  static MlpGrads zeros_like(const Mlp& net) {
    MlpGrads g;
    for (size_t l = 0; l < net.w.size(); ++l) {
      g.w.push_back(Eigen::MatrixXd::Zero(net.w[l].rows(), net.w[l].cols()));
      g.b.push_back(Eigen::VectorXd::Zero(net.b[l].size()));
    }
    return g;
  }

  Eigen::VectorXd flatten() const {
    long n = 0;
    for (size_t l = 0; l < w.size(); ++l) n += w[l].size() + b[l].size();
    Eigen::VectorXd out(n);
    long at = 0;
    for (size_t l = 0; l < w.size(); ++l) {
      out.segment(at, w[l].size()) =
          Eigen::Map<const Eigen::VectorXd>(w[l].data(), w[l].size());
      at += w[l].size();
      out.segment(at, b[l].size()) = b[l];
      at += b[l].size();
    }
    return out;
  }
};

/// Accumulates parameter gradients for d(loss)/d(output) = dy and returns
/// d(loss)/d(input), reusing the cached activations.
inline Eigen::MatrixXd mlp_backward(const Mlp& net, const MlpCache& cache,
                                    const Eigen::MatrixXd& dy,
                                    MlpGrads& grads) {
  const size_t last = net.w.size() - 1;
  Eigen::MatrixXd delta = dy;  // gradient wrt the current pre-activation

  for (size_t l = last;; --l) {
    const Eigen::MatrixXd& below =
        l == 0 ? cache.input : cache.hidden[l - 1];
    grads.w[l].noalias() += delta * below.transpose();
    grads.b[l] += delta.rowwise().sum();
    const Eigen::MatrixXd dbelow = net.w[l].transpose() * delta;
    if (l == 0) return dbelow;
    delta = dbelow.cwiseProduct(
        (1.0 - cache.hidden[l - 1].array().square()).matrix());
  }
}

/// Flat-vector Adam with a global-norm gradient clip applied first.
/// Moments live here so checkpoints can carry the full optimizer state.
struct AdamOptimizer {
  Eigen::VectorXd m, v;
  long t = 0;

  void init(long n) {
    m = Eigen::VectorXd::Zero(n);
    v = Eigen::VectorXd::Zero(n);
    t = 0;
  }

  void step(Eigen::VectorXd& params, Eigen::VectorXd grad, double lr,
            double clip_norm, double beta1, double beta2, double eps) {
    if (!grad.allFinite()) {
      throw NonFiniteGradient("non-finite gradient in optimizer step");
    }
    const double norm = grad.norm();
    if (clip_norm > 0.0 && norm > clip_norm) grad *= clip_norm / norm;
    ++t;
    m = beta1 * m + (1.0 - beta1) * grad;
    v = beta2 * v + (1.0 - beta2) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    params -= (lr / bc1) * m.cwiseQuotient(
                  ((v / bc2).cwiseSqrt().array() + eps).matrix());
  }
};

}  // namespace auvlab
