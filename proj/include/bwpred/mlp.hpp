#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bwpred/linalg.hpp"
#include "bwpred/rng.hpp"

namespace bwpred {

/// Fully connected regressor: ReLU hidden layers, identity output.
/// Weights are (out x in) row-major; transposed copies are cached for the
/// forward GEMMs and refreshed after every optimizer step.
struct MlpModel {
  std::vector<int> sizes{116, 256, 128, 64, 1};
  std::vector<std::vector<double>> w, b;
  std::vector<std::vector<double>> wt;  // (in x out) caches

  int input_size() const { return sizes.front(); }
  int layer_count() const { return static_cast<int>(sizes.size()) - 1; }

  void refresh_caches() {
    wt.resize(w.size());
    for (std::size_t l = 0; l < w.size(); ++l)
      wt[l] = transpose(w[l], sizes[l + 1], sizes[l]);
  }

  std::vector<std::vector<double>*> params() {
    std::vector<std::vector<double>*> out;
    for (std::size_t l = 0; l < w.size(); ++l) {
      out.push_back(&w[l]);
      out.push_back(&b[l]);
    }
    return out;
  }
};

/// He-uniform weights (bound sqrt(6/fan_in)), zero biases.
inline MlpModel mlp_init(std::uint64_t seed, std::vector<int> sizes = {116, 256, 128, 64, 1}) {
  if (sizes.size() < 2) throw std::invalid_argument("mlp_init: need at least two layer sizes");
  MlpModel m;
  m.sizes = std::move(sizes);
  RngStream rng = RngStream(seed).derive("mlp-init");
  for (int l = 0; l < m.layer_count(); ++l) {
    int in = m.sizes[l], out = m.sizes[l + 1];
    double bound = std::sqrt(6.0 / in);
    std::vector<double> w(static_cast<std::size_t>(out) * in);
    for (double& x : w) x = rng.uniform(-bound, bound);
    m.w.push_back(std::move(w));
    m.b.emplace_back(out, 0.0);
  }
  m.refresh_caches();
  return m;
}

/// Per-layer activations kept for the backward pass.
struct MlpForward {
  std::vector<std::vector<double>> act;  // act[0] = input copy, act[L] = output
  std::vector<std::vector<double>> pre;  // pre-activation per layer
  int batch = 0;
};

inline void mlp_forward(const MlpModel& m, const double* X, int batch, MlpForward& f) {
  f.batch = batch;
  f.act.assign(m.w.size() + 1, {});
  f.pre.assign(m.w.size(), {});
  f.act[0].assign(X, X + static_cast<std::size_t>(batch) * m.sizes[0]);
  for (int l = 0; l < m.layer_count(); ++l) {
    int in = m.sizes[l], out = m.sizes[l + 1];
    f.pre[l].assign(static_cast<std::size_t>(batch) * out, 0.0);
    gemm_nn(f.act[l].data(), m.wt[l].data(), f.pre[l].data(), batch, out, in);
    add_bias_rows(f.pre[l].data(), m.b[l].data(), batch, out);
    f.act[l + 1] = f.pre[l];
    if (l + 1 < m.layer_count())
      for (double& x : f.act[l + 1]) x = x > 0 ? x : 0.0;
  }
}

/// Gradients of mean squared error over the batch, in params() order
/// (w0, b0, w1, b1, ...). Returns the batch MSE.
inline double mlp_backward(const MlpModel& m, const MlpForward& f, const double* y,
                           std::vector<std::vector<double>>& grads) {
  int batch = f.batch;
  int layers = m.layer_count();
  grads.assign(static_cast<std::size_t>(layers) * 2, {});
  for (int l = 0; l < layers; ++l) {
    grads[2 * l].assign(m.w[l].size(), 0.0);
    grads[2 * l + 1].assign(m.b[l].size(), 0.0);
  }

  const std::vector<double>& yhat = f.act.back();
  double loss = 0.0;
  std::vector<double> delta(static_cast<std::size_t>(batch));
  for (int i = 0; i < batch; ++i) {
    double d = yhat[static_cast<std::size_t>(i)] - y[i];
    loss += d * d;
    delta[static_cast<std::size_t>(i)] = 2.0 * d / batch;
  }
  loss /= batch;

  std::vector<double> dz = delta;  // (batch x out), out == 1 for the last layer
  for (int l = layers - 1; l >= 0; --l) {
    int in = m.sizes[l], out = m.sizes[l + 1];
    gemm_tn(dz.data(), f.act[l].data(), grads[2 * l].data(), batch, in, out);
    col_sums(dz.data(), grads[2 * l + 1].data(), batch, out);
    if (l == 0) break;
    std::vector<double> da(static_cast<std::size_t>(batch) * in, 0.0);
    gemm_nn(dz.data(), m.w[l].data(), da.data(), batch, in, out);
    const std::vector<double>& pre = f.pre[l - 1];
    for (std::size_t i = 0; i < da.size(); ++i)
      if (pre[i] <= 0) da[i] = 0.0;
    dz = std::move(da);
  }
  return loss;
}

/// Inference. Predictions are clamped to [0,1] here and only here; training
/// sees the raw output so saturated targets keep their gradients.
inline std::vector<double> mlp_predict(const MlpModel& m, const double* X, int rows,
                                       bool clamp = true) {
  MlpForward f;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(rows));
  const int chunk = 512;
  for (int start = 0; start < rows; start += chunk) {
    int b = std::min(chunk, rows - start);
    mlp_forward(m, X + static_cast<std::size_t>(start) * m.sizes[0], b, f);
    for (int i = 0; i < b; ++i) {
      double v = f.act.back()[static_cast<std::size_t>(i)];
      out.push_back(clamp ? std::clamp(v, 0.0, 1.0) : v);
    }
  }
  return out;
}

}  // namespace bwpred
