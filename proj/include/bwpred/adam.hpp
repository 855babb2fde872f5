#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace bwpred {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// First/second moment estimates, one pair per parameter tensor.
struct AdamState {
  std::vector<std::vector<double>> m, v;
  std::int64_t t = 0;

  static AdamState like(const std::vector<std::vector<double>*>& params) {
    AdamState s;
    for (const auto* p : params) {
      s.m.emplace_back(p->size(), 0.0);
      s.v.emplace_back(p->size(), 0.0);
    }
    return s;
  }
};

/// p <- p - lr * m_hat / (sqrt(v_hat) + eps) with the standard bias
/// correction. A non-finite gradient aborts training.
inline void adam_step(const std::vector<std::vector<double>*>& params,
                      const std::vector<std::vector<double>>& grads, AdamState& state,
                      const AdamConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step: tensor count mismatch");
  ++state.t;
  double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t ti = 0; ti < params.size(); ++ti) {
    std::vector<double>& p = *params[ti];
    const std::vector<double>& g = grads[ti];
    std::vector<double>& m = state.m[ti];
    std::vector<double>& v = state.v[ti];
    if (p.size() != g.size())
      throw std::invalid_argument("adam_step: shape mismatch in tensor " + std::to_string(ti));
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!std::isfinite(g[i]))
        throw std::runtime_error("adam_step: non-finite gradient in tensor " +
                                 std::to_string(ti) + " at index " + std::to_string(i));
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      double mhat = m[i] / c1;
      double vhat = v[i] / c2;
      p[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

/// Scales all gradients so their global L2 norm does not exceed max_norm.
inline double clip_global_norm(std::vector<std::vector<double>>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads)
    for (double x : g) sq += x * x;
  double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    double k = max_norm / norm;
    for (auto& g : grads)
      for (double& x : g) x *= k;
  }
  return norm;
}

}  // namespace bwpred
