#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace bwpred {

/// bias / MAE / MSE / RMSE on utilization ratios.
struct Metrics {
  double bias = 0, mae = 0, mse = 0, rmse = 0;
  std::size_t n = 0;
};

inline Metrics compute_metrics(const std::vector<double>& pred,
                               const std::vector<double>& actual) {
  if (pred.size() != actual.size())
    throw std::invalid_argument("compute_metrics: length mismatch");
  if (pred.empty()) throw std::invalid_argument("compute_metrics: empty vectors");
  Metrics m;
  m.n = pred.size();
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double d = pred[i] - actual[i];
    m.bias += d;
    m.mae += std::fabs(d);
    m.mse += d * d;
  }
  double n = static_cast<double>(m.n);
  m.bias /= n;
  m.mae /= n;
  m.mse /= n;
  m.rmse = std::sqrt(m.mse);
  return m;
}

}  // namespace bwpred
