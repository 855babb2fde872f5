#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "bwpred/adam.hpp"
#include "bwpred/lstm.hpp"
#include "bwpred/mlp.hpp"
#include "bwpred/rng.hpp"

namespace bwpred {

struct TrainConfig {
  int batch = 128;
  int epochs = 10;
  AdamConfig adam;  // lr 1e-3, beta 0.9/0.999, eps 1e-8
  std::uint64_t seed = 1;
  int lstm_window = 10;
  // Windows advance by this stride. At the default (== window) every row is
  // supervised exactly once per epoch through the per-step outputs, which
  // keeps a full epoch affordable; stride 1 would cost window-times more for
  // near-duplicate sequences.
  int lstm_stride = 10;
  double clip_norm = 5.0;

  void validate() const {
    if (batch < 1 || epochs < 1 || adam.lr <= 0)
      throw std::runtime_error("train config: need batch >= 1, epochs >= 1, lr > 0");
    if (lstm_window < 1 || lstm_stride < 1)
      throw std::runtime_error("train config: bad LSTM window/stride");
  }
};

namespace detail {

inline void shuffle_indices(std::vector<std::size_t>& idx, RngStream& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace detail

struct MlpFit {
  MlpModel model;
  std::vector<double> epoch_mse;
};

/// Mini-batch MSE training over shuffled rows; `x` is (rows x input_size)
/// of already-normalized features.
inline MlpFit fit_mlp(const std::vector<double>& x, const std::vector<double>& y,
                      const TrainConfig& cfg, std::vector<int> sizes = {116, 256, 128, 64, 1}) {
  cfg.validate();
  const int in = sizes.front();
  const std::size_t n = y.size();
  if (n == 0) throw std::runtime_error("fit_mlp: empty training set");
  if (x.size() != n * static_cast<std::size_t>(in))
    throw std::runtime_error("fit_mlp: feature matrix shape mismatch");

  MlpFit fit;
  fit.model = mlp_init(cfg.seed, std::move(sizes));
  auto params = fit.model.params();
  AdamState adam = AdamState::like(params);
  RngStream shuffle_rng = RngStream(cfg.seed).derive("mlp-shuffle");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> xb(static_cast<std::size_t>(cfg.batch) * in);
  std::vector<double> yb(static_cast<std::size_t>(cfg.batch));
  MlpForward fwd;
  std::vector<std::vector<double>> grads;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    detail::shuffle_indices(idx, shuffle_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.batch)) {
      int b = static_cast<int>(std::min<std::size_t>(cfg.batch, n - start));
      for (int i = 0; i < b; ++i) {
        std::size_t src = idx[start + static_cast<std::size_t>(i)];
        std::copy(x.begin() + static_cast<std::ptrdiff_t>(src * in),
                  x.begin() + static_cast<std::ptrdiff_t>((src + 1) * in),
                  xb.begin() + static_cast<std::ptrdiff_t>(i) * in);
        yb[static_cast<std::size_t>(i)] = y[src];
      }
      mlp_forward(fit.model, xb.data(), b, fwd);
      double loss = mlp_backward(fit.model, fwd, yb.data(), grads);
      if (!std::isfinite(loss)) throw std::runtime_error("fit_mlp: non-finite loss");
      adam_step(params, grads, adam, cfg.adam);
      fit.model.refresh_caches();
      loss_sum += loss * b;
    }
    fit.epoch_mse.push_back(loss_sum / static_cast<double>(n));
  }
  return fit;
}

/// One interface's normalized rows and targets; windows never cross a view.
struct SeriesView {
  const double* x = nullptr;  // (n x input) row-major
  const double* y = nullptr;
  std::size_t n = 0;
};

struct LstmFit {
  LstmModel model;
  std::vector<double> epoch_mse;
};

/// Trains on shuffled sliding windows with a supervised output at every step
/// (the target for a window position is that row's future_bitrate), batched
/// time-major, gradients clipped at global norm `clip_norm`.
inline LstmFit fit_lstm(const std::vector<SeriesView>& series, const TrainConfig& cfg,
                        int input = 116, int hidden = 300, int dense = 116) {
  cfg.validate();
  const int W = cfg.lstm_window;
  struct WindowRef {
    std::uint32_t series = 0;
    std::uint32_t start = 0;
  };
  std::vector<WindowRef> windows;
  for (std::size_t si = 0; si < series.size(); ++si) {
    if (series[si].n < static_cast<std::size_t>(W)) continue;
    for (std::size_t s = 0; s + static_cast<std::size_t>(W) <= series[si].n;
         s += static_cast<std::size_t>(cfg.lstm_stride))
      windows.push_back({static_cast<std::uint32_t>(si), static_cast<std::uint32_t>(s)});
  }
  if (windows.empty()) throw std::runtime_error("fit_lstm: no window fits the training series");

  LstmFit fit;
  fit.model = lstm_init(cfg.seed, input, hidden, dense, W);
  auto params = fit.model.params();
  AdamState adam = AdamState::like(params);
  RngStream shuffle_rng = RngStream(cfg.seed).derive("lstm-shuffle");

  std::vector<std::size_t> idx(windows.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> slab(static_cast<std::size_t>(W) * cfg.batch * input);
  std::vector<double> targets(static_cast<std::size_t>(cfg.batch) * W);
  std::vector<double> step_w(static_cast<std::size_t>(W), 1.0 / W);
  LstmForward fwd;
  std::vector<std::vector<double>> grads;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    detail::shuffle_indices(idx, shuffle_rng);
    double loss_sum = 0.0;
    std::size_t count = 0;
    for (std::size_t start = 0; start < idx.size(); start += static_cast<std::size_t>(cfg.batch)) {
      int b = static_cast<int>(std::min<std::size_t>(cfg.batch, idx.size() - start));
      for (int i = 0; i < b; ++i) {
        const WindowRef& wr = windows[idx[start + static_cast<std::size_t>(i)]];
        const SeriesView& sv = series[wr.series];
        for (int t = 0; t < W; ++t) {
          const double* from = sv.x + (static_cast<std::size_t>(wr.start) + t) * input;
          std::copy(from, from + input,
                    slab.begin() + (static_cast<std::size_t>(t) * b + i) * input);
          targets[static_cast<std::size_t>(i) * W + t] =
              sv.y[static_cast<std::size_t>(wr.start) + static_cast<std::size_t>(t)];
        }
      }
      lstm_forward(fit.model, slab.data(), b, W, fwd);
      double loss = lstm_backward(fit.model, fwd, slab.data(), targets.data(), step_w, grads);
      if (!std::isfinite(loss)) throw std::runtime_error("fit_lstm: non-finite loss");
      clip_global_norm(grads, cfg.clip_norm);
      adam_step(params, grads, adam, cfg.adam);
      fit.model.refresh_caches();
      loss_sum += loss * b;
      count += static_cast<std::size_t>(b);
    }
    fit.epoch_mse.push_back(loss_sum / static_cast<double>(count));
  }
  return fit;
}

}  // namespace bwpred
