#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bwpred/linalg.hpp"
#include "bwpred/rng.hpp"

namespace bwpred {

/// One recurrent layer whose final state feeds a ReLU dense layer and a
/// scalar identity output. Gate blocks are ordered [input|forget|output|
/// candidate] along the 4H axis; the forget-gate bias starts at 1.
struct LstmModel {
  int input = 116;
  int hidden = 300;
  int dense = 116;
  int window = 10;

  std::vector<double> wx;  // (4H x input)
  std::vector<double> wh;  // (4H x hidden)
  std::vector<double> bg;  // 4H
  std::vector<double> wd;  // (dense x hidden)
  std::vector<double> bd;  // dense
  std::vector<double> wo;  // dense (single output row)
  std::vector<double> bo;  // 1

  std::vector<double> wx_t, wh_t, wd_t;  // transposed caches for forward

  void refresh_caches() {
    wx_t = transpose(wx, 4 * hidden, input);
    wh_t = transpose(wh, 4 * hidden, hidden);
    wd_t = transpose(wd, dense, hidden);
  }

  std::vector<std::vector<double>*> params() {
    return {&wx, &wh, &bg, &wd, &bd, &wo, &bo};
  }
};

inline LstmModel lstm_init(std::uint64_t seed, int input = 116, int hidden = 300,
                           int dense = 116, int window = 10) {
  LstmModel m;
  m.input = input;
  m.hidden = hidden;
  m.dense = dense;
  m.window = window;
  RngStream rng = RngStream(seed).derive("lstm-init");
  auto uniform_fill = [&](std::vector<double>& v, std::size_t n, double bound) {
    v.resize(n);
    for (double& x : v) x = rng.uniform(-bound, bound);
  };
  int h4 = 4 * hidden;
  uniform_fill(m.wx, static_cast<std::size_t>(h4) * input, std::sqrt(6.0 / (input + hidden)));
  uniform_fill(m.wh, static_cast<std::size_t>(h4) * hidden, std::sqrt(6.0 / (hidden + hidden)));
  m.bg.assign(static_cast<std::size_t>(h4), 0.0);
  for (int i = hidden; i < 2 * hidden; ++i) m.bg[static_cast<std::size_t>(i)] = 1.0;
  uniform_fill(m.wd, static_cast<std::size_t>(dense) * hidden, std::sqrt(6.0 / hidden));
  m.bd.assign(static_cast<std::size_t>(dense), 0.0);
  uniform_fill(m.wo, static_cast<std::size_t>(dense), std::sqrt(6.0 / (dense + 1)));
  m.bo.assign(1, 0.0);
  m.refresh_caches();
  return m;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Per-step activations kept for truncated backpropagation through time.
struct LstmForward {
  int batch = 0, window = 0;
  std::vector<std::vector<double>> gates;  // (B x 4H) post-activation
  std::vector<std::vector<double>> cell;   // (B x H)
  std::vector<std::vector<double>> tanhc;  // (B x H)
  std::vector<std::vector<double>> hidden; // (B x H)
  std::vector<std::vector<double>> dpre;   // (B x dense)
  std::vector<std::vector<double>> dact;   // (B x dense)
  std::vector<std::vector<double>> yhat;   // (B) per step
};

/// X is time-major: step t occupies X + t*batch*input as a (batch x input)
/// block. Every step's scalar output is computed; callers pick which steps
/// contribute to the loss via step weights.
inline void lstm_forward(const LstmModel& m, const double* X, int batch, int window,
                         LstmForward& f) {
  const int H = m.hidden, H4 = 4 * m.hidden, D = m.dense, in = m.input;
  f.batch = batch;
  f.window = window;
  auto prep = [&](std::vector<std::vector<double>>& v, std::size_t cols) {
    v.resize(static_cast<std::size_t>(window));
    for (auto& x : v) x.assign(static_cast<std::size_t>(batch) * cols, 0.0);
  };
  prep(f.gates, static_cast<std::size_t>(H4));
  prep(f.cell, static_cast<std::size_t>(H));
  prep(f.tanhc, static_cast<std::size_t>(H));
  prep(f.hidden, static_cast<std::size_t>(H));
  prep(f.dpre, static_cast<std::size_t>(D));
  prep(f.dact, static_cast<std::size_t>(D));
  prep(f.yhat, 1);

  for (int t = 0; t < window; ++t) {
    const double* xt = X + static_cast<std::size_t>(t) * batch * in;
    std::vector<double>& G = f.gates[static_cast<std::size_t>(t)];
    gemm_nn(xt, m.wx_t.data(), G.data(), batch, H4, in);
    if (t > 0)
      gemm_nn(f.hidden[static_cast<std::size_t>(t) - 1].data(), m.wh_t.data(), G.data(), batch,
              H4, H);
    add_bias_rows(G.data(), m.bg.data(), batch, H4);

    const std::vector<double>* c_prev = t > 0 ? &f.cell[static_cast<std::size_t>(t) - 1] : nullptr;
    std::vector<double>& c = f.cell[static_cast<std::size_t>(t)];
    std::vector<double>& tc = f.tanhc[static_cast<std::size_t>(t)];
    std::vector<double>& h = f.hidden[static_cast<std::size_t>(t)];
    for (int b = 0; b < batch; ++b) {
      double* g = G.data() + static_cast<std::size_t>(b) * H4;
      double* cb = c.data() + static_cast<std::size_t>(b) * H;
      double* tcb = tc.data() + static_cast<std::size_t>(b) * H;
      double* hb = h.data() + static_cast<std::size_t>(b) * H;
      const double* cp = c_prev ? c_prev->data() + static_cast<std::size_t>(b) * H : nullptr;
      for (int j = 0; j < H; ++j) {
        double gi = sigmoid(g[j]);
        double gf = sigmoid(g[H + j]);
        double go = sigmoid(g[2 * H + j]);
        double gc = std::tanh(g[3 * H + j]);
        g[j] = gi;
        g[H + j] = gf;
        g[2 * H + j] = go;
        g[3 * H + j] = gc;
        double cv = gf * (cp ? cp[j] : 0.0) + gi * gc;
        cb[j] = cv;
        tcb[j] = std::tanh(cv);
        hb[j] = go * tcb[j];
      }
    }

    std::vector<double>& dp = f.dpre[static_cast<std::size_t>(t)];
    gemm_nn(h.data(), m.wd_t.data(), dp.data(), batch, D, H);
    add_bias_rows(dp.data(), m.bd.data(), batch, D);
    std::vector<double>& da = f.dact[static_cast<std::size_t>(t)];
    da = dp;
    for (double& x : da) x = x > 0 ? x : 0.0;
    std::vector<double>& yh = f.yhat[static_cast<std::size_t>(t)];
    for (int b = 0; b < batch; ++b) {
      const double* dab = da.data() + static_cast<std::size_t>(b) * D;
      double acc = m.bo[0];
      for (int j = 0; j < D; ++j) acc += dab[j] * m.wo[static_cast<std::size_t>(j)];
      yh[static_cast<std::size_t>(b)] = acc;
    }
  }
}

/// Gradients of the step-weighted MSE, in params() order
/// (wx, wh, bg, wd, bd, wo, bo). `Y` is (batch x window) row-major;
/// `step_weights` selects which steps are supervised (their sum is the
/// loss normalizer across steps). Returns the loss.
inline double lstm_backward(const LstmModel& m, const LstmForward& f, const double* X,
                            const double* Y, const std::vector<double>& step_weights,
                            std::vector<std::vector<double>>& grads) {
  const int H = m.hidden, H4 = 4 * m.hidden, D = m.dense, in = m.input;
  const int B = f.batch, W = f.window;
  if (static_cast<int>(step_weights.size()) != W)
    throw std::invalid_argument("lstm_backward: step weight count mismatch");

  grads.assign(7, {});
  grads[0].assign(m.wx.size(), 0.0);
  grads[1].assign(m.wh.size(), 0.0);
  grads[2].assign(m.bg.size(), 0.0);
  grads[3].assign(m.wd.size(), 0.0);
  grads[4].assign(m.bd.size(), 0.0);
  grads[5].assign(m.wo.size(), 0.0);
  grads[6].assign(1, 0.0);

  double loss = 0.0;
  std::vector<double> dh(static_cast<std::size_t>(B) * H, 0.0);
  std::vector<double> dc(static_cast<std::size_t>(B) * H, 0.0);
  std::vector<double> dG(static_cast<std::size_t>(B) * H4);
  std::vector<double> dd(static_cast<std::size_t>(B) * D);
  std::vector<double> scratch(static_cast<std::size_t>(B) * D);
  std::vector<double> tmp_col(static_cast<std::size_t>(std::max(H4, D)));

  for (int t = W - 1; t >= 0; --t) {
    double sw = step_weights[static_cast<std::size_t>(t)];
    if (sw > 0) {
      const std::vector<double>& yh = f.yhat[static_cast<std::size_t>(t)];
      const std::vector<double>& da = f.dact[static_cast<std::size_t>(t)];
      const std::vector<double>& dp = f.dpre[static_cast<std::size_t>(t)];
      for (int b = 0; b < B; ++b) {
        double d = yh[static_cast<std::size_t>(b)] - Y[static_cast<std::size_t>(b) * W + t];
        loss += sw * d * d / B;
        double dy = 2.0 * sw * d / B;
        grads[6][0] += dy;
        const double* dab = da.data() + static_cast<std::size_t>(b) * D;
        double* ddb = dd.data() + static_cast<std::size_t>(b) * D;
        const double* dpb = dp.data() + static_cast<std::size_t>(b) * D;
        for (int j = 0; j < D; ++j) {
          grads[5][static_cast<std::size_t>(j)] += dab[j] * dy;
          ddb[j] = dpb[j] > 0 ? dy * m.wo[static_cast<std::size_t>(j)] : 0.0;
        }
      }
      gemm_tn(dd.data(), f.hidden[static_cast<std::size_t>(t)].data(), grads[3].data(), B, H, D);
      col_sums(dd.data(), tmp_col.data(), B, D);
      for (int j = 0; j < D; ++j) grads[4][static_cast<std::size_t>(j)] += tmp_col[static_cast<std::size_t>(j)];
      gemm_nn(dd.data(), m.wd.data(), dh.data(), B, H, D);
    }

    const std::vector<double>& G = f.gates[static_cast<std::size_t>(t)];
    const std::vector<double>& tc = f.tanhc[static_cast<std::size_t>(t)];
    const std::vector<double>* c_prev = t > 0 ? &f.cell[static_cast<std::size_t>(t) - 1] : nullptr;
    for (int b = 0; b < B; ++b) {
      const double* g = G.data() + static_cast<std::size_t>(b) * H4;
      const double* tcb = tc.data() + static_cast<std::size_t>(b) * H;
      const double* cp = c_prev ? c_prev->data() + static_cast<std::size_t>(b) * H : nullptr;
      double* dhb = dh.data() + static_cast<std::size_t>(b) * H;
      double* dcb = dc.data() + static_cast<std::size_t>(b) * H;
      double* dGb = dG.data() + static_cast<std::size_t>(b) * H4;
      for (int j = 0; j < H; ++j) {
        double gi = g[j], gf = g[H + j], go = g[2 * H + j], gc = g[3 * H + j];
        double dcj = dcb[j] + dhb[j] * go * (1.0 - tcb[j] * tcb[j]);
        double doj = dhb[j] * tcb[j];
        double dij = dcj * gc;
        double dfj = dcj * (cp ? cp[j] : 0.0);
        double dgj = dcj * gi;
        dGb[j] = dij * gi * (1.0 - gi);
        dGb[H + j] = dfj * gf * (1.0 - gf);
        dGb[2 * H + j] = doj * go * (1.0 - go);
        dGb[3 * H + j] = dgj * (1.0 - gc * gc);
        dcb[j] = dcj * gf;  // becomes dc for t-1
      }
    }
    const double* xt = X + static_cast<std::size_t>(t) * B * in;
    gemm_tn(dG.data(), xt, grads[0].data(), B, in, H4);
    if (t > 0)
      gemm_tn(dG.data(), f.hidden[static_cast<std::size_t>(t) - 1].data(), grads[1].data(), B, H,
              H4);
    col_sums(dG.data(), tmp_col.data(), B, H4);
    for (int j = 0; j < H4; ++j) grads[2][static_cast<std::size_t>(j)] += tmp_col[static_cast<std::size_t>(j)];
    std::fill(dh.begin(), dh.end(), 0.0);
    gemm_nn(dG.data(), m.wh.data(), dh.data(), B, H, H4);
  }
  return loss;
}

/// Prediction for every row of a time-ordered feature matrix: each row is
/// scored from the window of the previous W rows, repeating the first row
/// where history is short, and clamped to [0,1].
inline std::vector<double> lstm_predict_series(const LstmModel& m, const double* X,
                                               std::size_t rows) {
  const int W = m.window, in = m.input;
  std::vector<double> out(rows, 0.0);
  const int chunk = 256;
  LstmForward f;
  std::vector<double> slab;
  for (std::size_t start = 0; start < rows; start += chunk) {
    int b = static_cast<int>(std::min<std::size_t>(chunk, rows - start));
    slab.assign(static_cast<std::size_t>(W) * b * in, 0.0);
    for (int t = 0; t < W; ++t)
      for (int r = 0; r < b; ++r) {
        std::ptrdiff_t src = static_cast<std::ptrdiff_t>(start + r) - (W - 1) + t;
        if (src < 0) src = 0;
        const double* from = X + static_cast<std::size_t>(src) * in;
        double* to = slab.data() + (static_cast<std::size_t>(t) * b + r) * in;
        std::copy(from, from + in, to);
      }
    lstm_forward(m, slab.data(), b, W, f);
    for (int r = 0; r < b; ++r)
      out[start + r] = std::clamp(f.yhat.back()[static_cast<std::size_t>(r)], 0.0, 1.0);
  }
  return out;
}

}  // namespace bwpred
