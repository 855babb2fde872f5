#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace bwpred {

struct ArimaModel {
  int p = 0, d = 0, q = 0;
  std::vector<double> phi;    // AR coefficients
  std::vector<double> theta;  // MA coefficients
  double mean = 0.0;          // mean of the d-times differenced series
  double sigma2 = 0.0;        // innovation variance (CSS / effective n)
};

namespace arima_detail {

inline std::vector<double> difference(const std::vector<double>& y, int d) {
  std::vector<double> w = y;
  for (int k = 0; k < d; ++k) {
    std::vector<double> next;
    next.reserve(w.size() - 1);
    for (std::size_t i = 1; i < w.size(); ++i) next.push_back(w[i] - w[i - 1]);
    w = std::move(next);
  }
  return w;
}

inline double variance(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  double mean = 0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double s = 0;
  for (double v : x) s += (v - mean) * (v - mean);
  return s / static_cast<double>(x.size());
}

/// Difference while it collapses the variance to under a tenth. An
/// integrated series (random walk) drops by a factor of order n; a
/// stationary AR(1) only drops by 2*(1-phi), so anything with phi < 0.95
/// is left undifferenced and keeps its level structure.
inline int select_d(const std::vector<double>& y, int max_d = 2) {
  int d = 0;
  std::vector<double> w = y;
  double v = variance(w);
  while (d < max_d) {
    std::vector<double> next = difference(w, 1);
    double vn = variance(next);
    if (!(vn < 0.10 * v)) break;
    w = std::move(next);
    v = vn;
    ++d;
  }
  return d;
}

/// Schur-Cohn step-down: the roots of 1 - c1 z - ... - cp z^p lie outside
/// the unit circle iff every reflection coefficient has magnitude < 1.
inline bool roots_outside_unit(const std::vector<double>& c) {
  std::vector<double> a = c;
  for (int k = static_cast<int>(a.size()); k >= 1; --k) {
    double r = a[static_cast<std::size_t>(k) - 1];
    if (!(std::fabs(r) < 1.0 - 1e-9)) return false;
    if (k == 1) break;
    std::vector<double> next(static_cast<std::size_t>(k) - 1);
    double denom = 1.0 - r * r;
    for (int i = 1; i <= k - 1; ++i)
      next[static_cast<std::size_t>(i) - 1] =
          (a[static_cast<std::size_t>(i) - 1] + r * a[static_cast<std::size_t>(k - i) - 1]) /
          denom;
    a = std::move(next);
  }
  return true;
}

inline bool stationary(const std::vector<double>& phi) {
  return phi.empty() || roots_outside_unit(phi);
}
inline bool invertible(const std::vector<double>& theta) {
  if (theta.empty()) return true;
  std::vector<double> c(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) c[i] = -theta[i];
  return roots_outside_unit(c);
}

/// Conditional sum of squares starting at t0; residuals before t0 are taken
/// as zero. Candidates in a selection grid share t0 so their sums stay
/// comparable.
inline double css(const std::vector<double>& w, double mu, const std::vector<double>& phi,
                  const std::vector<double>& theta, int t0) {
  int p = static_cast<int>(phi.size());
  int q = static_cast<int>(theta.size());
  int n = static_cast<int>(w.size());
  std::vector<double> e(static_cast<std::size_t>(n), 0.0);
  double ss = 0.0;
  for (int t = t0; t < n; ++t) {
    double pred = mu;
    for (int i = 1; i <= p; ++i)
      pred += phi[static_cast<std::size_t>(i) - 1] * (w[static_cast<std::size_t>(t - i)] - mu);
    for (int j = 1; j <= q; ++j)
      if (t - j >= t0) pred += theta[static_cast<std::size_t>(j) - 1] * e[static_cast<std::size_t>(t - j)];
    double r = w[static_cast<std::size_t>(t)] - pred;
    e[static_cast<std::size_t>(t)] = r;
    ss += r * r;
  }
  return ss;
}

/// Gaussian elimination with partial pivoting; false when singular.
inline bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b,
                         std::vector<double>& out) {
  int n = static_cast<int>(b.size());
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)]) >
          std::fabs(a[static_cast<std::size_t>(pivot)][static_cast<std::size_t>(col)]))
        pivot = r;
    if (std::fabs(a[static_cast<std::size_t>(pivot)][static_cast<std::size_t>(col)]) < 1e-12)
      return false;
    std::swap(a[static_cast<std::size_t>(col)], a[static_cast<std::size_t>(pivot)]);
    std::swap(b[static_cast<std::size_t>(col)], b[static_cast<std::size_t>(pivot)]);
    for (int r = col + 1; r < n; ++r) {
      double k = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)] /
                 a[static_cast<std::size_t>(col)][static_cast<std::size_t>(col)];
      for (int c = col; c < n; ++c)
        a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] -=
            k * a[static_cast<std::size_t>(col)][static_cast<std::size_t>(c)];
      b[static_cast<std::size_t>(r)] -= k * b[static_cast<std::size_t>(col)];
    }
  }
  out.assign(static_cast<std::size_t>(n), 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[static_cast<std::size_t>(r)];
    for (int c = r + 1; c < n; ++c)
      acc -= a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] * out[static_cast<std::size_t>(c)];
    out[static_cast<std::size_t>(r)] = acc / a[static_cast<std::size_t>(r)][static_cast<std::size_t>(r)];
  }
  return true;
}

/// Levinson-Durbin AR(m) fit from sample autocovariances.
inline std::vector<double> long_ar(const std::vector<double>& w, int m) {
  int n = static_cast<int>(w.size());
  double mean = 0;
  for (double v : w) mean += v;
  mean /= n;
  std::vector<double> gamma(static_cast<std::size_t>(m) + 1, 0.0);
  for (int k = 0; k <= m; ++k) {
    double s = 0;
    for (int t = k; t < n; ++t) s += (w[static_cast<std::size_t>(t)] - mean) * (w[static_cast<std::size_t>(t - k)] - mean);
    gamma[static_cast<std::size_t>(k)] = s / n;
  }
  std::vector<double> a;
  double v = gamma[0];
  if (v <= 0) return std::vector<double>(static_cast<std::size_t>(m), 0.0);
  for (int k = 1; k <= m; ++k) {
    double acc = gamma[static_cast<std::size_t>(k)];
    for (int i = 1; i < k; ++i) acc -= a[static_cast<std::size_t>(i) - 1] * gamma[static_cast<std::size_t>(k - i)];
    double rk = acc / v;
    std::vector<double> next(static_cast<std::size_t>(k));
    for (int i = 1; i < k; ++i)
      next[static_cast<std::size_t>(i) - 1] =
          a[static_cast<std::size_t>(i) - 1] - rk * a[static_cast<std::size_t>(k - i) - 1];
    next[static_cast<std::size_t>(k) - 1] = rk;
    a = std::move(next);
    v *= (1.0 - rk * rk);
    if (v <= 1e-16) break;
  }
  a.resize(static_cast<std::size_t>(m), 0.0);
  return a;
}

/// Hannan-Rissanen start values: residuals from a long AR fit, then OLS of
/// the centered series on its own lags and residual lags.
inline void hannan_rissanen(const std::vector<double>& w, int p, int q, double& mu,
                            std::vector<double>& phi, std::vector<double>& theta) {
  int n = static_cast<int>(w.size());
  mu = 0;
  for (double v : w) mu += v;
  mu /= n;
  phi.assign(static_cast<std::size_t>(p), 0.0);
  theta.assign(static_cast<std::size_t>(q), 0.0);
  if (p + q == 0) return;

  int m = std::min(n / 4, 20 + p + q);
  std::vector<double> ar = long_ar(w, m);
  std::vector<double> e(static_cast<std::size_t>(n), 0.0);
  for (int t = m; t < n; ++t) {
    double pred = mu;
    for (int i = 1; i <= m; ++i) pred += ar[static_cast<std::size_t>(i) - 1] * (w[static_cast<std::size_t>(t - i)] - mu);
    e[static_cast<std::size_t>(t)] = w[static_cast<std::size_t>(t)] - pred;
  }

  int dim = p + q;
  int t0 = m + std::max(p, q);
  if (n - t0 < dim + 4) return;
  std::vector<std::vector<double>> xtx(static_cast<std::size_t>(dim),
                                       std::vector<double>(static_cast<std::size_t>(dim), 0.0));
  std::vector<double> xty(static_cast<std::size_t>(dim), 0.0);
  std::vector<double> row(static_cast<std::size_t>(dim), 0.0);
  for (int t = t0; t < n; ++t) {
    for (int i = 1; i <= p; ++i) row[static_cast<std::size_t>(i) - 1] = w[static_cast<std::size_t>(t - i)] - mu;
    for (int j = 1; j <= q; ++j) row[static_cast<std::size_t>(p + j) - 1] = e[static_cast<std::size_t>(t - j)];
    double target = w[static_cast<std::size_t>(t)] - mu;
    for (int a = 0; a < dim; ++a) {
      xty[static_cast<std::size_t>(a)] += row[static_cast<std::size_t>(a)] * target;
      for (int b = 0; b < dim; ++b)
        xtx[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +=
            row[static_cast<std::size_t>(a)] * row[static_cast<std::size_t>(b)];
    }
  }
  std::vector<double> beta;
  if (!solve_linear(xtx, xty, beta)) return;
  for (int i = 0; i < p; ++i) phi[static_cast<std::size_t>(i)] = beta[static_cast<std::size_t>(i)];
  for (int j = 0; j < q; ++j) theta[static_cast<std::size_t>(j)] = beta[static_cast<std::size_t>(p + j)];
  if (!stationary(phi)) phi.assign(static_cast<std::size_t>(p), 0.0);
  if (!invertible(theta)) theta.assign(static_cast<std::size_t>(q), 0.0);
}

/// Derivative-free Nelder-Mead minimization.
inline std::vector<double> nelder_mead(std::function<double(const std::vector<double>&)> f,
                                       std::vector<double> x0, int max_iter) {
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
  int dim = static_cast<int>(x0.size());
  std::vector<std::vector<double>> xs(static_cast<std::size_t>(dim) + 1, x0);
  for (int i = 0; i < dim; ++i)
    xs[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(i)] +=
        std::max(0.05, 0.1 * std::fabs(x0[static_cast<std::size_t>(i)]));
  std::vector<double> fs;
  for (auto& x : xs) fs.push_back(f(x));

  for (int it = 0; it < max_iter; ++it) {
    std::vector<std::size_t> ord(xs.size());
    for (std::size_t i = 0; i < ord.size(); ++i) ord[i] = i;
    std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    std::vector<std::vector<double>> xs2;
    std::vector<double> fs2;
    for (std::size_t i : ord) {
      xs2.push_back(xs[i]);
      fs2.push_back(fs[i]);
    }
    xs = std::move(xs2);
    fs = std::move(fs2);
    if (std::fabs(fs.back() - fs.front()) <= 1e-12 * (1.0 + std::fabs(fs.front()))) break;

    std::vector<double> centroid(static_cast<std::size_t>(dim), 0.0);
    for (int i = 0; i < dim; ++i)
      for (int c = 0; c < dim; ++c)
        centroid[static_cast<std::size_t>(c)] += xs[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] / dim;

    auto blend = [&](double k) {
      std::vector<double> x(static_cast<std::size_t>(dim));
      for (int c = 0; c < dim; ++c)
        x[static_cast<std::size_t>(c)] =
            centroid[static_cast<std::size_t>(c)] +
            k * (centroid[static_cast<std::size_t>(c)] - xs.back()[static_cast<std::size_t>(c)]);
      return x;
    };
    std::vector<double> xr = blend(alpha);
    double fr = f(xr);
    if (fr < fs.front()) {
      std::vector<double> xe = blend(gamma);
      double fe = f(xe);
      if (fe < fr) {
        xs.back() = xe;
        fs.back() = fe;
      } else {
        xs.back() = xr;
        fs.back() = fr;
      }
    } else if (fr < fs[fs.size() - 2]) {
      xs.back() = xr;
      fs.back() = fr;
    } else {
      std::vector<double> xc = blend(-rho);
      double fc = f(xc);
      if (fc < fs.back()) {
        xs.back() = xc;
        fs.back() = fc;
      } else {
        for (std::size_t i = 1; i < xs.size(); ++i) {
          for (int c = 0; c < dim; ++c)
            xs[i][static_cast<std::size_t>(c)] =
                xs[0][static_cast<std::size_t>(c)] +
                sigma * (xs[i][static_cast<std::size_t>(c)] - xs[0][static_cast<std::size_t>(c)]);
          fs[i] = f(xs[i]);
        }
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < fs.size(); ++i)
    if (fs[i] < fs[best]) best = i;
  return xs[best];
}

}  // namespace arima_detail

/// Fits ARIMA(p,d,q): d by the variance-reduction heuristic, (p,q) over
/// [0,max_p]x[0,max_q] by AIC, coefficients by Hannan-Rissanen start values
/// refined with conditional-sum-of-squares Nelder-Mead descent. Candidate
/// parameter sets with AR roots or MA roots inside the unit circle are
/// rejected during the search.
inline ArimaModel arima_fit(const std::vector<double>& series, int max_p = 3, int max_q = 3) {
  using namespace arima_detail;
  if (series.size() < 50) throw std::runtime_error("arima_fit: need at least 50 observations");

  ArimaModel best;
  if (variance(series) < 1e-18) {
    // constant series: degenerate model that predicts the constant
    best.mean = series.back();
    return best;
  }

  int d = select_d(series);
  std::vector<double> w = difference(series, d);
  best.d = d;
  if (variance(w) < 1e-18) {
    best.mean = w.empty() ? 0.0 : w.back();
    return best;
  }

  // order selection: AIC over the Hannan-Rissanen estimates, conditioning
  // every candidate on the same prefix so the sums are comparable. Scoring
  // the regression-stage fits (rather than fully optimized ones) avoids the
  // classic near-common-factor ARMA overfit on structureless series.
  const int t0 = max_p;
  const int neff = static_cast<int>(w.size()) - t0;
  double best_aic = std::numeric_limits<double>::infinity();
  double best_mu = 0;
  std::vector<double> best_phi, best_theta;
  for (int p = 0; p <= max_p; ++p) {
    for (int q = 0; q <= max_q; ++q) {
      if (neff <= p + q + 2) continue;
      double mu;
      std::vector<double> phi, theta;
      hannan_rissanen(w, p, q, mu, phi, theta);
      double ss = css(w, mu, phi, theta, t0);
      double aic = neff * std::log(std::max(ss / neff, 1e-300)) + 2.0 * (p + q + 1);
      if (aic < best_aic - 1e-9) {
        best_aic = aic;
        best.p = p;
        best.q = q;
        best_mu = mu;
        best_phi = phi;
        best_theta = theta;
      }
    }
  }

  // refine the selected order by simplex descent on the conditional SS,
  // rejecting non-stationary or non-invertible iterates
  const int p = best.p, q = best.q;
  auto unpack = [&](const std::vector<double>& x, double& m, std::vector<double>& f,
                    std::vector<double>& t) {
    m = x[0];
    f.assign(x.begin() + 1, x.begin() + 1 + p);
    t.assign(x.begin() + 1 + p, x.end());
  };
  auto objective = [&](const std::vector<double>& x) {
    double m;
    std::vector<double> f, t;
    unpack(x, m, f, t);
    if (!stationary(f) || !invertible(t)) return 1e30;
    return css(w, m, f, t, t0);
  };
  std::vector<double> x0{best_mu};
  x0.insert(x0.end(), best_phi.begin(), best_phi.end());
  x0.insert(x0.end(), best_theta.begin(), best_theta.end());
  std::vector<double> xbest = p + q == 0 ? x0 : nelder_mead(objective, x0, 250 * (1 + p + q));
  double mu_f;
  std::vector<double> phi_f, theta_f;
  unpack(xbest, mu_f, phi_f, theta_f);
  if (!stationary(phi_f) || !invertible(theta_f)) {
    mu_f = best_mu;
    phi_f = best_phi;
    theta_f = best_theta;
  }
  best.mean = mu_f;
  best.phi = phi_f;
  best.theta = theta_f;
  best.sigma2 = css(w, mu_f, phi_f, theta_f, t0) / neff;
  return best;
}

/// Incremental walk-forward state over a series the model was not fitted on:
/// push observations one at a time, ask for an h-step-ahead forecast of the
/// original (undifferenced) scale at any point.
class ArimaWalk {
 public:
  explicit ArimaWalk(const ArimaModel& m) : m_(&m) {}

  void push(double y) {
    y_recent_.push_back(y);
    if (static_cast<int>(y_recent_.size()) > m_->d + 1) y_recent_.pop_front();
    if (static_cast<int>(y_recent_.size()) < m_->d + 1) return;
    double w = y;
    if (m_->d > 0) {
      std::vector<double> tmp(y_recent_.begin(), y_recent_.end());
      for (int k = 0; k < m_->d; ++k)
        for (std::size_t i = tmp.size() - 1; i >= 1; --i) tmp[i] -= tmp[i - 1];
      w = tmp.back();
    }
    double pred = one_step_prediction();
    double e = w - pred;
    w_recent_.push_back(w);
    e_recent_.push_back(e);
    if (static_cast<int>(w_recent_.size()) > std::max(1, m_->p)) w_recent_.pop_front();
    if (static_cast<int>(e_recent_.size()) > std::max(1, m_->q)) e_recent_.pop_front();
  }

  /// Iterated h-step forecast with future innovations at zero, undifferenced
  /// back to the original scale.
  double predict(int h) const {
    if (h < 1) throw std::runtime_error("arima forecast: h must be >= 1");
    if (y_recent_.empty()) return m_->mean;
    std::vector<double> w(w_recent_.begin(), w_recent_.end());
    std::vector<double> e(e_recent_.begin(), e_recent_.end());
    std::vector<double> wf;
    for (int k = 0; k < h; ++k) {
      double pred = m_->mean;
      for (int i = 1; i <= m_->p; ++i) {
        int idx = static_cast<int>(w.size()) - i;
        double wv = idx >= 0 ? w[static_cast<std::size_t>(idx)] : m_->mean;
        pred += m_->phi[static_cast<std::size_t>(i) - 1] * (wv - m_->mean);
      }
      for (int j = 1; j <= m_->q; ++j) {
        int idx = static_cast<int>(e.size()) - j;
        double ev = idx >= 0 ? e[static_cast<std::size_t>(idx)] : 0.0;
        pred += m_->theta[static_cast<std::size_t>(j) - 1] * ev;
      }
      w.push_back(pred);
      e.push_back(0.0);
      wf.push_back(pred);
    }
    if (m_->d == 0) return wf.back();
    if (m_->d == 1) {
      double y = y_recent_.back();
      for (double dw : wf) y += dw;
      return y;
    }
    // d == 2
    double y = y_recent_.back();
    double dy = y_recent_.size() >= 2 ? y - y_recent_[y_recent_.size() - 2] : 0.0;
    for (double ddw : wf) {
      dy += ddw;
      y += dy;
    }
    return y;
  }

 private:
  double one_step_prediction() const {
    double pred = m_->mean;
    for (int i = 1; i <= m_->p; ++i) {
      int idx = static_cast<int>(w_recent_.size()) - i;
      double wv = idx >= 0 ? w_recent_[static_cast<std::size_t>(idx)] : m_->mean;
      pred += m_->phi[static_cast<std::size_t>(i) - 1] * (wv - m_->mean);
    }
    for (int j = 1; j <= m_->q; ++j) {
      int idx = static_cast<int>(e_recent_.size()) - j;
      double ev = idx >= 0 ? e_recent_[static_cast<std::size_t>(idx)] : 0.0;
      pred += m_->theta[static_cast<std::size_t>(j) - 1] * ev;
    }
    return pred;
  }

  const ArimaModel* m_;
  std::deque<double> y_recent_;
  std::deque<double> w_recent_;
  std::deque<double> e_recent_;
};

/// h-step forecast from a fitted model and an in-sample history.
inline double arima_forecast(const ArimaModel& m, const std::vector<double>& history, int h) {
  if (h < 1) throw std::runtime_error("arima forecast: h must be >= 1");
  ArimaWalk walk(m);
  for (double y : history) walk.push(y);
  return walk.predict(h);
}

}  // namespace bwpred
