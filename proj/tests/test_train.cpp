#include <catch2/catch_amalgamated.hpp>

#include "bwpred/train.hpp"

using namespace bwpred;

namespace {

// rows x 116 feature matrix filled uniformly at random
std::vector<double> random_features(RngStream& rng, std::size_t rows, int width = 116) {
  std::vector<double> x(rows * static_cast<std::size_t>(width));
  for (double& v : x) v = rng.uniform(0, 1);
  return x;
}

}  // namespace

TEST_CASE("a constant target is learned to numerical silence") {
  RngStream rng(9);
  const std::size_t n = 1500;
  std::vector<double> x = random_features(rng, n);
  std::vector<double> y(n, 0.3);
  TrainConfig cfg;
  cfg.seed = 4;
  MlpFit fit = fit_mlp(x, y, cfg);
  REQUIRE(fit.epoch_mse.back() < 1e-4);
  auto preds = mlp_predict(fit.model, x.data(), 64);
  for (double p : preds) REQUIRE(p == Catch::Approx(0.3).margin(0.05));
}

TEST_CASE("a linear rule is learned within ten epochs") {
  RngStream rng(11);
  const std::size_t n = 3000;
  std::vector<double> x = random_features(rng, n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = 0.5 * x[i * 116 + 0];
  TrainConfig cfg;
  cfg.seed = 1;
  MlpFit fit = fit_mlp(x, y, cfg);
  REQUIRE(fit.epoch_mse.size() == 10);
  REQUIRE(fit.epoch_mse.back() < 1e-3);
  // training loss fell by well over the 10% sanity bar
  REQUIRE(fit.epoch_mse.back() < 0.9 * fit.epoch_mse.front());
}

TEST_CASE("mlp training is bitwise deterministic per seed") {
  RngStream rng(3);
  const std::size_t n = 600;
  std::vector<double> x = random_features(rng, n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i * 116 + 5];
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.seed = 42;
  MlpFit a = fit_mlp(x, y, cfg);
  MlpFit b = fit_mlp(x, y, cfg);
  REQUIRE(a.model.w == b.model.w);
  REQUIRE(a.model.b == b.model.b);
  REQUIRE(a.epoch_mse == b.epoch_mse);
  cfg.seed = 43;
  MlpFit c = fit_mlp(x, y, cfg);
  REQUIRE(a.model.w != c.model.w);
}

TEST_CASE("lstm learns a persistent signal on windowed series") {
  // target = current max_bitrate (last feature), constant within a ramp
  RngStream rng(15);
  const std::size_t n = 800;
  std::vector<double> x(n * 116, 0.0);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double level = 0.2 + 0.6 * ((i / 50) % 2);  // square wave
    for (int c = 0; c < 116; ++c) x[i * 116 + static_cast<std::size_t>(c)] = rng.uniform(0, 0.05);
    x[i * 116 + 115] = level;
    y[i] = level;
  }
  TrainConfig cfg;
  cfg.seed = 2;
  cfg.epochs = 10;
  cfg.lstm_window = 10;
  cfg.lstm_stride = 10;
  LstmFit fit = fit_lstm({{x.data(), y.data(), n}}, cfg, 116, 24, 16);
  REQUIRE(fit.epoch_mse.back() < 0.01);
  REQUIRE(fit.epoch_mse.back() < 0.9 * fit.epoch_mse.front());
  auto preds = lstm_predict_series(fit.model, x.data(), n);
  double err = 0;
  for (std::size_t i = 20; i < n; ++i) err += std::fabs(preds[i] - y[i]);
  err /= static_cast<double>(n - 20);
  REQUIRE(err < 0.08);
}

TEST_CASE("lstm training is deterministic and respects series boundaries") {
  RngStream rng(21);
  const std::size_t n = 300;
  std::vector<double> x = random_features(rng, n);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i * 116 + 115];
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.seed = 7;
  cfg.lstm_window = 10;
  LstmFit a = fit_lstm({{x.data(), y.data(), n}}, cfg, 116, 8, 8);
  LstmFit b = fit_lstm({{x.data(), y.data(), n}}, cfg, 116, 8, 8);
  REQUIRE(a.model.wx == b.model.wx);
  REQUIRE(a.model.wh == b.model.wh);
  REQUIRE(a.epoch_mse == b.epoch_mse);

  // a series shorter than the window contributes no windows
  std::vector<double> shorty(9 * 116, 0.1);
  std::vector<double> shy(9, 0.1);
  REQUIRE_THROWS(fit_lstm({{shorty.data(), shy.data(), 9}}, cfg, 116, 8, 8));
}

TEST_CASE("degenerate training configs are rejected") {
  std::vector<double> x(116, 0.0);
  std::vector<double> y(1, 0.0);
  TrainConfig cfg;
  cfg.batch = 0;
  REQUIRE_THROWS(fit_mlp(x, y, cfg));
  cfg = TrainConfig{};
  cfg.epochs = 0;
  REQUIRE_THROWS(fit_mlp(x, y, cfg));
  cfg = TrainConfig{};
  REQUIRE_THROWS(fit_mlp({}, {}, cfg));
}
