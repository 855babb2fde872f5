#include <catch2/catch_amalgamated.hpp>

#include "bwpred/checkpoint.hpp"

using namespace bwpred;

namespace {

Scaler dummy_scaler() {
  Scaler s;
  s.mn.assign(kInputFeatures, 0.0);
  s.mx.assign(kInputFeatures, 1.0);
  s.mn[3] = -2.5;
  s.mx[3] = 17.25;
  return s;
}

}  // namespace

TEST_CASE("save, load, save is byte-identical") {
  MlpModel m = mlp_init(9);
  std::string bytes = checkpoint_from_mlp(m, dummy_scaler());
  Checkpoint c = load_checkpoint(bytes);
  MlpModel back = mlp_from_checkpoint(c);
  std::string again = checkpoint_from_mlp(back, c.scaler);
  REQUIRE(bytes == again);

  LstmModel l = lstm_init(9, 8, 6, 5, 4);
  std::string lb = checkpoint_from_lstm(l, dummy_scaler());
  Checkpoint lc = load_checkpoint(lb);
  REQUIRE(checkpoint_from_lstm(lstm_from_checkpoint(lc), lc.scaler) == lb);

  ArimaModel a;
  a.p = 2;
  a.q = 1;
  a.d = 1;
  a.phi = {0.4, -0.1};
  a.theta = {0.2};
  a.mean = 0.01;
  a.sigma2 = 1e-4;
  std::string ab = checkpoint_from_arima(a, dummy_scaler());
  Checkpoint ac = load_checkpoint(ab);
  REQUIRE(checkpoint_from_arima(arima_from_checkpoint(ac), ac.scaler) == ab);
}

TEST_CASE("loaded model predicts identically") {
  MlpModel m = mlp_init(4, {6, 5, 1});
  std::string bytes = checkpoint_from_mlp(m, dummy_scaler());
  MlpModel back = mlp_from_checkpoint(load_checkpoint(bytes));
  RngStream rng(3);
  std::vector<double> x(30);
  for (double& v : x) v = rng.uniform(-1, 1);
  REQUIRE(mlp_predict(m, x.data(), 5, false) == mlp_predict(back, x.data(), 5, false));
}

TEST_CASE("default MLP declares the full parameter count in its header") {
  MlpModel m = mlp_init(1);
  std::string bytes = checkpoint_from_mlp(m, dummy_scaler());
  std::uint32_t hlen = 0;
  std::memcpy(&hlen, bytes.data() + 8, 4);
  nlohmann::json header = nlohmann::json::parse(bytes.substr(12, hlen));
  // 116*256 + 256 + 256*128 + 128 + 128*64 + 64 + 64*1 + 1
  std::int64_t want = 116 * 256 + 256 + 256 * 128 + 128 + 128 * 64 + 64 + 64 * 1 + 1;
  REQUIRE(want == 71169);
  REQUIRE(header.at("param_count").get<std::int64_t>() == want);
}

TEST_CASE("tampered schema hash is refused") {
  MlpModel m = mlp_init(2, {3, 2, 1});
  std::vector<NamedArray> arrays;
  for (std::size_t l = 0; l < m.w.size(); ++l) {
    arrays.push_back({"w" + std::to_string(l), {m.sizes[l + 1], m.sizes[l]}, &m.w[l]});
    arrays.push_back({"b" + std::to_string(l), {m.sizes[l + 1]}, &m.b[l]});
  }
  std::string bytes = save_checkpoint("mlp", arrays, {{"sizes", m.sizes}}, dummy_scaler(),
                                      "0000000000000000");
  REQUIRE_THROWS_WITH(load_checkpoint(bytes),
                      Catch::Matchers::ContainsSubstring("schema hash"));
}

TEST_CASE("bad magic, version, and truncation are detected") {
  MlpModel m = mlp_init(2, {3, 2, 1});
  std::string bytes = checkpoint_from_mlp(m, dummy_scaler());

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  REQUIRE_THROWS_WITH(load_checkpoint(bad_magic), Catch::Matchers::ContainsSubstring("magic"));

  std::string bad_version = bytes;
  bad_version[7] = 9;
  REQUIRE_THROWS_WITH(load_checkpoint(bad_version),
                      Catch::Matchers::ContainsSubstring("version"));

  std::string truncated = bytes.substr(0, bytes.size() - 5);
  REQUIRE_THROWS_WITH(load_checkpoint(truncated),
                      Catch::Matchers::ContainsSubstring("truncated"));

  REQUIRE_THROWS_WITH(load_checkpoint("BWP"), Catch::Matchers::ContainsSubstring("truncated"));

  std::string padded = bytes + "extra";
  REQUIRE_THROWS_WITH(load_checkpoint(padded),
                      Catch::Matchers::ContainsSubstring("size mismatch"));
}
