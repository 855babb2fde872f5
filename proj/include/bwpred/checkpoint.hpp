#pragma once

#include <cstdint>
#include <cstring>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "bwpred/arima.hpp"
#include "bwpred/features.hpp"
#include "bwpred/lstm.hpp"
#include "bwpred/mlp.hpp"

namespace bwpred {

inline constexpr char kCheckpointMagic[8] = "BWPRED1";  // 7 bytes on the wire
inline constexpr std::uint8_t kCheckpointVersion = 1;

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NamedArray {
  std::string name;
  std::vector<std::int64_t> shape;
  const std::vector<double>* data = nullptr;
};

/// Layout: "BWPRED1" + version byte + u32 LE header length + JSON header +
/// concatenated little-endian f64 arrays in header order. Byte offsets in the
/// header are relative to the start of the payload.
inline std::string save_checkpoint(const std::string& kind, const std::vector<NamedArray>& arrays,
                                   const nlohmann::json& hyper, const Scaler& scaler,
                                   const std::string& schema_hash) {
  nlohmann::json harrays = nlohmann::json::array();
  std::uint64_t offset = 0;
  std::uint64_t param_count = 0;
  for (const NamedArray& a : arrays) {
    harrays.push_back({{"name", a.name},
                       {"shape", a.shape},
                       {"offset", offset},
                       {"count", a.data->size()}});
    offset += a.data->size() * sizeof(double);
    param_count += a.data->size();
  }
  nlohmann::json header{{"kind", kind},
                        {"hyper", hyper},
                        {"scaler", {{"min", scaler.mn}, {"max", scaler.mx}}},
                        {"schema_hash", schema_hash},
                        {"param_count", param_count},
                        {"arrays", harrays}};
  std::string hs = header.dump();

  std::string out;
  out.reserve(12 + hs.size() + offset);
  out.append(kCheckpointMagic, 7);
  out.push_back(static_cast<char>(kCheckpointVersion));
  std::uint32_t hlen = static_cast<std::uint32_t>(hs.size());
  char lenbuf[4];
  std::memcpy(lenbuf, &hlen, 4);
  out.append(lenbuf, 4);
  out += hs;
  for (const NamedArray& a : arrays) {
    const char* p = reinterpret_cast<const char*>(a.data->data());
    out.append(p, a.data->size() * sizeof(double));
  }
  return out;
}

struct Checkpoint {
  std::string kind;
  nlohmann::json hyper;
  Scaler scaler;
  std::string schema_hash;
  std::map<std::string, std::pair<std::vector<std::int64_t>, std::vector<double>>> arrays;

  const std::vector<double>& array(const std::string& name) const {
    auto it = arrays.find(name);
    if (it == arrays.end()) throw CheckpointError("checkpoint missing array: " + name);
    return it->second.second;
  }
};

inline Checkpoint load_checkpoint(std::string_view bytes) {
  if (bytes.size() < 12) throw CheckpointError("checkpoint truncated: no header");
  if (std::memcmp(bytes.data(), kCheckpointMagic, 7) != 0)
    throw CheckpointError("bad checkpoint magic");
  std::uint8_t version = static_cast<std::uint8_t>(bytes[7]);
  if (version != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  std::uint32_t hlen = 0;
  std::memcpy(&hlen, bytes.data() + 8, 4);
  if (12 + static_cast<std::size_t>(hlen) > bytes.size())
    throw CheckpointError("checkpoint truncated: header extends past end");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(12, hlen));
  } catch (const nlohmann::json::parse_error& e) {
    throw CheckpointError(std::string("corrupt checkpoint header: ") + e.what());
  }

  Checkpoint c;
  c.kind = header.at("kind").get<std::string>();
  c.hyper = header.at("hyper");
  c.scaler.mn = header.at("scaler").at("min").get<std::vector<double>>();
  c.scaler.mx = header.at("scaler").at("max").get<std::vector<double>>();
  c.schema_hash = header.at("schema_hash").get<std::string>();
  if (c.schema_hash != dataset_schema_hash())
    throw CheckpointError("checkpoint schema hash mismatch: model was built for '" +
                          c.schema_hash + "', this build expects '" + dataset_schema_hash() +
                          "'");

  std::string_view payload = bytes.substr(12 + hlen);
  std::size_t expected_end = 0;
  for (const auto& ja : header.at("arrays")) {
    std::string name = ja.at("name").get<std::string>();
    std::uint64_t offset = ja.at("offset").get<std::uint64_t>();
    std::uint64_t count = ja.at("count").get<std::uint64_t>();
    if (offset + count * sizeof(double) > payload.size())
      throw CheckpointError("checkpoint truncated: array '" + name + "' extends past end");
    std::vector<double> data(count);
    std::memcpy(data.data(), payload.data() + offset, count * sizeof(double));
    c.arrays[name] = {ja.at("shape").get<std::vector<std::int64_t>>(), std::move(data)};
    expected_end = std::max(expected_end, static_cast<std::size_t>(offset + count * sizeof(double)));
  }
  if (payload.size() != expected_end)
    throw CheckpointError("checkpoint payload size mismatch");
  return c;
}

// -- model adapters ---------------------------------------------------------

inline std::string checkpoint_from_mlp(const MlpModel& m, const Scaler& scaler) {
  std::vector<NamedArray> arrays;
  for (std::size_t l = 0; l < m.w.size(); ++l) {
    arrays.push_back({"w" + std::to_string(l), {m.sizes[l + 1], m.sizes[l]}, &m.w[l]});
    arrays.push_back({"b" + std::to_string(l), {m.sizes[l + 1]}, &m.b[l]});
  }
  nlohmann::json hyper{{"sizes", m.sizes}};
  return save_checkpoint("mlp", arrays, hyper, scaler, dataset_schema_hash());
}

inline MlpModel mlp_from_checkpoint(const Checkpoint& c) {
  if (c.kind != "mlp") throw CheckpointError("expected an mlp checkpoint, got " + c.kind);
  MlpModel m;
  m.sizes = c.hyper.at("sizes").get<std::vector<int>>();
  for (int l = 0; l + 1 < static_cast<int>(m.sizes.size()); ++l) {
    m.w.push_back(c.array("w" + std::to_string(l)));
    m.b.push_back(c.array("b" + std::to_string(l)));
    if (m.w.back().size() !=
        static_cast<std::size_t>(m.sizes[l]) * static_cast<std::size_t>(m.sizes[l + 1]))
      throw CheckpointError("mlp checkpoint: array shape mismatch at layer " + std::to_string(l));
  }
  m.refresh_caches();
  return m;
}

inline std::string checkpoint_from_lstm(const LstmModel& m, const Scaler& scaler) {
  std::vector<NamedArray> arrays{
      {"wx", {4 * m.hidden, m.input}, &m.wx},   {"wh", {4 * m.hidden, m.hidden}, &m.wh},
      {"bg", {4 * m.hidden}, &m.bg},            {"wd", {m.dense, m.hidden}, &m.wd},
      {"bd", {m.dense}, &m.bd},                 {"wo", {1, m.dense}, &m.wo},
      {"bo", {1}, &m.bo}};
  nlohmann::json hyper{{"input", m.input},
                       {"hidden", m.hidden},
                       {"dense", m.dense},
                       {"window", m.window}};
  return save_checkpoint("lstm", arrays, hyper, scaler, dataset_schema_hash());
}

inline LstmModel lstm_from_checkpoint(const Checkpoint& c) {
  if (c.kind != "lstm") throw CheckpointError("expected an lstm checkpoint, got " + c.kind);
  LstmModel m;
  m.input = c.hyper.at("input").get<int>();
  m.hidden = c.hyper.at("hidden").get<int>();
  m.dense = c.hyper.at("dense").get<int>();
  m.window = c.hyper.at("window").get<int>();
  m.wx = c.array("wx");
  m.wh = c.array("wh");
  m.bg = c.array("bg");
  m.wd = c.array("wd");
  m.bd = c.array("bd");
  m.wo = c.array("wo");
  m.bo = c.array("bo");
  if (m.wx.size() != static_cast<std::size_t>(4 * m.hidden) * m.input)
    throw CheckpointError("lstm checkpoint: array shape mismatch");
  m.refresh_caches();
  return m;
}

inline std::string checkpoint_from_arima(const ArimaModel& m, const Scaler& scaler) {
  std::vector<NamedArray> arrays{{"phi", {m.p}, &m.phi}, {"theta", {m.q}, &m.theta}};
  nlohmann::json hyper{
      {"p", m.p}, {"d", m.d}, {"q", m.q}, {"mean", m.mean}, {"sigma2", m.sigma2}};
  return save_checkpoint("arima", arrays, hyper, scaler, dataset_schema_hash());
}

inline ArimaModel arima_from_checkpoint(const Checkpoint& c) {
  if (c.kind != "arima") throw CheckpointError("expected an arima checkpoint, got " + c.kind);
  ArimaModel m;
  m.p = c.hyper.at("p").get<int>();
  m.d = c.hyper.at("d").get<int>();
  m.q = c.hyper.at("q").get<int>();
  m.mean = c.hyper.at("mean").get<double>();
  m.sigma2 = c.hyper.at("sigma2").get<double>();
  m.phi = c.array("phi");
  m.theta = c.array("theta");
  return m;
}

}  // namespace bwpred
