#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bwpred/rng.hpp"

namespace bwpred {

enum class Protocol { Tcp, Udp };

inline const char* protocol_name(Protocol p) { return p == Protocol::Tcp ? "TCP" : "UDP"; }
inline int protocol_number(Protocol p) { return p == Protocol::Tcp ? 6 : 17; }

struct FlowSpec {
  std::uint64_t id = 0;
  Protocol protocol = Protocol::Tcp;
  double target_bps = 0.0;
  double duration_s = 0.0;
  int packet_length = 0;   // bytes
  double start_s = 0.0;
  int src = -1;            // host node index
  int dst = -1;            // host node index
  int server_port = 0;
  int client_port = 0;
};

/// The randomized flow parameters: bitrate Normal(2 Mbps, 500 Kbps),
/// duration U[30,500] s, packet length U[200,1472] B, server port
/// U[5001,5500], protocol and src/dst pair uniform, plus the flow
/// inter-arrival range that paces the arrival process.
struct TrafficParams {
  std::string name = "paper";
  double bitrate_mean_bps = 2e6;
  double bitrate_std_bps = 5e5;
  double bitrate_floor_bps = 1e5;  // redraw below this
  double duration_min_s = 30.0;
  double duration_max_s = 500.0;
  int packet_length_min = 200;
  int packet_length_max = 1472;
  double interarrival_min_s = 20.0;
  double interarrival_max_s = 2000.0;
  int server_port_min = 5001;
  int server_port_max = 5500;

  void validate() const {
    if (bitrate_mean_bps <= 0 || bitrate_std_bps < 0 || bitrate_floor_bps <= 0)
      throw std::runtime_error("traffic profile: bad bitrate parameters");
    if (duration_min_s <= 0 || duration_max_s < duration_min_s)
      throw std::runtime_error("traffic profile: bad duration range");
    if (packet_length_min <= 0 || packet_length_max < packet_length_min)
      throw std::runtime_error("traffic profile: bad packet length range");
    if (interarrival_min_s <= 0 || interarrival_max_s < interarrival_min_s)
      throw std::runtime_error("traffic profile: bad inter-arrival range");
    if (server_port_min <= 0 || server_port_max < server_port_min)
      throw std::runtime_error("traffic profile: bad port range");
  }
};

inline TrafficParams paper_profile() { return TrafficParams{}; }

/// Sparse arrivals almost never load a 100 Mbps link at desk scale, so this
/// profile packs arrivals tightly enough that the funnel links in the default
/// topology regularly approach and occasionally reach capacity.
inline TrafficParams congested_profile() {
  TrafficParams p;
  p.name = "congested";
  p.interarrival_min_s = 0.5;
  p.interarrival_max_s = 3.5;
  return p;
}

inline TrafficParams traffic_params_from_json(const nlohmann::json& j) {
  TrafficParams p;
  p.name = j.value("name", std::string("custom"));
  p.bitrate_mean_bps = j.value("bitrate_mean_bps", p.bitrate_mean_bps);
  p.bitrate_std_bps = j.value("bitrate_std_bps", p.bitrate_std_bps);
  p.bitrate_floor_bps = j.value("bitrate_floor_bps", p.bitrate_floor_bps);
  if (j.contains("duration_range_s")) {
    p.duration_min_s = j["duration_range_s"].at(0).get<double>();
    p.duration_max_s = j["duration_range_s"].at(1).get<double>();
  }
  if (j.contains("packet_length_range_b")) {
    p.packet_length_min = j["packet_length_range_b"].at(0).get<int>();
    p.packet_length_max = j["packet_length_range_b"].at(1).get<int>();
  }
  if (j.contains("interarrival_range_s")) {
    p.interarrival_min_s = j["interarrival_range_s"].at(0).get<double>();
    p.interarrival_max_s = j["interarrival_range_s"].at(1).get<double>();
  }
  if (j.contains("server_port_range")) {
    p.server_port_min = j["server_port_range"].at(0).get<int>();
    p.server_port_max = j["server_port_range"].at(1).get<int>();
  }
  p.validate();
  return p;
}

inline nlohmann::json traffic_params_to_json(const TrafficParams& p) {
  return nlohmann::json{{"name", p.name},
                        {"protocol", "uniform TCP/UDP"},
                        {"bitrate_mean_bps", p.bitrate_mean_bps},
                        {"bitrate_std_bps", p.bitrate_std_bps},
                        {"bitrate_floor_bps", p.bitrate_floor_bps},
                        {"duration_range_s", {p.duration_min_s, p.duration_max_s}},
                        {"packet_length_range_b", {p.packet_length_min, p.packet_length_max}},
                        {"interarrival_range_s", {p.interarrival_min_s, p.interarrival_max_s}},
                        {"src_dst", "uniform over distinct host pairs"},
                        {"server_port_range", {p.server_port_min, p.server_port_max}}};
}

/// Draws one flow starting at `clock`. The draw order (protocol, bitrate,
/// duration, packet length, host pair, server port, client port) is part of
/// the determinism contract; do not reorder.
inline FlowSpec generate_flow(RngStream& rng, double clock, const TrafficParams& p,
                              const std::vector<int>& hosts, std::uint64_t id) {
  if (hosts.size() < 2) throw std::runtime_error("need at least two hosts for traffic");
  FlowSpec f;
  f.id = id;
  f.start_s = clock;
  f.protocol = rng.uniform_int(0, 1) == 0 ? Protocol::Tcp : Protocol::Udp;
  do {
    f.target_bps = rng.normal(p.bitrate_mean_bps, p.bitrate_std_bps);
  } while (f.target_bps < p.bitrate_floor_bps);
  f.duration_s = rng.uniform(p.duration_min_s, p.duration_max_s);
  f.packet_length = static_cast<int>(rng.uniform_int(p.packet_length_min, p.packet_length_max));
  auto n = static_cast<std::int64_t>(hosts.size());
  std::int64_t pair = rng.uniform_int(0, n * (n - 1) - 1);
  std::int64_t si = pair / (n - 1);
  std::int64_t di = pair % (n - 1);
  if (di >= si) ++di;
  f.src = hosts[static_cast<std::size_t>(si)];
  f.dst = hosts[static_cast<std::size_t>(di)];
  f.server_port = static_cast<int>(rng.uniform_int(p.server_port_min, p.server_port_max));
  f.client_port = static_cast<int>(rng.uniform_int(32768, 60999));
  return f;
}

inline double draw_interarrival(RngStream& rng, const TrafficParams& p) {
  return rng.uniform(p.interarrival_min_s, p.interarrival_max_s);
}

}  // namespace bwpred
