#include <catch2/catch_amalgamated.hpp>

#include "bwpred/topology.hpp"
#include "bwpred/traffic.hpp"

using namespace bwpred;

namespace {
std::vector<int> test_hosts() { return default_topology().hosts(); }
}  // namespace

TEST_CASE("bitrate draws average 2 Mbps") {
  RngStream rng(123);
  TrafficParams p = paper_profile();
  auto hosts = test_hosts();
  double sum = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    FlowSpec f = generate_flow(rng, 0.0, p, hosts, static_cast<std::uint64_t>(i));
    REQUIRE(f.target_bps >= p.bitrate_floor_bps);
    sum += f.target_bps;
  }
  REQUIRE(sum / n == Catch::Approx(2e6).margin(5e4));
}

TEST_CASE("collapsed duration interval pins every flow at 30 s") {
  RngStream rng(9);
  TrafficParams p = paper_profile();
  p.duration_min_s = 30;
  p.duration_max_s = 30;
  auto hosts = test_hosts();
  for (int i = 0; i < 200; ++i) {
    FlowSpec f = generate_flow(rng, 0.0, p, hosts, static_cast<std::uint64_t>(i));
    REQUIRE(f.duration_s == 30.0);
  }
}

TEST_CASE("fixed seed reproduces the first flow field for field") {
  TrafficParams p = paper_profile();
  auto hosts = test_hosts();
  RngStream a(42), b(42);
  FlowSpec f1 = generate_flow(a, 17.0, p, hosts, 1);
  FlowSpec f2 = generate_flow(b, 17.0, p, hosts, 1);
  REQUIRE(f1.protocol == f2.protocol);
  REQUIRE(f1.target_bps == f2.target_bps);
  REQUIRE(f1.duration_s == f2.duration_s);
  REQUIRE(f1.packet_length == f2.packet_length);
  REQUIRE(f1.src == f2.src);
  REQUIRE(f1.dst == f2.dst);
  REQUIRE(f1.server_port == f2.server_port);
  REQUIRE(f1.client_port == f2.client_port);
  REQUIRE(f1.start_s == 17.0);
}

TEST_CASE("draws respect the randomized parameter table") {
  RngStream rng(77);
  TrafficParams p = paper_profile();
  auto hosts = test_hosts();
  int tcp = 0, udp = 0;
  for (int i = 0; i < 5000; ++i) {
    FlowSpec f = generate_flow(rng, 0.0, p, hosts, static_cast<std::uint64_t>(i));
    REQUIRE(f.duration_s >= 30.0);
    REQUIRE(f.duration_s <= 500.0);
    REQUIRE(f.packet_length >= 200);
    REQUIRE(f.packet_length <= 1472);
    REQUIRE(f.server_port >= 5001);
    REQUIRE(f.server_port <= 5500);
    REQUIRE(f.src != f.dst);
    (f.protocol == Protocol::Tcp ? tcp : udp)++;
  }
  // protocol is uniform over the two choices
  REQUIRE(tcp > 2200);
  REQUIRE(udp > 2200);
}

TEST_CASE("inter-arrival draws stay within the profile range") {
  RngStream rng(3);
  TrafficParams p = congested_profile();
  for (int i = 0; i < 1000; ++i) {
    double d = draw_interarrival(rng, p);
    REQUIRE(d >= p.interarrival_min_s);
    REQUIRE(d < p.interarrival_max_s);
  }
}

TEST_CASE("profile json round-trips the seven parameters") {
  TrafficParams p = congested_profile();
  TrafficParams q = traffic_params_from_json(traffic_params_to_json(p));
  REQUIRE(q.name == p.name);
  REQUIRE(q.bitrate_mean_bps == p.bitrate_mean_bps);
  REQUIRE(q.bitrate_std_bps == p.bitrate_std_bps);
  REQUIRE(q.duration_min_s == p.duration_min_s);
  REQUIRE(q.duration_max_s == p.duration_max_s);
  REQUIRE(q.packet_length_min == p.packet_length_min);
  REQUIRE(q.packet_length_max == p.packet_length_max);
  REQUIRE(q.interarrival_min_s == p.interarrival_min_s);
  REQUIRE(q.interarrival_max_s == p.interarrival_max_s);
  REQUIRE(q.server_port_min == p.server_port_min);
  REQUIRE(q.server_port_max == p.server_port_max);
}

TEST_CASE("invalid profiles are rejected at load") {
  nlohmann::json j = traffic_params_to_json(paper_profile());
  j["interarrival_range_s"] = {0.0, 5.0};
  REQUIRE_THROWS(traffic_params_from_json(j));
}
