#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <filesystem>

#include "bwpred/telemetry.hpp"

using namespace bwpred;
namespace fs = std::filesystem;

namespace {

ActiveFlow make_flow(Protocol proto, double rate_bps, int packet_len, double start,
                     double elapsed) {
  ActiveFlow f;
  f.spec.id = 1;
  f.spec.protocol = proto;
  f.spec.target_bps = rate_bps;
  f.spec.packet_length = packet_len;
  f.spec.start_s = start;
  f.spec.src = 5;  // h1 in the default topology node order
  f.spec.dst = 9;  // h5
  f.spec.server_port = 5001;
  f.spec.client_port = 40000;
  f.rate_bps = rate_bps;
  f.segments.push_back({start, rate_bps});
  f.delivered_bytes = rate_bps * elapsed / 8.0;
  return f;
}

struct TmpDir {
  fs::path path;
  TmpDir() {
    path = fs::temp_directory_path() /
           ("bwpred_test_" +
            std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
    fs::create_directories(path);
  }
  ~TmpDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("UDP flow record matches closed-form rate arithmetic") {
  Topology topo = default_topology();
  ActiveFlow f = make_flow(Protocol::Udp, 2e6, 1472, 0.0, 30.0);
  FlowRecordView r = flow_record_view(topo, 1500000000, f, 30.0);
  REQUIRE(r.total_fpackets == 5095);  // floor(30 * 2e6 / 8 / 1472)
  REQUIRE(r.total_fvolume == Catch::Approx(7.5e6));
  REQUIRE(r.mean_fiat == Catch::Approx(1472.0 * 8 / 2e6).epsilon(1e-12));  // 5.888 ms
  REQUIRE(r.min_fiat == r.max_fiat);
  REQUIRE(r.std_fiat == 0.0);
  REQUIRE(r.proto == 17);
  // UDP has no backward traffic and no TCP flags
  REQUIRE(r.total_bpackets == 0);
  REQUIRE(r.total_bvolume == 0.0);
  REQUIRE(r.fpsh_cnt == 0);
  REQUIRE(r.total_fhlen == 28.0 * 5095);
}

TEST_CASE("TCP flow record follows the construction rules") {
  Topology topo = default_topology();
  ActiveFlow f = make_flow(Protocol::Tcp, 2e6, 1000, 10.0, 20.0);
  FlowRecordView r = flow_record_view(topo, 1500000000, f, 30.0);
  REQUIRE(r.proto == 6);
  REQUIRE(r.furg_cnt == 0);
  REQUIRE(r.burg_cnt == 0);
  REQUIRE(r.total_fhlen == 40.0 * static_cast<double>(r.total_fpackets));
  REQUIRE(r.fpsh_cnt == r.total_fpackets);
  // one 40-byte ACK per two data packets
  REQUIRE(r.total_bpackets == r.total_fpackets / 2);
  REQUIRE(r.total_bvolume == 40.0 * static_cast<double>(r.total_bpackets));
  REQUIRE(r.mean_biat == Catch::Approx(2.0 * r.mean_fiat));
  REQUIRE(r.first_ts == Catch::Approx(1500000010.0));
  REQUIRE(r.last_ts == Catch::Approx(1500000030.0));
  REQUIRE(r.duration == Catch::Approx(20.0));
}

TEST_CASE("rate changes pool inter-arrival statistics across segments") {
  Topology topo = default_topology();
  ActiveFlow f = make_flow(Protocol::Udp, 4e6, 1000, 0.0, 0.0);
  f.segments.clear();
  f.segments.push_back({0.0, 4e6});   // 10 s at 4 Mbps -> iat 2 ms, 5000 pkts
  f.segments.push_back({10.0, 1e6});  // 10 s at 1 Mbps -> iat 8 ms, 1250 pkts
  f.delivered_bytes = (4e6 * 10 + 1e6 * 10) / 8.0;
  FlowRecordView r = flow_record_view(topo, 1500000000, f, 20.0);
  double iat_a = 1000 * 8 / 4e6, iat_b = 1000 * 8 / 1e6;
  REQUIRE(r.min_fiat == Catch::Approx(iat_a));
  REQUIRE(r.max_fiat == Catch::Approx(iat_b));
  double wa = 5000, wb = 1250;
  double mean = (iat_a * wa + iat_b * wb) / (wa + wb);
  REQUIRE(r.mean_fiat == Catch::Approx(mean).epsilon(1e-9));
  REQUIRE(r.std_fiat > 0.0);
  REQUIRE(r.min_fiat <= r.mean_fiat);
  REQUIRE(r.mean_fiat <= r.max_fiat);
}

TEST_CASE("idle episodes split the flow into subflows") {
  Topology topo = default_topology();
  ActiveFlow f = make_flow(Protocol::Udp, 2e6, 1000, 0.0, 0.0);
  f.segments.clear();
  f.segments.push_back({0.0, 2e6});   // active 10 s
  f.segments.push_back({10.0, 0.0});  // idle 5 s
  f.segments.push_back({15.0, 2e6});  // active 5 s
  f.delivered_bytes = 2e6 * 15 / 8.0;
  FlowRecordView r = flow_record_view(topo, 1500000000, f, 20.0);
  REQUIRE(r.min_active == Catch::Approx(5.0));
  REQUIRE(r.max_active == Catch::Approx(10.0));
  REQUIRE(r.mean_active == Catch::Approx(7.5));
  REQUIRE(r.min_idle == Catch::Approx(5.0));
  REQUIRE(r.max_idle == Catch::Approx(5.0));
  // two active episodes -> per-subflow counters halve the totals
  REQUIRE(r.sflow_fpackets == Catch::Approx(static_cast<double>(r.total_fpackets) / 2.0));
  REQUIRE(r.sflow_fbytes == Catch::Approx(r.total_fvolume / 2.0));
}

TEST_CASE("cpu shares always sum to 100") {
  SimConfig cfg;
  cfg.duration_s = 120;
  cfg.sample_interval_s = 3;
  Simulator sim(default_topology(), congested_profile(), 21, cfg);
  SystemSampler sampler(21, TelemetryNoise{});
  sim.run([&](Simulator& s, std::int64_t, double) {
    sampler.begin_tick(s);
    for (const Interface& it : s.interfaces()) {
      SystemStats st = sampler.sample(s, it);
      double sum = st.cpu_usr + st.cpu_sys + st.cpu_idl + st.cpu_wai + st.cpu_stl;
      REQUIRE(sum == Catch::Approx(100.0).margin(0.5));
      for (double v : system_stats_values(st)) REQUIRE(v >= 0.0);
    }
  });
}

TEST_CASE("bitrate pair equals the per-direction interval rates exactly") {
  TrafficParams p = congested_profile();
  p.bitrate_std_bps = 0;
  p.bitrate_mean_bps = 5e7;  // one 50 Mbps flow
  p.duration_min_s = p.duration_max_s = 500;
  p.interarrival_min_s = p.interarrival_max_s = 3.0;
  SimConfig cfg;
  cfg.duration_s = 60;
  cfg.sample_interval_s = 3;
  cfg.max_flows = 1;
  Simulator sim(default_topology(), p, 4, cfg);
  SystemSampler sampler(4, TelemetryNoise{});
  bool saw_load = false;
  sim.run([&](Simulator& s, std::int64_t, double t) {
    sampler.begin_tick(s);
    for (const Interface& it : s.interfaces()) {
      SystemStats st = sampler.sample(s, it);
      double down = s.interval_bytes(s.download_dir(it)) * 8.0 / 3.0;
      double up = s.interval_bytes(s.upload_dir(it)) * 8.0 / 3.0;
      REQUIRE(st.download_bitrate == down);
      REQUIRE(st.upload_bitrate == up);
      REQUIRE(st.download_bitrate / s.capacity_of_dir(s.download_dir(it)) ==
              s.utilization_interval(s.download_dir(it)));
      if (t > 6.0 && st.download_bitrate > 0) {
        REQUIRE(st.download_bitrate == Catch::Approx(5e7).epsilon(1e-6));
        saw_load = true;
      }
    }
  });
  REQUIRE(saw_load);
}

TEST_CASE("flow records from a live simulation keep their distribution invariants") {
  SimConfig cfg;
  cfg.duration_s = 300;
  cfg.sample_interval_s = 3;
  Simulator sim(default_topology(), congested_profile(), 31, cfg);
  std::int64_t records = 0;
  sim.run([&](Simulator& s, std::int64_t, double t) {
    for (const Interface& it : s.interfaces()) {
      for (const FlowRecordView& r : snapshot_flows(s, it, t)) {
        ++records;
        auto check = [](double mn, double mean, double mx, double sd) {
          REQUIRE(mn <= mean + 1e-12);
          REQUIRE(mean <= mx + 1e-12);
          REQUIRE(sd >= 0.0);
        };
        check(r.min_fpktl, r.mean_fpktl, r.max_fpktl, r.std_fpktl);
        check(r.min_bpktl, r.mean_bpktl, r.max_bpktl, r.std_bpktl);
        check(r.min_fiat, r.mean_fiat, r.max_fiat, r.std_fiat);
        check(r.min_biat, r.mean_biat, r.max_biat, r.std_biat);
        check(r.min_active, r.mean_active, r.max_active, r.std_active);
        check(r.min_idle, r.mean_idle, r.max_idle, r.std_idle);
        REQUIRE(r.duration >= 0.0);
        REQUIRE(r.total_fpackets >= 0);
        REQUIRE(r.total_fvolume >= 0.0);
      }
    }
  });
  REQUIRE(records > 1000);
}

TEST_CASE("telemetry files carry 3-second timestamps and shared tick stamps") {
  TmpDir tmp;
  SimConfig cfg;
  cfg.duration_s = 30;
  cfg.sample_interval_s = 3;
  cfg.monitored = {"r1.l01", "r1.l09"};
  Simulator sim(default_topology(), congested_profile(), 8, cfg);
  TelemetryWriter writer(tmp.path.string(), 8);
  sim.run([&](Simulator& s, std::int64_t k, double t) { writer.on_tick(s, k, t); });

  CsvTable a = read_csv((tmp.path / "r1.l01" / "system.csv").string());
  CsvTable b = read_csv((tmp.path / "r1.l09" / "system.csv").string());
  REQUIRE(a.rows.size() == 10);
  REQUIRE(a.header.size() == 30);  // timestamp + 29 stats
  for (std::size_t i = 1; i < a.rows.size(); ++i)
    REQUIRE(parse_int(a.rows[i][0]) - parse_int(a.rows[i - 1][0]) == 3);
  // same router, same tick, same timestamp
  for (std::size_t i = 0; i < a.rows.size(); ++i) REQUIRE(a.rows[i][0] == b.rows[i][0]);
  // one flow file per tick, named by the epoch stamp
  for (const auto& row : a.rows) {
    fs::path f = tmp.path / "r1.l01" / ("flows_" + row[0] + ".csv");
    REQUIRE(fs::exists(f));
  }
  CsvTable flows = read_csv((tmp.path / "r1.l01" / ("flows_" + a.rows[0][0] + ".csv")).string());
  REQUIRE(flows.header.size() == 46);
}

TEST_CASE("telemetry is byte-identical for identical seed and config") {
  auto run_once = [](const fs::path& dir) {
    SimConfig cfg;
    cfg.duration_s = 60;
    cfg.sample_interval_s = 3;
    cfg.monitored = {"r1.l09", "r3.l05"};
    Simulator sim(default_topology(), congested_profile(), 77, cfg);
    TelemetryWriter writer(dir.string(), 77);
    sim.run([&](Simulator& s, std::int64_t k, double t) { writer.on_tick(s, k, t); });
  };
  TmpDir t1, t2;
  run_once(t1.path);
  run_once(t2.path);
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(t1.path)) {
    if (!e.is_regular_file()) continue;
    ++files;
    fs::path rel = fs::relative(e.path(), t1.path);
    REQUIRE(read_file(e.path().string()) == read_file((t2.path / rel).string()));
  }
  REQUIRE(files > 40);
}

TEST_CASE("forward volume deltas add up to the link byte counter deltas") {
  // long flows so none ends mid-run; compare consecutive ticks per interface
  TrafficParams p = congested_profile();
  p.duration_min_s = p.duration_max_s = 5000;
  SimConfig cfg;
  cfg.duration_s = 90;
  cfg.sample_interval_s = 3;
  Simulator sim(default_topology(), p, 13, cfg);

  std::map<std::string, std::map<std::uint64_t, double>> prev_vol;
  sim.run([&](Simulator& s, std::int64_t, double) {
    for (const Interface& it : s.interfaces()) {
      double fwd_delta = 0;
      std::map<std::uint64_t, double> vols;
      for (const ActiveFlow* f : s.flows_on_link(it.link)) {
        vols[f->spec.id] = f->delivered_bytes;
        double prev = prev_vol[it.id].count(f->spec.id) ? prev_vol[it.id][f->spec.id] : 0.0;
        fwd_delta += f->delivered_bytes - prev;
      }
      double link_delta =
          s.interval_bytes(dir_id(it.link, true)) + s.interval_bytes(dir_id(it.link, false));
      REQUIRE(fwd_delta == Catch::Approx(link_delta).epsilon(1e-6).margin(1.0));
      prev_vol[it.id] = vols;
    }
  });
}
