#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "bwpred/csv.hpp"
#include "bwpred/sim.hpp"

namespace bwpred {

/// Per-flow view sampled at a tick: identifiers, packet/volume totals,
/// min/mean/max/std for packet lengths, inter-arrival times and
/// active/idle periods, subflow counters, flag counts and header volumes.
/// 46 columns total.
struct FlowRecordView {
  std::string srcip, dstip;
  int srcport = 0, dstport = 0, proto = 0;
  double first_ts = 0, last_ts = 0;
  std::int64_t total_fpackets = 0;
  double total_fvolume = 0;
  std::int64_t total_bpackets = 0;
  double total_bvolume = 0;
  double min_fpktl = 0, mean_fpktl = 0, max_fpktl = 0, std_fpktl = 0;
  double min_bpktl = 0, mean_bpktl = 0, max_bpktl = 0, std_bpktl = 0;
  double min_fiat = 0, mean_fiat = 0, max_fiat = 0, std_fiat = 0;
  double min_biat = 0, mean_biat = 0, max_biat = 0, std_biat = 0;
  double duration = 0;
  double min_active = 0, mean_active = 0, max_active = 0, std_active = 0;
  double min_idle = 0, mean_idle = 0, max_idle = 0, std_idle = 0;
  double sflow_fpackets = 0, sflow_fbytes = 0, sflow_bpackets = 0, sflow_bbytes = 0;
  std::int64_t fpsh_cnt = 0, bpsh_cnt = 0, furg_cnt = 0, burg_cnt = 0;
  double total_fhlen = 0, total_bhlen = 0;
};

inline const std::vector<std::string>& flow_csv_columns() {
  static const std::vector<std::string> cols = {
      "srcip",          "srcport",       "dstip",          "dstport",        "proto",
      "first_ts",       "last_ts",       "total_fpackets", "total_fvolume",  "total_bpackets",
      "total_bvolume",  "min_fpktl",     "mean_fpktl",     "max_fpktl",      "std_fpktl",
      "min_bpktl",      "mean_bpktl",    "max_bpktl",      "std_bpktl",      "min_fiat",
      "mean_fiat",      "max_fiat",      "std_fiat",       "min_biat",       "mean_biat",
      "max_biat",       "std_biat",      "duration",       "min_active",     "mean_active",
      "max_active",     "std_active",    "min_idle",       "mean_idle",      "max_idle",
      "std_idle",       "sflow_fpackets", "sflow_fbytes",  "sflow_bpackets", "sflow_bbytes",
      "fpsh_cnt",       "bpsh_cnt",      "furg_cnt",       "burg_cnt",       "total_fhlen",
      "total_bhlen"};
  return cols;
}

/// Dstat-style system counters plus the per-interface bitrate pair.
/// 29 fields total.
struct SystemStats {
  double cpu_usr = 0, cpu_sys = 0, cpu_idl = 100, cpu_wai = 0, cpu_stl = 0;
  double mem_used = 0, mem_free = 0, mem_buff = 0, mem_cach = 0;
  double page_in = 0, page_out = 0;
  double disk_read = 0, disk_writ = 0;
  double io_read = 0, io_writ = 0;
  double interrupts = 0, ctx_switches = 0;
  double load_1m = 0, load_5m = 0, load_15m = 0;
  double procs_run = 0, procs_blk = 0, procs_new = 0;
  double swap_used = 0, swap_free = 0;
  double tcp_est = 0, tcp_tw = 0;
  double download_bitrate = 0, upload_bitrate = 0;
};

inline const std::vector<std::string>& system_csv_columns() {
  static const std::vector<std::string> cols = {
      "cpu_usr",   "cpu_sys",   "cpu_idl",   "cpu_wai",      "cpu_stl",
      "mem_used",  "mem_free",  "mem_buff",  "mem_cach",     "page_in",
      "page_out",  "disk_read", "disk_writ", "io_read",      "io_writ",
      "interrupts", "ctx_switches", "load_1m", "load_5m",    "load_15m",
      "procs_run", "procs_blk", "procs_new", "swap_used",    "swap_free",
      "tcp_est",   "tcp_tw",    "download_bitrate", "upload_bitrate"};
  return cols;
}

inline std::vector<double> system_stats_values(const SystemStats& s) {
  return {s.cpu_usr,   s.cpu_sys,   s.cpu_idl,   s.cpu_wai,      s.cpu_stl,
          s.mem_used,  s.mem_free,  s.mem_buff,  s.mem_cach,     s.page_in,
          s.page_out,  s.disk_read, s.disk_writ, s.io_read,      s.io_writ,
          s.interrupts, s.ctx_switches, s.load_1m, s.load_5m,    s.load_15m,
          s.procs_run, s.procs_blk, s.procs_new, s.swap_used,    s.swap_free,
          s.tcp_est,   s.tcp_tw,    s.download_bitrate, s.upload_bitrate};
}

struct TelemetryNoise {
  double cpu = 1.2;     // cpu share sigma, percentage points
  double mem = 3e7;     // memory sigma, bytes
  double rate = 25.0;   // interrupt/context-switch sigma
  double misc = 1.0;    // scale for the remaining counters
};

namespace detail {

struct EpisodeStats {
  double mn = 0, mean = 0, mx = 0, sd = 0;
};

inline EpisodeStats episode_stats(const std::vector<double>& xs) {
  EpisodeStats s;
  if (xs.empty()) return s;
  double sum = 0;
  s.mn = xs[0];
  s.mx = xs[0];
  for (double x : xs) {
    s.mn = std::min(s.mn, x);
    s.mx = std::max(s.mx, x);
    sum += x;
  }
  s.mean = sum / static_cast<double>(xs.size());
  double var = 0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  s.sd = std::sqrt(var / static_cast<double>(xs.size()));
  return s;
}

// weighted min/mean/max/std over (value, weight) pairs
inline EpisodeStats weighted_stats(const std::vector<std::pair<double, double>>& vw) {
  EpisodeStats s;
  double wsum = 0, vsum = 0;
  bool any = false;
  for (auto [v, w] : vw) {
    if (w <= 0) continue;
    if (!any) {
      s.mn = v;
      s.mx = v;
      any = true;
    }
    s.mn = std::min(s.mn, v);
    s.mx = std::max(s.mx, v);
    wsum += w;
    vsum += v * w;
  }
  if (!any || wsum <= 0) return EpisodeStats{};
  s.mean = vsum / wsum;
  double var = 0;
  for (auto [v, w] : vw)
    if (w > 0) var += w * (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(var / wsum);
  return s;
}

}  // namespace detail

/// Synthesizes the 46-field record for one flow observed at time t.
///
/// Packet counts derive from delivered volume; inter-arrival times follow
/// packet_length*8/rate per constant-rate segment, pooled across segments
/// weighted by packets sent in each; active/idle periods come from runs of
/// nonzero/zero allocation. TCP backward traffic is modelled as one 40-byte
/// ACK per two data packets; UDP has no backward traffic. PSH is set on every
/// forward TCP data packet, URG never; headers cost 40 B (TCP) / 28 B (UDP).
inline FlowRecordView flow_record_view(const Topology& topo, std::int64_t epoch_base,
                                       const ActiveFlow& f, double t) {
  FlowRecordView r;

  auto hosts = topo.hosts();
  auto ip_of = [&](int node) {
    for (std::size_t i = 0; i < hosts.size(); ++i)
      if (hosts[i] == node) return "10.0.0." + std::to_string(i + 1);
    return std::string("10.0.255.1");
  };
  r.srcip = ip_of(f.spec.src);
  r.dstip = ip_of(f.spec.dst);
  r.srcport = f.spec.client_port;
  r.dstport = f.spec.server_port;
  r.proto = protocol_number(f.spec.protocol);

  const double pl = f.spec.packet_length;
  const bool tcp = f.spec.protocol == Protocol::Tcp;
  r.total_fpackets = f.packets_delivered();
  r.total_fvolume = f.delivered_bytes;
  if (tcp) {
    r.total_bpackets = r.total_fpackets / 2;
    r.total_bvolume = 40.0 * static_cast<double>(r.total_bpackets);
  }

  if (r.total_fpackets > 0) {
    r.min_fpktl = r.mean_fpktl = r.max_fpktl = pl;
  }
  if (r.total_bpackets > 0) {
    r.min_bpktl = r.mean_bpktl = r.max_bpktl = 40.0;
  }

  // segment windows: [t0, next t0) clipped to t
  std::vector<std::pair<double, double>> fiat;  // (iat, packet weight)
  std::vector<double> active_eps, idle_eps;
  double last_active_end = f.spec.start_s;
  double run_start = f.spec.start_s;
  bool run_active = false;
  bool first_seg = true;
  for (std::size_t i = 0; i < f.segments.size(); ++i) {
    double t0 = f.segments[i].t0;
    double t1 = i + 1 < f.segments.size() ? f.segments[i + 1].t0 : t;
    t1 = std::min(t1, t);
    if (t1 <= t0) continue;
    double rate = f.segments[i].rate_bps;
    bool active = rate > 0;
    if (active) {
      double pkts = rate * (t1 - t0) / (8.0 * pl);
      fiat.emplace_back(pl * 8.0 / rate, pkts);
      last_active_end = t1;
    }
    if (first_seg) {
      run_start = t0;
      run_active = active;
      first_seg = false;
    } else if (active != run_active) {
      (run_active ? active_eps : idle_eps).push_back(t0 - run_start);
      run_start = t0;
      run_active = active;
    }
  }
  if (!first_seg && t > run_start) (run_active ? active_eps : idle_eps).push_back(t - run_start);

  auto fs = detail::weighted_stats(fiat);
  r.min_fiat = fs.mn;
  r.mean_fiat = fs.mean;
  r.max_fiat = fs.mx;
  r.std_fiat = fs.sd;
  if (tcp && r.total_bpackets > 0) {
    std::vector<std::pair<double, double>> biat;
    for (auto [v, w] : fiat) biat.emplace_back(2.0 * v, w / 2.0);
    auto bs = detail::weighted_stats(biat);
    r.min_biat = bs.mn;
    r.mean_biat = bs.mean;
    r.max_biat = bs.mx;
    r.std_biat = bs.sd;
  }

  auto as = detail::episode_stats(active_eps);
  r.min_active = as.mn;
  r.mean_active = as.mean;
  r.max_active = as.mx;
  r.std_active = as.sd;
  auto is = detail::episode_stats(idle_eps);
  r.min_idle = is.mn;
  r.mean_idle = is.mean;
  r.max_idle = is.mx;
  r.std_idle = is.sd;

  double base = static_cast<double>(epoch_base);
  r.first_ts = base + f.spec.start_s;
  r.last_ts = base + last_active_end;
  r.duration = r.last_ts - r.first_ts;

  double nsub = std::max<std::size_t>(1, active_eps.size());
  r.sflow_fpackets = static_cast<double>(r.total_fpackets) / nsub;
  r.sflow_fbytes = r.total_fvolume / nsub;
  r.sflow_bpackets = static_cast<double>(r.total_bpackets) / nsub;
  r.sflow_bbytes = r.total_bvolume / nsub;

  if (tcp) {
    r.fpsh_cnt = r.total_fpackets;
    r.total_fhlen = 40.0 * static_cast<double>(r.total_fpackets);
    r.total_bhlen = 40.0 * static_cast<double>(r.total_bpackets);
  } else {
    r.total_fhlen = 28.0 * static_cast<double>(r.total_fpackets);
  }
  return r;
}

/// All flows routed over the interface's link and active at t, by flow id.
inline std::vector<FlowRecordView> snapshot_flows(const Simulator& sim, const Interface& iface,
                                                  double t) {
  std::vector<FlowRecordView> out;
  for (const ActiveFlow* f : sim.flows_on_link(iface.link))
    out.push_back(flow_record_view(sim.topology(), sim.config().epoch_base, *f, t));
  return out;
}

/// Synthesizes one router's tick-level Dstat view. CPU load follows the
/// packets-per-second the router forwards; the remaining counters are fixed
/// affine maps of that load plus seeded Gaussian noise, clamped nonnegative.
/// The bitrate pair is filled in per interface by the caller.
inline SystemStats synth_router_stats(const Simulator& sim, int router, RngStream& rng,
                                      const TelemetryNoise& noise) {
  const Topology& topo = sim.topology();
  double interval = sim.config().sample_interval_s;

  double pkts_in = 0;
  std::vector<int> attached;
  for (std::size_t li = 0; li < topo.links.size(); ++li) {
    const Link& l = topo.links[li];
    if (l.a != router && l.b != router) continue;
    attached.push_back(static_cast<int>(li));
    int inbound = dir_id(static_cast<int>(li), l.b == router);
    pkts_in += static_cast<double>(sim.interval_packets(inbound));
  }
  double pps = pkts_in / interval;

  double flows = 0, tcp_flows = 0;
  std::vector<std::uint64_t> seen;
  for (int li : attached)
    for (const ActiveFlow* f : sim.flows_on_link(li)) {
      if (std::find(seen.begin(), seen.end(), f->spec.id) != seen.end()) continue;
      seen.push_back(f->spec.id);
      flows += 1;
      if (f->spec.protocol == Protocol::Tcp) tcp_flows += 1;
    }

  auto pos = [](double v) { return std::max(0.0, v); };
  SystemStats s;
  s.cpu_usr = std::clamp(5.0 + 0.4 * pps / 1000.0 + rng.normal(0, noise.cpu), 0.0, 95.0);
  s.cpu_sys = std::clamp(2.0 + 0.08 * pps / 1000.0 + rng.normal(0, 0.5 * noise.cpu), 0.0, 40.0);
  s.cpu_wai = std::clamp(0.4 + rng.normal(0, 0.2 * noise.cpu), 0.0, 5.0);
  s.cpu_stl = 0.0;
  double busy = s.cpu_usr + s.cpu_sys + s.cpu_wai;
  if (busy > 99.5) {
    double k = 99.5 / busy;
    s.cpu_usr *= k;
    s.cpu_sys *= k;
    s.cpu_wai *= k;
    busy = 99.5;
  }
  s.cpu_idl = 100.0 - busy - s.cpu_stl;

  constexpr double kMemTotal = 8.0 * 1024 * 1024 * 1024;
  constexpr double kSwapTotal = 2.0 * 1024 * 1024 * 1024;
  s.mem_used = std::clamp(1.2e9 + 2.5e6 * flows + rng.normal(0, noise.mem), 0.0, 6e9);
  s.mem_buff = std::clamp(1.5e8 + rng.normal(0, 0.1 * noise.mem), 0.0, 5e8);
  s.mem_cach = std::clamp(9e8 + rng.normal(0, 0.5 * noise.mem), 0.0, 2e9);
  s.mem_free = kMemTotal - s.mem_used - s.mem_buff - s.mem_cach;

  s.page_in = pos(rng.normal(0, 300 * noise.misc));
  s.page_out = pos(rng.normal(0, 300 * noise.misc));
  s.disk_read = pos(2e4 + rng.normal(0, 5e3 * noise.misc));
  s.disk_writ = pos(5e4 + 2.0 * pps + rng.normal(0, 1e4 * noise.misc));
  s.io_read = pos(1.0 + rng.normal(0, 0.5 * noise.misc));
  s.io_writ = pos(3.0 + pps / 2000.0 + rng.normal(0, noise.misc));
  s.interrupts = pos(180.0 + 1.1 * pps + rng.normal(0, noise.rate));
  s.ctx_switches = pos(350.0 + 1.4 * pps + rng.normal(0, 2.0 * noise.rate));
  double cpu_busy = s.cpu_usr + s.cpu_sys;
  s.load_1m = pos(0.04 + 1.6 * cpu_busy / 100.0 + rng.normal(0, 0.04 * noise.misc));
  s.load_5m = pos(0.05 + 0.8 * s.load_1m + rng.normal(0, 0.02 * noise.misc));
  s.load_15m = pos(0.05 + 0.7 * s.load_1m + rng.normal(0, 0.015 * noise.misc));
  s.procs_run = pos(1.0 + cpu_busy / 40.0 + rng.normal(0, 0.4 * noise.misc));
  s.procs_blk = pos(rng.normal(0, 0.2 * noise.misc));
  s.procs_new = pos(0.5 + pps / 5e4 + rng.normal(0, 0.3 * noise.misc));
  s.swap_used = pos(rng.normal(0, 1e5 * noise.misc));
  s.swap_free = kSwapTotal - s.swap_used;
  s.tcp_est = pos(8.0 + tcp_flows + rng.normal(0, noise.misc));
  s.tcp_tw = pos(3.0 + rng.normal(0, 2.0 * noise.misc));
  return s;
}

/// Router-level stats are drawn once per router per tick and shared across
/// that router's interfaces; the bitrate pair is exact per interface.
class SystemSampler {
 public:
  SystemSampler(std::uint64_t sim_seed, TelemetryNoise noise)
      : rng_(RngStream(sim_seed).derive("telemetry")), noise_(noise) {}

  void begin_tick(const Simulator& sim) {
    router_cache_.clear();
    std::vector<int> routers;
    for (const Interface& it : sim.interfaces())
      if (std::find(routers.begin(), routers.end(), it.router) == routers.end())
        routers.push_back(it.router);
    std::sort(routers.begin(), routers.end(), [&](int a, int b) {
      return sim.topology().nodes[a].id < sim.topology().nodes[b].id;
    });
    for (int r : routers) router_cache_[r] = synth_router_stats(sim, r, rng_, noise_);
  }

  SystemStats sample(const Simulator& sim, const Interface& iface) const {
    SystemStats s = router_cache_.at(iface.router);
    double interval = sim.config().sample_interval_s;
    s.download_bitrate = sim.interval_bytes(sim.download_dir(iface)) * 8.0 / interval;
    s.upload_bitrate = sim.interval_bytes(sim.upload_dir(iface)) * 8.0 / interval;
    return s;
  }

 private:
  RngStream rng_;
  TelemetryNoise noise_;
  std::map<int, SystemStats> router_cache_;
};

inline std::string flow_record_csv_row(const FlowRecordView& r) {
  std::vector<std::string> c;
  c.reserve(46);
  c.push_back(r.srcip);
  c.push_back(std::to_string(r.srcport));
  c.push_back(r.dstip);
  c.push_back(std::to_string(r.dstport));
  c.push_back(std::to_string(r.proto));
  c.push_back(format_double(r.first_ts));
  c.push_back(format_double(r.last_ts));
  c.push_back(std::to_string(r.total_fpackets));
  c.push_back(format_double(r.total_fvolume));
  c.push_back(std::to_string(r.total_bpackets));
  c.push_back(format_double(r.total_bvolume));
  for (double v : {r.min_fpktl, r.mean_fpktl, r.max_fpktl, r.std_fpktl, r.min_bpktl,
                   r.mean_bpktl, r.max_bpktl, r.std_bpktl, r.min_fiat, r.mean_fiat, r.max_fiat,
                   r.std_fiat, r.min_biat, r.mean_biat, r.max_biat, r.std_biat, r.duration,
                   r.min_active, r.mean_active, r.max_active, r.std_active, r.min_idle,
                   r.mean_idle, r.max_idle, r.std_idle, r.sflow_fpackets, r.sflow_fbytes,
                   r.sflow_bpackets, r.sflow_bbytes})
    c.push_back(format_double(v));
  c.push_back(std::to_string(r.fpsh_cnt));
  c.push_back(std::to_string(r.bpsh_cnt));
  c.push_back(std::to_string(r.furg_cnt));
  c.push_back(std::to_string(r.burg_cnt));
  c.push_back(format_double(r.total_fhlen));
  c.push_back(format_double(r.total_bhlen));
  return join_csv(c);
}

/// Writes the per-interface directory layout:
///   <out>/<iface>/flows_<ts>.csv   one file per tick, one row per flow
///   <out>/<iface>/system.csv       one row per tick, timestamp + 29 stats
class TelemetryWriter {
 public:
  TelemetryWriter(std::string out_dir, std::uint64_t sim_seed,
                  TelemetryNoise noise = TelemetryNoise{})
      : out_dir_(std::move(out_dir)), sampler_(sim_seed, noise) {}

  void on_tick(Simulator& sim, std::int64_t /*tick*/, double t) {
    namespace fs = std::filesystem;
    std::int64_t ts = sim.epoch_of(t);
    sampler_.begin_tick(sim);
    for (const Interface& iface : sim.interfaces()) {
      fs::path dir = fs::path(out_dir_) / iface.id;
      auto sys = system_files_.find(iface.id);
      if (sys == system_files_.end()) {
        fs::create_directories(dir);
        auto stream = std::make_unique<std::ofstream>(dir / "system.csv");
        if (!*stream) throw std::runtime_error("cannot write telemetry under " + dir.string());
        *stream << "timestamp," << join_csv(system_csv_columns());
        sys = system_files_.emplace(iface.id, std::move(stream)).first;
      }
      std::ofstream flows(dir / ("flows_" + std::to_string(ts) + ".csv"));
      if (!flows) throw std::runtime_error("cannot write telemetry under " + dir.string());
      flows << join_csv(flow_csv_columns());
      for (const FlowRecordView& r : snapshot_flows(sim, iface, t))
        flows << flow_record_csv_row(r);

      SystemStats s = sampler_.sample(sim, iface);
      std::vector<std::string> cells{std::to_string(ts)};
      for (double v : system_stats_values(s)) cells.push_back(format_double(v));
      *sys->second << join_csv(cells);
      sys->second->flush();
    }
  }

 private:
  std::string out_dir_;
  SystemSampler sampler_;
  std::map<std::string, std::unique_ptr<std::ofstream>> system_files_;
};

}  // namespace bwpred
