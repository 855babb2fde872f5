#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "bwpred/topology.hpp"
#include "bwpred/traffic.hpp"

namespace bwpred {

/// Directed view of a link: even ids run a->b, odd ids b->a.
inline int dir_id(int link, bool forward) { return link * 2 + (forward ? 0 : 1); }

struct AllocFlow {
  Protocol protocol = Protocol::Tcp;
  double target_bps = 0.0;
  const Path* path = nullptr;
};

/// Computes per-flow end-to-end rates from scratch.
///
/// UDP never backs off: each UDP flow asks for its target on every hop, and a
/// hop whose total UDP demand exceeds capacity scales all UDP flows on it by
/// capacity/demand; a flow's rate is its target times the smallest scale along
/// its path. TCP then shares what is left per hop max-min fairly, each flow
/// capped by its own target and bottlenecked by the minimum across its path.
inline std::vector<double> allocate_rates(const Topology& topo,
                                          const std::vector<AllocFlow>& flows) {
  const int ndirs = static_cast<int>(topo.links.size()) * 2;
  std::vector<double> rate(flows.size(), 0.0);

  std::vector<double> udp_demand(ndirs, 0.0);
  for (const AllocFlow& f : flows) {
    if (f.protocol != Protocol::Udp) continue;
    for (const PathHop& hop : *f.path) udp_demand[dir_id(hop.link, hop.forward)] += f.target_bps;
  }
  std::vector<double> udp_used(ndirs, 0.0);
  for (std::size_t i = 0; i < flows.size(); ++i) {
    const AllocFlow& f = flows[i];
    if (f.protocol != Protocol::Udp) continue;
    double scale = 1.0;
    for (const PathHop& hop : *f.path) {
      int d = dir_id(hop.link, hop.forward);
      double cap = topo.links[hop.link].capacity_bps;
      if (udp_demand[d] > cap) scale = std::min(scale, cap / udp_demand[d]);
    }
    rate[i] = f.target_bps * scale;
    for (const PathHop& hop : *f.path) udp_used[dir_id(hop.link, hop.forward)] += rate[i];
  }

  // progressive filling over the residual capacity
  std::vector<double> avail(ndirs, 0.0);
  std::vector<int> nactive(ndirs, 0);
  std::vector<std::size_t> tcp;
  for (std::size_t i = 0; i < flows.size(); ++i)
    if (flows[i].protocol == Protocol::Tcp) tcp.push_back(i);
  for (int d = 0; d < ndirs; ++d)
    avail[d] = std::max(0.0, topo.links[d / 2].capacity_bps - udp_used[d]);

  std::vector<bool> frozen(flows.size(), false);
  std::size_t remaining = tcp.size();
  while (remaining > 0) {
    std::fill(nactive.begin(), nactive.end(), 0);
    for (std::size_t i : tcp) {
      if (frozen[i]) continue;
      for (const PathHop& hop : *flows[i].path) ++nactive[dir_id(hop.link, hop.forward)];
    }
    double level = std::numeric_limits<double>::infinity();
    for (int d = 0; d < ndirs; ++d)
      if (nactive[d] > 0) level = std::min(level, avail[d] / nactive[d]);
    for (std::size_t i : tcp)
      if (!frozen[i]) level = std::min(level, flows[i].target_bps);

    const double eps = 1e-9 * (1.0 + level);
    // freeze demand-limited flows first, then flows pinned by a saturated hop
    for (std::size_t i : tcp) {
      if (frozen[i] || flows[i].target_bps > level + eps) continue;
      rate[i] = flows[i].target_bps;
      frozen[i] = true;
      --remaining;
      for (const PathHop& hop : *flows[i].path) {
        int d = dir_id(hop.link, hop.forward);
        avail[d] = std::max(0.0, avail[d] - rate[i]);
      }
    }
    std::vector<bool> saturated(ndirs, false);
    std::fill(nactive.begin(), nactive.end(), 0);
    for (std::size_t i : tcp) {
      if (frozen[i]) continue;
      for (const PathHop& hop : *flows[i].path) ++nactive[dir_id(hop.link, hop.forward)];
    }
    for (int d = 0; d < ndirs; ++d)
      if (nactive[d] > 0 && avail[d] / nactive[d] <= level + eps) saturated[d] = true;
    for (std::size_t i : tcp) {
      if (frozen[i]) continue;
      bool pinned = false;
      for (const PathHop& hop : *flows[i].path)
        if (saturated[dir_id(hop.link, hop.forward)]) pinned = true;
      if (!pinned) continue;
      rate[i] = level;
      frozen[i] = true;
      --remaining;
      for (const PathHop& hop : *flows[i].path) {
        int d = dir_id(hop.link, hop.forward);
        avail[d] = std::max(0.0, avail[d] - level);
      }
    }
  }
  return rate;
}

struct Segment {
  double t0 = 0.0;
  double rate_bps = 0.0;
};

struct ActiveFlow {
  FlowSpec spec;
  Path path;
  double delivered_bytes = 0.0;
  double rate_bps = 0.0;
  // piecewise-constant rate history; consecutive equal rates are merged
  std::vector<Segment> segments;
  // packets already credited to previously used directions (rerouting)
  std::int64_t packets_credited = 0;

  std::int64_t packets_delivered() const {
    return static_cast<std::int64_t>(delivered_bytes / spec.packet_length);
  }
};

struct LifecycleEvent {
  double t = 0.0;
  enum Kind { Started, Ended, Blocked } kind = Started;
  std::uint64_t flow_id = 0;
};

struct RunStats {
  std::int64_t flows_started = 0;
  std::int64_t flows_ended = 0;
  std::int64_t flows_blocked = 0;
  std::vector<LifecycleEvent> lifecycle;
};

struct SimConfig {
  double duration_s = 3600.0;
  double sample_interval_s = 3.0;
  std::int64_t epoch_base = 1500000000;
  bool check_invariants = false;
  std::uint64_t max_flows = 0;  // 0 = unlimited
  // interface ids to sample; empty means every monitored interface
  std::vector<std::string> monitored;
};

struct Admission {
  bool allow = true;
  const Path* route = nullptr;  // overrides the primary route when set
};

class Simulator;
using AdmissionFilter = std::function<Admission(const FlowSpec&, const Path& primary)>;
using TickSink = std::function<void(Simulator&, std::int64_t tick, double t)>;

class Simulator {
 public:
  Simulator(Topology topo, std::optional<TrafficParams> traffic, std::uint64_t seed,
            SimConfig cfg)
      : topo_(std::move(topo)),
        traffic_(std::move(traffic)),
        cfg_(cfg),
        seed_(seed),
        rng_(RngStream(seed).derive("flowgen")) {
    if (cfg_.duration_s <= cfg_.sample_interval_s || cfg_.sample_interval_s <= 0)
      throw std::runtime_error("simulation: need duration > sample interval > 0");
    if (traffic_) traffic_->validate();
    hosts_ = topo_.hosts();
    dirs_.resize(topo_.links.size() * 2);
    interfaces_ = topo_.monitored_interfaces();
    if (!cfg_.monitored.empty()) {
      std::vector<Interface> keep;
      for (const auto& want : cfg_.monitored) {
        bool found = false;
        for (const auto& it : interfaces_)
          if (it.id == want) {
            keep.push_back(it);
            found = true;
          }
        if (!found) throw std::runtime_error("unknown interface id: " + want);
      }
      interfaces_ = keep;
    }
  }

  const Topology& topology() const { return topo_; }
  const SimConfig& config() const { return cfg_; }
  std::uint64_t seed() const { return seed_; }
  double now() const { return now_; }
  std::int64_t epoch_of(double t) const {
    return cfg_.epoch_base + static_cast<std::int64_t>(std::llround(t));
  }
  const std::vector<Interface>& interfaces() const { return interfaces_; }
  const RunStats& stats() const { return stats_; }

  void set_admission_filter(AdmissionFilter f) { admission_ = std::move(f); }

  /// Flows currently routed over `link`, ordered by flow id.
  std::vector<const ActiveFlow*> flows_on_link(int link) const {
    std::vector<const ActiveFlow*> out;
    for (const auto& [id, f] : active_)
      for (const PathHop& hop : f.path)
        if (hop.link == link) {
          out.push_back(&f);
          break;
        }
    return out;
  }

  const std::map<std::uint64_t, ActiveFlow>& active_flows() const { return active_; }

  double dir_rate(int dir) const { return dirs_[dir].rate_total; }
  double dir_bytes(int dir) const { return dirs_[dir].bytes; }
  std::int64_t dir_packets(int dir) const {
    std::int64_t n = dirs_[dir].packets_base;
    for (std::uint64_t id : dirs_[dir].flows) {
      const ActiveFlow& f = active_.at(id);
      n += f.packets_delivered() - f.packets_credited;
    }
    return n;
  }
  double interval_bytes(int dir) const { return dirs_[dir].bytes - dirs_[dir].bytes_prev; }
  std::int64_t interval_packets(int dir) const {
    return dir_packets(dir) - dirs_[dir].packets_prev;
  }
  double capacity_of_dir(int dir) const { return topo_.links[dir / 2].capacity_bps; }
  double utilization_instant(int dir) const {
    return dirs_[dir].rate_total / capacity_of_dir(dir);
  }
  /// Average utilization over the last completed sampling interval.
  double utilization_interval(int dir) const {
    return interval_bytes(dir) * 8.0 / (cfg_.sample_interval_s * capacity_of_dir(dir));
  }

  /// Direction carrying traffic into the interface's router.
  int download_dir(const Interface& it) const {
    return dir_id(it.link, topo_.links[it.link].b == it.router);
  }
  int upload_dir(const Interface& it) const {
    return dir_id(it.link, topo_.links[it.link].a == it.router);
  }

  /// Moves an active flow onto a new route (load balancing). The caller is
  /// responsible for passing a route with matching endpoints.
  void reroute_flow(std::uint64_t id, const Path& new_path) {
    auto it = active_.find(id);
    if (it == active_.end()) return;
    ActiveFlow& f = it->second;
    std::int64_t pkts = f.packets_delivered();
    for (const PathHop& hop : f.path) {
      int d = dir_id(hop.link, hop.forward);
      dirs_[d].packets_base += pkts - f.packets_credited;
      remove_flow_from_dir(d, id);
    }
    f.packets_credited = pkts;
    f.path = new_path;
    for (const PathHop& hop : f.path) dirs_[dir_id(hop.link, hop.forward)].flows.push_back(id);
    reallocate();
  }

  void run(const TickSink& sink) {
    if (traffic_) {
      double first = draw_interarrival(rng_, *traffic_);
      if (first <= cfg_.duration_s) push_event(first, Event::FlowStart, 0);
    }
    std::int64_t nticks =
        static_cast<std::int64_t>(std::floor(cfg_.duration_s / cfg_.sample_interval_s + 1e-9));
    for (std::int64_t k = 1; k <= nticks; ++k)
      push_event(k * cfg_.sample_interval_s, Event::SampleTick, static_cast<std::uint64_t>(k));

    while (!queue_.empty()) {
      Event ev = queue_.top();
      queue_.pop();
      integrate_to(ev.t);
      switch (ev.kind) {
        case Event::FlowEnd:
          finish_flow(ev.payload, ev.t);
          break;
        case Event::FlowStart:
          start_flow(ev.t);
          break;
        case Event::SampleTick:
          if (sink) sink(*this, static_cast<std::int64_t>(ev.payload), ev.t);
          rotate_snapshots();
          break;
      }
    }
    integrate_to(cfg_.duration_s);
    // flows outliving the run close at sim end
    std::vector<std::uint64_t> open;
    for (const auto& [id, f] : active_) open.push_back(id);
    for (std::uint64_t id : open) finish_flow(id, cfg_.duration_s);
  }

 private:
  struct DirState {
    double rate_total = 0.0;
    double bytes = 0.0;
    double bytes_prev = 0.0;
    std::int64_t packets_base = 0;
    std::int64_t packets_prev = 0;
    std::vector<std::uint64_t> flows;
  };

  struct Event {
    double t = 0.0;
    enum Kind { FlowEnd = 0, FlowStart = 1, SampleTick = 2 } kind = FlowStart;
    std::uint64_t seq = 0;
    std::uint64_t payload = 0;

    bool operator>(const Event& o) const {
      if (t != o.t) return t > o.t;
      if (kind != o.kind) return kind > o.kind;
      return seq > o.seq;
    }
  };

  void push_event(double t, Event::Kind kind, std::uint64_t payload) {
    Event e;
    e.t = t;
    e.kind = kind;
    e.seq = next_seq_++;
    e.payload = payload;
    queue_.push(e);
  }

  void integrate_to(double t) {
    double dt = t - now_;
    if (dt <= 0) {
      now_ = std::max(now_, t);
      return;
    }
    for (auto& [id, f] : active_) f.delivered_bytes += f.rate_bps * dt / 8.0;
    for (DirState& d : dirs_) d.bytes += d.rate_total * dt / 8.0;
    now_ = t;
  }

  void start_flow(double t) {
    FlowSpec spec = generate_flow(rng_, t, *traffic_, hosts_, next_flow_id_++);
    double next = t + draw_interarrival(rng_, *traffic_);
    bool more = cfg_.max_flows == 0 || next_flow_id_ <= cfg_.max_flows;
    if (more && next <= cfg_.duration_s) push_event(next, Event::FlowStart, 0);

    const Path& primary = topo_.path_for(spec.src, spec.dst);
    const Path* route = &primary;
    if (admission_) {
      Admission a = admission_(spec, primary);
      if (!a.allow) {
        ++stats_.flows_blocked;
        stats_.lifecycle.push_back({t, LifecycleEvent::Blocked, spec.id});
        return;
      }
      if (a.route) route = a.route;
    }
    ActiveFlow f;
    f.spec = spec;
    f.path = *route;
    active_.emplace(spec.id, std::move(f));
    for (const PathHop& hop : *route)
      dirs_[dir_id(hop.link, hop.forward)].flows.push_back(spec.id);
    ++stats_.flows_started;
    stats_.lifecycle.push_back({t, LifecycleEvent::Started, spec.id});
    // flows outliving the horizon close in the run epilogue, after the
    // final sample has observed them
    double end = spec.start_s + spec.duration_s;
    if (end < cfg_.duration_s) push_event(end, Event::FlowEnd, spec.id);
    reallocate();
  }

  void finish_flow(std::uint64_t id, double t) {
    auto it = active_.find(id);
    if (it == active_.end()) return;
    ActiveFlow& f = it->second;
    std::int64_t pkts = f.packets_delivered();
    for (const PathHop& hop : f.path) {
      int d = dir_id(hop.link, hop.forward);
      dirs_[d].packets_base += pkts - f.packets_credited;
      remove_flow_from_dir(d, id);
    }
    active_.erase(it);
    ++stats_.flows_ended;
    stats_.lifecycle.push_back({t, LifecycleEvent::Ended, id});
    reallocate();
  }

  void remove_flow_from_dir(int dir, std::uint64_t id) {
    auto& v = dirs_[dir].flows;
    v.erase(std::remove(v.begin(), v.end(), id), v.end());
  }

  void reallocate() {
    alloc_input_.clear();
    alloc_ids_.clear();
    for (const auto& [id, f] : active_) {
      alloc_input_.push_back({f.spec.protocol, f.spec.target_bps, &f.path});
      alloc_ids_.push_back(id);
    }
    std::vector<double> rates = allocate_rates(topo_, alloc_input_);
    for (std::size_t i = 0; i < alloc_ids_.size(); ++i) {
      ActiveFlow& f = active_.at(alloc_ids_[i]);
      f.rate_bps = rates[i];
      if (f.segments.empty() || f.segments.back().rate_bps != rates[i])
        f.segments.push_back({now_, rates[i]});
    }
    for (DirState& d : dirs_) d.rate_total = 0.0;
    for (const auto& [id, f] : active_)
      for (const PathHop& hop : f.path) dirs_[dir_id(hop.link, hop.forward)].rate_total += f.rate_bps;

    if (cfg_.check_invariants) {
      for (std::size_t d = 0; d < dirs_.size(); ++d) {
        double cap = capacity_of_dir(static_cast<int>(d));
        if (dirs_[d].rate_total > cap * (1.0 + 1e-9))
          throw std::logic_error("capacity exceeded on " + topo_.links[d / 2].id);
      }
      for (const auto& [id, f] : active_)
        if (f.rate_bps > f.spec.target_bps * (1.0 + 1e-9))
          throw std::logic_error("flow allocated above its target");
    }
  }

  void rotate_snapshots() {
    for (std::size_t d = 0; d < dirs_.size(); ++d) {
      dirs_[d].bytes_prev = dirs_[d].bytes;
      dirs_[d].packets_prev = dir_packets(static_cast<int>(d));
    }
  }

  Topology topo_;
  std::optional<TrafficParams> traffic_;
  SimConfig cfg_;
  std::uint64_t seed_;
  RngStream rng_;
  std::vector<int> hosts_;
  std::vector<Interface> interfaces_;
  std::vector<DirState> dirs_;
  std::map<std::uint64_t, ActiveFlow> active_;
  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> queue_;
  double now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t next_flow_id_ = 1;
  RunStats stats_;
  AdmissionFilter admission_;
  std::vector<AllocFlow> alloc_input_;
  std::vector<std::uint64_t> alloc_ids_;
};

}  // namespace bwpred
