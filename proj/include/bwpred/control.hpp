#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bwpred/checkpoint.hpp"
#include "bwpred/eval.hpp"
#include "bwpred/features.hpp"
#include "bwpred/sim.hpp"
#include "bwpred/telemetry.hpp"

namespace bwpred {

enum class PolicyKind { None, Block, Balance };

inline const char* policy_name(PolicyKind k) {
  switch (k) {
    case PolicyKind::None: return "none";
    case PolicyKind::Block: return "block";
    case PolicyKind::Balance: return "balance";
  }
  return "?";
}

inline PolicyKind policy_kind_from(const std::string& s) {
  if (s == "none") return PolicyKind::None;
  if (s == "block") return PolicyKind::Block;
  if (s == "balance") return PolicyKind::Balance;
  throw std::runtime_error("unknown policy: " + s);
}

struct PolicyConfig {
  PolicyKind kind = PolicyKind::None;
  double block_threshold = 0.8;
  double balance_threshold = 0.5;
  double release_margin = 0.1;
  int release_ticks = 3;

  double threshold() const {
    return kind == PolicyKind::Balance ? balance_threshold : block_threshold;
  }

  void validate() const {
    if (!(block_threshold > 0 && block_threshold <= 1) ||
        !(balance_threshold > 0 && balance_threshold <= 1))
      throw std::runtime_error("policy: thresholds must lie in (0, 1]");
    if (!(release_margin >= 0 && release_margin < threshold()))
      throw std::runtime_error("policy: release margin must be below the threshold");
    if (release_ticks < 1) throw std::runtime_error("policy: release_ticks must be >= 1");
  }
};

struct ActionRow {
  std::int64_t timestamp = 0;
  std::string interface;
  std::string policy;
  std::string action;  // engage / release / reject_flow / divert / warmup / no_alternate
  double prediction = 0.0;
};

/// Everything a controlled run produces, plus what the baseline comparison
/// needs: the per-interface utilization and prediction timelines.
struct ControlledRunReport {
  std::vector<std::string> interfaces;
  std::map<std::string, std::vector<double>> utilization;  // max(down,up)/cap per tick
  std::map<std::string, std::vector<double>> predictions;  // NaN while warming up
  std::vector<ActionRow> actions;
  std::int64_t ticks = 0;
  std::int64_t overload_ticks = 0;  // interface-ticks with utilization > 0.95
  std::int64_t dropped_flows = 0;
  std::int64_t diverted_flows = 0;
  RunStats sim_stats;

  std::optional<std::int64_t> first_action_tick;  // tick index of the first engage
};

namespace control_detail {

struct Hysteresis {
  bool engaged = false;
  int below = 0;

  // returns +1 on engage, -1 on release, 0 otherwise
  int update(double prediction, double threshold, double margin, int release_ticks) {
    if (!engaged) {
      if (prediction > threshold) {
        engaged = true;
        below = 0;
        return 1;
      }
      return 0;
    }
    if (prediction < threshold - margin) {
      if (++below >= release_ticks) {
        engaged = false;
        below = 0;
        return -1;
      }
    } else {
      below = 0;
    }
    return 0;
  }
};

inline bool path_uses_link(const Path& p, int link) {
  for (const PathHop& hop : p)
    if (hop.link == link) return true;
  return false;
}

}  // namespace control_detail

/// Closed loop: every tick, featurize live simulator state per interface,
/// predict utilization offset*interval ahead, and gate new flows (block) or
/// move traffic to alternates (balance). Prediction runs out of band and
/// consumes no simulated bandwidth; policies release only after
/// `release_ticks` consecutive predictions below threshold - margin.
inline ControlledRunReport run_control(const Topology& topo, const TrafficParams& traffic,
                                       std::uint64_t seed, const SimConfig& sim_cfg,
                                       const Checkpoint* ckpt, const PolicyConfig& policy,
                                       int offset = 5,
                                       const TelemetryNoise& noise = TelemetryNoise{}) {
  policy.validate();
  if (policy.kind != PolicyKind::None && !ckpt)
    throw std::runtime_error("control: an active policy needs a model checkpoint");

  std::optional<MlpModel> mlp;
  std::optional<LstmModel> lstm;
  int window = 1;
  if (ckpt) {
    if (ckpt->kind == "mlp") {
      mlp = mlp_from_checkpoint(*ckpt);
    } else if (ckpt->kind == "lstm") {
      lstm = lstm_from_checkpoint(*ckpt);
      window = lstm->window;
    } else {
      throw std::runtime_error("control: unsupported checkpoint kind " + ckpt->kind);
    }
  }

  Simulator sim(topo, traffic, seed, sim_cfg);
  const std::vector<Interface>& ifaces = sim.interfaces();

  ControlledRunReport rep;
  for (const Interface& it : ifaces) {
    rep.interfaces.push_back(it.id);
    rep.utilization[it.id] = {};
    rep.predictions[it.id] = {};
  }

  SystemSampler sampler(seed, noise);
  std::vector<double> capacity(ifaces.size());
  for (std::size_t i = 0; i < ifaces.size(); ++i)
    capacity[i] = topo.links[static_cast<std::size_t>(ifaces[i].link)].capacity_bps;

  std::vector<std::deque<std::array<double, kInputFeatures>>> history(ifaces.size());
  std::vector<control_detail::Hysteresis> hyst(ifaces.size());
  std::vector<char> engaged_link(topo.links.size(), 0);

  // balance: route new flows away from engaged links at admission
  sim.set_admission_filter([&](const FlowSpec& spec, const Path& primary) -> Admission {
    Admission a;
    if (policy.kind == PolicyKind::Block) {
      for (const PathHop& hop : primary)
        if (engaged_link[static_cast<std::size_t>(hop.link)]) {
          a.allow = false;
          ++rep.dropped_flows;
          return a;
        }
    } else if (policy.kind == PolicyKind::Balance) {
      int hot = -1;
      for (const PathHop& hop : primary)
        if (engaged_link[static_cast<std::size_t>(hop.link)]) hot = hop.link;
      if (hot >= 0) {
        const std::vector<Path>* alts = topo.alternates_for(spec.src, spec.dst);
        const Path* pick = nullptr;
        double best_util = std::numeric_limits<double>::infinity();
        if (alts) {
          for (const Path& alt : *alts) {
            if (control_detail::path_uses_link(alt, hot)) continue;
            double worst = 0;
            for (const PathHop& hop : alt)
              worst = std::max(worst, sim.utilization_instant(dir_id(hop.link, hop.forward)));
            if (worst < best_util) {
              best_util = worst;
              pick = &alt;
            }
          }
        }
        if (pick) {
          a.route = pick;
          ++rep.diverted_flows;
        }
      }
    }
    return a;
  });

  LstmForward fwd;
  std::vector<double> slab;

  sim.run([&](Simulator& s, std::int64_t tick, double t) {
    std::int64_t ts = s.epoch_of(t);
    sampler.begin_tick(s);
    ++rep.ticks;

    // 1. featurize live state
    std::vector<InterfaceSample> samples(ifaces.size());
    for (std::size_t i = 0; i < ifaces.size(); ++i) {
      std::vector<FlowRecordView> flows = snapshot_flows(s, ifaces[i], t);
      SystemStats stats = sampler.sample(s, ifaces[i]);
      samples[i] = join_samples(aggregate_flows(flows), stats, ts, capacity[i]);
      double util = samples[i].max_bitrate();
      rep.utilization[ifaces[i].id].push_back(util);
      if (util > 0.95) ++rep.overload_ticks;
    }
    if (policy.kind == PolicyKind::None || !ckpt) {
      for (std::size_t i = 0; i < ifaces.size(); ++i)
        rep.predictions[ifaces[i].id].push_back(std::numeric_limits<double>::quiet_NaN());
      return;
    }

    // 2. scale and append to per-interface history
    for (std::size_t i = 0; i < ifaces.size(); ++i) {
      std::array<double, kInputFeatures> row;
      for (int c = 0; c < kInputFeatures; ++c)
        row[static_cast<std::size_t>(c)] = ckpt->scaler.transform_one(c, samples[i].x[static_cast<std::size_t>(c)]);
      history[i].push_back(row);
      if (static_cast<int>(history[i].size()) > window) history[i].pop_front();
    }

    // 3. predict offset*interval ahead, all interfaces in one batch
    std::vector<double> preds(ifaces.size(), std::numeric_limits<double>::quiet_NaN());
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < ifaces.size(); ++i)
      if (static_cast<int>(history[i].size()) >= window) ready.push_back(i);

    if (!ready.empty()) {
      if (mlp) {
        std::vector<double> x;
        x.reserve(ready.size() * kInputFeatures);
        for (std::size_t i : ready)
          x.insert(x.end(), history[i].back().begin(), history[i].back().end());
        std::vector<double> out = mlp_predict(*mlp, x.data(), static_cast<int>(ready.size()));
        for (std::size_t k = 0; k < ready.size(); ++k) preds[ready[k]] = out[k];
      } else {
        int b = static_cast<int>(ready.size());
        slab.assign(static_cast<std::size_t>(window) * b * kInputFeatures, 0.0);
        for (int wt = 0; wt < window; ++wt)
          for (int k = 0; k < b; ++k) {
            const auto& row = history[ready[static_cast<std::size_t>(k)]][static_cast<std::size_t>(wt)];
            std::copy(row.begin(), row.end(),
                      slab.begin() + (static_cast<std::size_t>(wt) * b + k) * kInputFeatures);
          }
        lstm_forward(*lstm, slab.data(), b, window, fwd);
        for (int k = 0; k < b; ++k)
          preds[ready[static_cast<std::size_t>(k)]] =
              std::clamp(fwd.yhat.back()[static_cast<std::size_t>(k)], 0.0, 1.0);
      }
    }
    for (std::size_t i = 0; i < ifaces.size(); ++i) {
      rep.predictions[ifaces[i].id].push_back(preds[i]);
      if (std::isnan(preds[i]) && static_cast<int>(history[i].size()) < window)
        rep.actions.push_back({ts, ifaces[i].id, policy_name(policy.kind), "warmup", 0.0});
    }

    // 4. hysteresis and reactions
    for (std::size_t i = 0; i < ifaces.size(); ++i) {
      if (std::isnan(preds[i])) continue;
      int change = hyst[i].update(preds[i], policy.threshold(), policy.release_margin,
                                  policy.release_ticks);
      if (change == 1) {
        engaged_link[static_cast<std::size_t>(ifaces[i].link)] = 1;
        if (!rep.first_action_tick) rep.first_action_tick = tick;
        rep.actions.push_back({ts, ifaces[i].id, policy_name(policy.kind), "engage", preds[i]});
      } else if (change == -1) {
        bool still = false;
        for (std::size_t j = 0; j < ifaces.size(); ++j)
          if (j != i && hyst[j].engaged && ifaces[j].link == ifaces[i].link) still = true;
        if (!still) engaged_link[static_cast<std::size_t>(ifaces[i].link)] = 0;
        rep.actions.push_back({ts, ifaces[i].id, policy_name(policy.kind), "release", preds[i]});
      }

      if (policy.kind == PolicyKind::Balance && hyst[i].engaged) {
        // move the largest-rate divertible flow off the hot link
        int hot = ifaces[i].link;
        const ActiveFlow* best = nullptr;
        const Path* best_alt = nullptr;
        for (const ActiveFlow* f : s.flows_on_link(hot)) {
          const std::vector<Path>* alts = topo.alternates_for(f->spec.src, f->spec.dst);
          if (!alts) continue;
          const Path* pick = nullptr;
          double best_util = std::numeric_limits<double>::infinity();
          for (const Path& alt : *alts) {
            if (control_detail::path_uses_link(alt, hot)) continue;
            double worst = 0;
            for (const PathHop& hop : alt)
              worst = std::max(worst, s.utilization_instant(dir_id(hop.link, hop.forward)));
            if (worst < best_util) {
              best_util = worst;
              pick = &alt;
            }
          }
          if (!pick) continue;
          if (!best || f->rate_bps > best->rate_bps) {
            best = f;
            best_alt = pick;
          }
        }
        if (best) {
          rep.actions.push_back(
              {ts, ifaces[i].id, policy_name(policy.kind), "divert", preds[i]});
          ++rep.diverted_flows;
          s.reroute_flow(best->spec.id, *best_alt);
        } else {
          rep.actions.push_back(
              {ts, ifaces[i].id, policy_name(policy.kind), "no_alternate", preds[i]});
        }
      }
    }

  });

  rep.sim_stats = sim.stats();
  return rep;
}

/// Utilization timelines must match the baseline exactly up to (and not
/// including) the first tick an action fired.
inline bool prefix_equal_until_first_action(const ControlledRunReport& policy_run,
                                            const ControlledRunReport& baseline) {
  std::int64_t limit = policy_run.first_action_tick.value_or(policy_run.ticks);
  for (const auto& [iface, util] : policy_run.utilization) {
    auto it = baseline.utilization.find(iface);
    if (it == baseline.utilization.end()) return false;
    for (std::int64_t k = 0; k < limit; ++k) {
      if (static_cast<std::size_t>(k) >= util.size() ||
          static_cast<std::size_t>(k) >= it->second.size())
        return false;
      if (util[static_cast<std::size_t>(k)] != it->second[static_cast<std::size_t>(k)])
        return false;
    }
  }
  return true;
}

inline void write_actions_csv(const ControlledRunReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "timestamp,interface,policy,action,prediction\n";
  for (const ActionRow& a : rep.actions)
    out << a.timestamp << ',' << a.interface << ',' << a.policy << ',' << a.action << ','
        << format_double(a.prediction) << '\n';
}

inline void write_control_report_csv(const ControlledRunReport& rep, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "interface,ticks,overload_ticks,max_utilization,mean_utilization\n";
  for (const std::string& id : rep.interfaces) {
    const std::vector<double>& u = rep.utilization.at(id);
    double mx = 0, mean = 0;
    std::int64_t over = 0;
    for (double v : u) {
      mx = std::max(mx, v);
      mean += v;
      if (v > 0.95) ++over;
    }
    if (!u.empty()) mean /= static_cast<double>(u.size());
    out << id << ',' << u.size() << ',' << over << ',' << format_double(mx) << ','
        << format_double(mean) << '\n';
  }
}

}  // namespace bwpred
