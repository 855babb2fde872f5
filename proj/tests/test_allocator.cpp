#include <catch2/catch_amalgamated.hpp>

#include "bwpred/sim.hpp"

using namespace bwpred;

namespace {

/// Topology with `n` independent links, each on its own node pair. Paths are
/// assembled by hand, so flows can cross any subset of links.
struct AllocRig {
  Topology topo;
  std::vector<Path> paths;
  std::vector<AllocFlow> flows;

  explicit AllocRig(const std::vector<double>& caps_mbps) {
    for (std::size_t i = 0; i < caps_mbps.size(); ++i) {
      std::string a = "a" + std::to_string(i), b = "b" + std::to_string(i);
      topo.nodes.push_back({a, NodeKind::Router});
      topo.nodes.push_back({b, NodeKind::Router});
      Link l;
      l.id = "L" + std::to_string(i);
      l.a = static_cast<int>(topo.nodes.size()) - 2;
      l.b = static_cast<int>(topo.nodes.size()) - 1;
      l.capacity_bps = caps_mbps[i] * 1e6;
      topo.links.push_back(l);
    }
    paths.reserve(256);
  }

  void add(Protocol proto, double mbps, const std::vector<int>& links) {
    Path p;
    for (int li : links) p.push_back({li, true});
    paths.push_back(p);
    flows.push_back({proto, mbps * 1e6, nullptr});
    // vector may have reallocated; fix all pointers
    for (std::size_t i = 0; i < flows.size(); ++i) flows[i].path = &paths[i];
  }

  std::vector<double> run() const { return allocate_rates(topo, flows); }
};

/// Textbook peeling oracle for demand-capped max-min on TCP-only inputs:
/// repeatedly satisfy the smallest demand if it fits under every link's
/// equal share, otherwise saturate the most-constrained link.
std::vector<double> water_fill_oracle(std::vector<double> cap_bps,
                                      std::vector<std::pair<double, std::vector<int>>> flows) {
  std::size_t F = flows.size();
  std::vector<double> rate(F, 0.0);
  std::vector<bool> done(F, false);
  while (true) {
    std::vector<int> count(cap_bps.size(), 0);
    for (std::size_t i = 0; i < F; ++i)
      if (!done[i])
        for (int l : flows[i].second) ++count[static_cast<std::size_t>(l)];
    bool any = false;
    for (std::size_t i = 0; i < F; ++i) any = any || !done[i];
    if (!any) break;

    double share = std::numeric_limits<double>::infinity();
    std::size_t bottleneck = cap_bps.size();
    for (std::size_t l = 0; l < cap_bps.size(); ++l) {
      if (count[l] == 0) continue;
      double s = std::max(0.0, cap_bps[l]) / count[l];
      if (s < share) {
        share = s;
        bottleneck = l;
      }
    }
    double dmin = std::numeric_limits<double>::infinity();
    std::size_t dflow = F;
    for (std::size_t i = 0; i < F; ++i)
      if (!done[i] && flows[i].first < dmin) {
        dmin = flows[i].first;
        dflow = i;
      }

    if (dmin <= share + 1e-12) {
      rate[dflow] = dmin;
      done[dflow] = true;
      for (int l : flows[dflow].second) cap_bps[static_cast<std::size_t>(l)] -= dmin;
    } else {
      for (std::size_t i = 0; i < F; ++i) {
        if (done[i]) continue;
        bool on = false;
        for (int l : flows[i].second) on = on || static_cast<std::size_t>(l) == bottleneck;
        if (!on) continue;
        rate[i] = share;
        done[i] = true;
        for (int l : flows[i].second) cap_bps[static_cast<std::size_t>(l)] -= share;
      }
    }
  }
  return rate;
}

/// Max-min optimality: every flow is either demand-limited or crosses a
/// saturated link on which no other flow holds a larger rate.
void check_maxmin_property(const std::vector<double>& cap_bps,
                           const std::vector<std::pair<double, std::vector<int>>>& flows,
                           const std::vector<double>& rate) {
  std::vector<double> used(cap_bps.size(), 0.0);
  for (std::size_t i = 0; i < flows.size(); ++i) {
    REQUIRE(rate[i] <= flows[i].first * (1 + 1e-9));
    for (int l : flows[i].second) used[static_cast<std::size_t>(l)] += rate[i];
  }
  for (std::size_t l = 0; l < cap_bps.size(); ++l)
    REQUIRE(used[l] <= cap_bps[l] * (1 + 1e-9) + 1e-6);
  for (std::size_t i = 0; i < flows.size(); ++i) {
    if (rate[i] >= flows[i].first * (1 - 1e-9)) continue;  // demand-limited
    bool pinned = false;
    for (int li : flows[i].second) {
      std::size_t l = static_cast<std::size_t>(li);
      if (used[l] < cap_bps[l] * (1 - 1e-9)) continue;  // link not saturated
      double biggest = 0;
      for (std::size_t j = 0; j < flows.size(); ++j)
        for (int lj : flows[j].second)
          if (static_cast<std::size_t>(lj) == l) biggest = std::max(biggest, rate[j]);
      if (rate[i] >= biggest * (1 - 1e-9)) pinned = true;
    }
    INFO("flow " << i << " rate " << rate[i] << " is neither demand-limited nor bottlenecked");
    REQUIRE(pinned);
  }
}

}  // namespace

TEST_CASE("single uncontended TCP flow gets its target") {
  AllocRig rig({100});
  rig.add(Protocol::Tcp, 2.0, {0});
  auto r = rig.run();
  REQUIRE(r[0] == Catch::Approx(2e6));
}

TEST_CASE("60 UDP flows of 2 Mbps share 100 Mbps proportionally") {
  AllocRig rig({100});
  for (int i = 0; i < 60; ++i) rig.add(Protocol::Udp, 2.0, {0});
  auto r = rig.run();
  double expected = 100.0 / 120.0 * 2e6;  // capacity / total demand
  double total = 0;
  for (double v : r) {
    REQUIRE(v == Catch::Approx(expected).epsilon(1e-12));
    total += v;
  }
  REQUIRE(total == Catch::Approx(100e6).epsilon(1e-9));
}

TEST_CASE("demand-capped max-min: 80/10 fits, 80/80 splits evenly") {
  {
    AllocRig rig({100});
    rig.add(Protocol::Tcp, 80.0, {0});
    rig.add(Protocol::Tcp, 10.0, {0});
    auto r = rig.run();
    REQUIRE(r[0] == Catch::Approx(80e6));
    REQUIRE(r[1] == Catch::Approx(10e6));
  }
  {
    AllocRig rig({100});
    rig.add(Protocol::Tcp, 80.0, {0});
    rig.add(Protocol::Tcp, 80.0, {0});
    auto r = rig.run();
    REQUIRE(r[0] == Catch::Approx(50e6));
    REQUIRE(r[1] == Catch::Approx(50e6));
  }
}

TEST_CASE("UDP saturating a link starves TCP on it") {
  AllocRig rig({100});
  for (int i = 0; i < 60; ++i) rig.add(Protocol::Udp, 2.0, {0});
  rig.add(Protocol::Tcp, 10.0, {0});
  auto r = rig.run();
  REQUIRE(r.back() == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("UDP takes min over its path's scales") {
  AllocRig rig({200, 50});
  // 30 UDP flows on link 0 only; link 0 demand is 120 <= 200, unscaled.
  for (int i = 0; i < 30; ++i) rig.add(Protocol::Udp, 2.0, {0});
  // 30 UDP flows crossing both; link 1 demand 60 > 50 scales them.
  for (int i = 0; i < 30; ++i) rig.add(Protocol::Udp, 2.0, {0, 1});
  auto r = rig.run();
  for (int i = 0; i < 30; ++i) REQUIRE(r[static_cast<std::size_t>(i)] == Catch::Approx(2e6));
  double scale = 50.0 / 60.0;
  for (int i = 30; i < 60; ++i)
    REQUIRE(r[static_cast<std::size_t>(i)] == Catch::Approx(2e6 * scale).epsilon(1e-12));
}

TEST_CASE("multi-link TCP bottleneck is end-to-end") {
  AllocRig rig({100, 30});
  rig.add(Protocol::Tcp, 90.0, {0, 1});  // capped by link 1
  rig.add(Protocol::Tcp, 90.0, {0});     // takes the rest of link 0
  auto r = rig.run();
  REQUIRE(r[0] == Catch::Approx(30e6));
  REQUIRE(r[1] == Catch::Approx(70e6));
}

TEST_CASE("allocator matches the water-filling oracle on enumerated cases") {
  // every nonempty link subset over 3 links, demands from a small ladder
  const std::vector<double> caps = {100e6, 60e6, 30e6};
  const std::vector<std::vector<int>> subsets = {{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}, {0, 1, 2}};
  const std::vector<double> demands = {10e6, 40e6, 120e6};

  RngStream rng(2024);
  int cases = 0;
  for (int f = 1; f <= 6; ++f) {
    for (int rep = 0; rep < 800; ++rep) {
      AllocRig rig({100, 60, 30});
      std::vector<std::pair<double, std::vector<int>>> oflows;
      for (int i = 0; i < f; ++i) {
        const auto& subset = subsets[static_cast<std::size_t>(rng.uniform_int(0, 6))];
        double d = demands[static_cast<std::size_t>(rng.uniform_int(0, 2))];
        rig.add(Protocol::Tcp, d / 1e6, subset);
        oflows.push_back({d, subset});
      }
      auto got = rig.run();
      auto want = water_fill_oracle(caps, oflows);
      for (std::size_t i = 0; i < got.size(); ++i)
        REQUIRE(got[i] == Catch::Approx(want[i]).epsilon(1e-9).margin(1e-3));
      check_maxmin_property(caps, oflows, got);
      ++cases;
    }
  }
  REQUIRE(cases == 4800);
}

TEST_CASE("zero flows yield an empty allocation") {
  AllocRig rig({100});
  REQUIRE(rig.run().empty());
}
