#include <doctest.h>

#include <cmath>
#include <set>

#include "kpath/error.hpp"
#include "kpath/rng.hpp"
#include "kpath/topology.hpp"
#include "kpath/traffic.hpp"
#include "oracles.hpp"

using namespace kpath;
using namespace kpath::testing;

namespace {

Topology imbalance_topo() {
  return load_topology_file(std::string(KPATH_DATA_DIR) + "/imbalance.topo");
}

}  // namespace

TEST_CASE("uniform matrix") {
  const Topology t = imbalance_topo();
  const TrafficMatrix m = uniform_matrix(t);
  REQUIRE(m.flow_count() == 2);
  CHECK(m.find(node(t, "S"), node(t, "T"))->demand == 1.0);
  CHECK(m.find(node(t, "T"), node(t, "S"))->demand == 1.0);

  const Topology ft = make_xgft(2, {3, 6}, {3, 3});
  CHECK(uniform_matrix(ft).flow_count() == 18 * 17);

  Topology single;
  single.add_node("a");
  CHECK_THROWS_AS(uniform_matrix(single), Error);
}

TEST_CASE("random matrix: determinism, range, mean") {
  const Topology t = make_irregular(105, 4.0, 3);
  const TrafficMatrix m = random_matrix(t, 42);
  CHECK(m.flow_count() == 105 * 104);

  const TrafficMatrix again = random_matrix(t, 42);
  REQUIRE(again.flow_count() == m.flow_count());
  for (size_t i = 0; i < m.flow_count(); ++i) {
    CHECK(m.entries()[i].demand == again.entries()[i].demand);
  }
  CHECK(random_matrix(t, 43).entries()[0].demand != m.entries()[0].demand);

  double sum = 0;
  for (const auto& e : m.entries()) {
    CHECK(e.demand > 0.0);
    CHECK(e.demand < 1.0);
    sum += e.demand;
  }
  const double mean = sum / static_cast<double>(m.flow_count());
  CHECK(mean == doctest::Approx(0.5).epsilon(0.04));
}

// Replays the generator's seeded draws (hot-set shuffles, then one uniform per
// ordered pair) to pin down the hot sets and raw demands exactly.
namespace {
struct SkewReplay {
  std::set<NodeId> hot_senders, hot_receivers;
  std::vector<double> raw;  // in endpoint-pair iteration order
};

SkewReplay replay_skew(const Topology& t, double hot_fraction, uint64_t seed) {
  Rng rng(seed);
  const auto& eps = t.endpoints();
  const size_t h = static_cast<size_t>(
      std::ceil(hot_fraction * static_cast<double>(eps.size())));
  auto draw = [&]() {
    std::vector<NodeId> pool = eps;
    rng.shuffle(pool);
    pool.resize(h);
    return std::set<NodeId>(pool.begin(), pool.end());
  };
  SkewReplay r;
  r.hot_senders = draw();
  r.hot_receivers = draw();
  for (NodeId s : eps) {
    for (NodeId d : eps) {
      if (s != d) r.raw.push_back(rng.u01());
    }
  }
  return r;
}
}  // namespace

TEST_CASE("skewed matrix: exact hot share, preserved total") {
  const Topology t = make_irregular(10, 3.0, 5);
  const TrafficMatrix m = skewed_matrix(t, 0.2, 0.8, 11);
  CHECK(m.flow_count() == 90);

  const SkewReplay r = replay_skew(t, 0.2, 11);
  CHECK(r.hot_senders.size() == 2);
  CHECK(r.hot_receivers.size() == 2);

  double raw_total = 0;
  for (double x : r.raw) raw_total += x;
  CHECK(m.total() == doctest::Approx(raw_total).epsilon(1e-12));

  double hot = 0;
  for (const auto& e : m.entries()) {
    if (r.hot_senders.count(e.src) && r.hot_receivers.count(e.dst)) hot += e.demand;
  }
  CHECK(hot / m.total() == doctest::Approx(0.8).epsilon(1e-9));
}

TEST_CASE("skewed matrix: hot block covering everything is left alone") {
  const Topology t = make_irregular(4, 2.0, 2);
  // ceil(0.9 * 4) = 4 hot senders and receivers: every pair is hot.
  const TrafficMatrix m = skewed_matrix(t, 0.9, 0.5, 3);
  const SkewReplay r = replay_skew(t, 0.9, 3);
  REQUIRE(m.flow_count() == r.raw.size());
  for (size_t i = 0; i < r.raw.size(); ++i) {
    CHECK(m.entries()[i].demand == r.raw[i]);  // identity, no rescale possible
  }
}

TEST_CASE("perturb matrix") {
  const Topology t = make_irregular(8, 3.0, 4);
  const TrafficMatrix m = random_matrix(t, 1);

  const TrafficMatrix id = perturb_matrix(m, 1.0, 1.0, 99);
  REQUIRE(id.flow_count() == m.flow_count());
  for (size_t i = 0; i < m.flow_count(); ++i) {
    CHECK(id.entries()[i].demand == m.entries()[i].demand);
  }

  const TrafficMatrix p = perturb_matrix(m, 0.5, 1.5, 7);
  REQUIRE(p.flow_count() == m.flow_count());
  for (size_t i = 0; i < m.flow_count(); ++i) {
    const double ratio = p.entries()[i].demand / m.entries()[i].demand;
    CHECK(ratio >= 0.5);
    CHECK(ratio <= 1.5);
  }

  CHECK_THROWS_AS(perturb_matrix(m, -0.1, 1.0, 1), Error);
  CHECK_THROWS_AS(perturb_matrix(m, 2.0, 1.0, 1), Error);
}

TEST_CASE("traffic CSV round-trips losslessly") {
  const Topology t = make_irregular(9, 3.0, 8);
  const TrafficMatrix m = random_matrix(t, 17);
  const std::string csv = save_traffic(m, t);
  const TrafficMatrix back = load_traffic(csv, t);
  REQUIRE(back.flow_count() == m.flow_count());
  for (size_t i = 0; i < m.flow_count(); ++i) {
    CHECK(back.entries()[i].src == m.entries()[i].src);
    CHECK(back.entries()[i].dst == m.entries()[i].dst);
    CHECK(back.entries()[i].demand == m.entries()[i].demand);
  }
  CHECK(save_traffic(back, t) == csv);
}

TEST_CASE("traffic CSV errors") {
  const Topology t = imbalance_topo();
  CHECK_THROWS_WITH_AS(load_traffic("src,dst,demand\nS,X,1\n", t),
                       doctest::Contains("line 2"), Error);
  CHECK_THROWS_WITH_AS(load_traffic("src,dst,demand\nS,T,-1\n", t),
                       doctest::Contains("negative"), Error);
  CHECK_THROWS_WITH_AS(load_traffic("nope\n", t), doctest::Contains("header"), Error);
  // Zero demands are dropped on load.
  CHECK(load_traffic("src,dst,demand\nS,T,0\n", t).flow_count() == 0);
}
