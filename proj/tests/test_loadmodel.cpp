#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "kpath/error.hpp"
#include "kpath/loadmodel.hpp"
#include "kpath/rng.hpp"
#include "kpath/plan.hpp"
#include "kpath/topology.hpp"
#include "kpath/traffic.hpp"
#include "oracles.hpp"

using namespace kpath;
using namespace kpath::testing;

namespace {

Topology imbalance_topo() {
  return load_topology_file(std::string(KPATH_DATA_DIR) + "/imbalance.topo");
}

TrafficMatrix single_unit_flow(const Topology& t) {
  TrafficMatrix m;
  m.set(node(t, "S"), node(t, "T"), 1.0);
  m.finalize();
  return m;
}

MultipathPlan manual_plan(const Topology& t, NodeId s, NodeId d,
                          const std::vector<std::vector<std::string>>& paths) {
  MultipathPlan plan;
  MultipathPlan::FlowPaths fp{s, d, {}};
  for (const auto& seq : paths) {
    Path p;
    p.src = s;
    p.dst = d;
    for (size_t i = 1; i < seq.size(); ++i) {
      const LinkId e = link(t, seq[i - 1], seq[i]);
      REQUIRE(e != kNoLink);
      p.links.push_back(e);
      p.length += t.link(e).weight;
    }
    fp.paths.push_back(std::move(p));
  }
  plan.flows.push_back(std::move(fp));
  return plan;
}

}  // namespace

TEST_CASE("ECMP fluid split on the imbalance example") {
  const Topology t = imbalance_topo();
  const LoadLedger ledger = ecmp_loads(t, single_unit_flow(t));

  auto load = [&](const char* u, const char* v) { return ledger.load(link(t, u, v)); };
  CHECK(load("S", "A") == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(load("S", "B") == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(load("A", "C") == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(load("B", "C") == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(load("B", "D") == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(load("C", "T") == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(load("D", "T") == doctest::Approx(0.25).epsilon(1e-9));
  CHECK(load("A", "B") == 0.0);
  CHECK(load("C", "D") == 0.0);
  CHECK(ledger.max_utilization() == doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("ECMP: zero matrix gives a zero ledger") {
  const Topology t = imbalance_topo();
  const TrafficMatrix empty;
  const LoadLedger ledger = ecmp_loads(t, empty);
  for (LinkId e = 0; e < t.link_count(); ++e) CHECK(ledger.load(e) == 0.0);
}

TEST_CASE("ECMP per-flow conservation") {
  const Topology t = make_irregular(12, 3.0, 6);
  for (uint64_t seed = 0; seed < 4; ++seed) {
    TrafficMatrix m;
    Rng rng(seed);
    const NodeId s = static_cast<NodeId>(rng.bounded(t.node_count()));
    NodeId d = static_cast<NodeId>(rng.bounded(t.node_count()));
    if (d == s) d = (d + 1) % t.node_count();
    const double demand = 0.5 + rng.u01();
    m.set(s, d, demand);
    m.finalize();

    const LoadLedger ledger = ecmp_loads(t, m);
    for (NodeId v = 0; v < t.node_count(); ++v) {
      double in = 0, out = 0;
      for (LinkId e : t.in_links(v)) in += ledger.load(e);
      for (LinkId e : t.out_links(v)) out += ledger.load(e);
      if (v == s) {
        CHECK(out - in == doctest::Approx(demand).epsilon(1e-9));
      } else if (v == d) {
        CHECK(in - out == doctest::Approx(demand).epsilon(1e-9));
      } else {
        CHECK(in == doctest::Approx(out).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("ECMP on the fat tree is flat under uniform traffic") {
  const Topology t = make_xgft(2, {3, 6}, {3, 3});
  const LoadLedger ledger = ecmp_loads(t, uniform_matrix(t));
  // All leaf->switch links carry the same load; likewise switch->top links.
  double leaf_up = -1, l1_up = -1;
  for (const Link& l : t.links()) {
    const bool from_leaf = t.node_name(l.src).rfind("L0_", 0) == 0;
    const bool to_l1 = t.node_name(l.dst).rfind("L1_", 0) == 0;
    const bool from_l1 = t.node_name(l.src).rfind("L1_", 0) == 0;
    const bool to_top = t.node_name(l.dst).rfind("L2_", 0) == 0;
    if (from_leaf && to_l1) {
      if (leaf_up < 0) leaf_up = ledger.load(l.id);
      CHECK(ledger.load(l.id) == doctest::Approx(leaf_up).epsilon(1e-9));
    } else if (from_l1 && to_top) {
      if (l1_up < 0) l1_up = ledger.load(l.id);
      CHECK(ledger.load(l.id) == doctest::Approx(l1_up).epsilon(1e-9));
    }
  }
  CHECK(leaf_up > 0);
  CHECK(l1_up > 0);
}

TEST_CASE("ECMP loads ignore capacity scaling") {
  const std::string text = save_topology(make_irregular(9, 3.0, 2));
  const Topology t1 = load_topology(text);
  // Same cables with capacity 7.
  std::string scaled = text;
  size_t pos = 0;
  while ((pos = scaled.find(" 1 1\n", pos)) != std::string::npos) {
    scaled.replace(pos, 5, " 1 7\n");
    pos += 5;
  }
  const Topology t7 = load_topology(scaled);
  const TrafficMatrix m1 = random_matrix(t1, 5);
  const TrafficMatrix m7 = random_matrix(t7, 5);
  const LoadLedger a = ecmp_loads(t1, m1);
  const LoadLedger b = ecmp_loads(t7, m7);
  for (LinkId e = 0; e < t1.link_count(); ++e) {
    CHECK(a.load(e) == doctest::Approx(b.load(e)).epsilon(1e-12));
  }
  CHECK(b.max_utilization() == doctest::Approx(a.max_utilization() / 7).epsilon(1e-9));
}

TEST_CASE("plan loads: disjoint pair halves the peak") {
  const Topology t = imbalance_topo();
  const MultipathPlan plan = manual_plan(t, node(t, "S"), node(t, "T"),
                                         {{"S", "A", "C", "T"}, {"S", "B", "D", "T"}});
  const LoadLedger ledger = plan_loads(t, single_unit_flow(t), plan);
  for (const char* pair : {"SA", "AC", "CT", "SB", "BD", "DT"}) {
    const std::string u(1, pair[0]), v(1, pair[1]);
    CHECK(ledger.load(link(t, u, v)) == doctest::Approx(0.5).epsilon(1e-12));
  }
  CHECK(ledger.max_utilization() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("plan loads: single path carries the whole demand") {
  const Topology t = imbalance_topo();
  const MultipathPlan plan =
      manual_plan(t, node(t, "S"), node(t, "T"), {{"S", "A", "C", "T"}});
  const LoadLedger ledger = plan_loads(t, single_unit_flow(t), plan);
  CHECK(ledger.load(link(t, "S", "A")) == doctest::Approx(1.0));
  CHECK(ledger.load(link(t, "A", "C")) == doctest::Approx(1.0));
  CHECK(ledger.load(link(t, "C", "T")) == doctest::Approx(1.0));
  CHECK(ledger.load(link(t, "S", "B")) == 0.0);
}

TEST_CASE("plan loads: missing flow is an error") {
  const Topology t = imbalance_topo();
  MultipathPlan empty;
  CHECK_THROWS_AS(plan_loads(t, single_unit_flow(t), empty), Error);
}

TEST_CASE("plan loads are linear in the matrix") {
  const Topology t = make_xgft(2, {3, 6}, {3, 3});
  const TrafficMatrix m1 = random_matrix(t, 21);
  const TrafficMatrix m2 = random_matrix(t, 22);
  TrafficMatrix sum;
  for (const auto& e : m1.entries()) {
    sum.set(e.src, e.dst, e.demand + m2.find(e.src, e.dst)->demand);
  }
  sum.finalize();

  const MultipathPlan plan = plan_fixed_k(t, m1, 2, 0.0, CostFunction{}, 3);
  const LoadLedger a = plan_loads(t, m1, plan);
  const LoadLedger b = plan_loads(t, m2, plan);
  const LoadLedger c = plan_loads(t, sum, plan);
  for (LinkId e = 0; e < t.link_count(); ++e) {
    CHECK(c.load(e) == doctest::Approx(a.load(e) + b.load(e)).epsilon(1e-9));
  }
}

TEST_CASE("report: sorted utilizations and fixed CSV columns") {
  const Topology t = imbalance_topo();
  const LoadLedger ledger = ecmp_loads(t, single_unit_flow(t));
  const LoadReport r = report(ledger);
  REQUIRE(r.rows.size() == t.link_count());
  CHECK(r.max_utilization == doctest::Approx(0.75));
  CHECK(r.sorted_utilizations.back() == r.max_utilization);
  for (size_t i = 1; i < r.sorted_utilizations.size(); ++i) {
    CHECK(r.sorted_utilizations[i - 1] <= r.sorted_utilizations[i]);
  }
  // The sorted sequence is a permutation of the per-link utilizations.
  std::vector<double> direct;
  for (LinkId e = 0; e < t.link_count(); ++e) direct.push_back(ledger.utilization(e));
  std::sort(direct.begin(), direct.end());
  for (size_t i = 0; i < direct.size(); ++i) {
    CHECK(direct[i] == doctest::Approx(r.sorted_utilizations[i]));
  }

  const std::string csv = report_csv(r, t);
  CHECK(csv.rfind("rank,link_src,link_dst,load,capacity,utilization\n", 0) == 0);
  CHECK(report_curve(r).find("1 ") == 0);
}

TEST_CASE("all-zero ledger reports a flat zero curve") {
  const Topology t = imbalance_topo();
  const LoadReport r = report(LoadLedger(t));
  CHECK(r.max_utilization == 0.0);
  for (double u : r.sorted_utilizations) CHECK(u == 0.0);
}
