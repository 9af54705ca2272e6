#include <doctest.h>

#include <set>

#include "kpath/error.hpp"
#include "kpath/topology.hpp"
#include "oracles.hpp"

using namespace kpath;
using namespace kpath::testing;

namespace {

size_t count_level(const Topology& t, int level) {
  size_t n = 0;
  const std::string prefix = "L" + std::to_string(level) + "_";
  for (NodeId v = 0; v < t.node_count(); ++v) {
    if (t.node_name(v).rfind(prefix, 0) == 0) ++n;
  }
  return n;
}

}  // namespace

TEST_CASE("xgft(2;3,6;3,3) level populations") {
  const Topology t = make_xgft(2, {3, 6}, {3, 3});
  CHECK(count_level(t, 0) == 18);
  CHECK(count_level(t, 1) == 9);
  CHECK(count_level(t, 2) == 9);
  CHECK(t.node_count() == 36);
  CHECK(t.endpoints().size() == 18);
  // Cables: 18 leaves x 3 parents + 9 level-1 x 3 parents.
  CHECK(t.cable_count() == 18 * 3 + 9 * 3);
  CHECK(t.strongly_connected());
}

TEST_CASE("xgft(1;4;1) is a star") {
  const Topology t = make_xgft(1, {4}, {1});
  CHECK(t.node_count() == 5);
  CHECK(t.link_count() == 8);
  CHECK(t.endpoints().size() == 4);
  CHECK(t.strongly_connected());
}

TEST_CASE("xgft leaf count is the product of the children sequence") {
  const Topology a = make_xgft(2, {5, 10}, {5, 5});
  CHECK(a.endpoints().size() == 50);
  CHECK(count_level(a, 2) == 25);
  const Topology b = make_xgft(3, {2, 3, 4}, {2, 1, 2});
  CHECK(b.endpoints().size() == 24);
  CHECK(count_level(b, 3) == 4);
  CHECK(b.strongly_connected());
}

TEST_CASE("xgft rejects bad parameters") {
  CHECK_THROWS_AS(make_xgft(0, {}, {}), Error);
  CHECK_THROWS_AS(make_xgft(2, {3}, {3, 3}), Error);
  CHECK_THROWS_AS(make_xgft(1, {0}, {1}), Error);
}

TEST_CASE("irregular generator: counts, determinism, connectivity") {
  const Topology t = make_irregular(10, 3.0, 1);
  CHECK(t.node_count() == 10);
  CHECK(t.cable_count() == 15);
  CHECK(t.link_count() == 30);
  CHECK(t.strongly_connected());
  CHECK(t.endpoints().size() == 10);

  CHECK(save_topology(make_irregular(10, 3.0, 1)) == save_topology(t));
  CHECK(save_topology(make_irregular(10, 3.0, 2)) != save_topology(t));

  for (uint64_t seed = 0; seed < 20; ++seed) {
    CHECK(make_irregular(17, 3.4, seed).strongly_connected());
  }
}

TEST_CASE("irregular generator: 3 nodes at degree 2 is the triangle") {
  const Topology t = make_irregular(3, 2.0, 7);
  CHECK(t.cable_count() == 3);
  std::set<std::pair<NodeId, NodeId>> cables;
  for (const Link& l : t.links()) {
    cables.insert({std::min(l.src, l.dst), std::max(l.src, l.dst)});
  }
  CHECK(cables.size() == 3);
}

TEST_CASE("irregular generator rejects impossible degrees") {
  CHECK_THROWS_AS(make_irregular(2, 2.0, 1), Error);
  CHECK_THROWS_AS(make_irregular(10, 1.5, 1), Error);
  CHECK_THROWS_AS(make_irregular(5, 4.9, 1), Error);  // > n-1 cables per node
}

TEST_CASE("imbalance fixture loads with 18 directed links") {
  const Topology t = load_topology_file(std::string(KPATH_DATA_DIR) + "/imbalance.topo");
  CHECK(t.node_count() == 6);
  CHECK(t.link_count() == 18);
  CHECK(t.endpoints().size() == 2);
  CHECK(t.strongly_connected());
  CHECK(link(t, "S", "A") != kNoLink);
  CHECK(link(t, "C", "D") != kNoLink);
}

TEST_CASE("topology file round-trips canonically") {
  const Topology t = make_xgft(2, {3, 6}, {3, 3});
  const std::string text = save_topology(t);
  const Topology back = load_topology(text);
  CHECK(save_topology(back) == text);
  CHECK(back.node_count() == t.node_count());
  CHECK(back.link_count() == t.link_count());
  CHECK(back.endpoints() == t.endpoints());

  const Topology irr = make_irregular(12, 3.0, 9);
  CHECK(save_topology(load_topology(save_topology(irr))) == save_topology(irr));
}

TEST_CASE("topology parse errors carry line numbers") {
  CHECK_THROWS_WITH_AS(load_topology("link a b 1 1\n"),
                       doctest::Contains("line 1"), Error);
  CHECK_THROWS_WITH_AS(load_topology("node a\nnode b\nlink a b 0 1\n"),
                       doctest::Contains("line 3"), Error);
  CHECK_THROWS_WITH_AS(load_topology("node a\nnode b\nlink a c 1 1\n"),
                       doctest::Contains("unknown node"), Error);
  CHECK_THROWS_WITH_AS(load_topology(""), doctest::Contains("no node"), Error);
  CHECK_THROWS_WITH_AS(load_topology("node a\nnode a\n"),
                       doctest::Contains("duplicate"), Error);
  CHECK_THROWS_WITH_AS(load_topology("node a\nnode b\nlink a b 1 1\nlink b a 1 1\n"),
                       doctest::Contains("duplicate cable"), Error);
  CHECK_THROWS_WITH_AS(load_topology("node a\nnode b\nendpoint c\n"),
                       doctest::Contains("unknown node"), Error);
}

TEST_CASE("comments and endpoint defaults") {
  const Topology t = load_topology(
      "# comment\nnode a\nnode b # trailing\nlink a b 2 5\n");
  CHECK(t.node_count() == 2);
  CHECK(t.endpoints().size() == 2);  // defaults to all nodes
  CHECK(t.link(0).weight == 2.0);
  CHECK(t.link(0).capacity == 5.0);
  CHECK(t.link(1).src == t.node_by_name("b"));
}
