#include "kpath/shortest.hpp"

#include <cmath>
#include <limits>

#include "kpath/error.hpp"

namespace kpath {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ShortestPathTree shortest_tree(const Topology& t, NodeId target) {
  if (target >= t.node_count()) fail("shortest_tree: unknown target node");
  const size_t n = t.node_count();
  ShortestPathTree tree;
  tree.target = target;
  tree.dist.assign(n, kInf);
  tree.dist[target] = 0.0;

  // Bellman-Ford; weights are positive so V-1 rounds suffice.
  for (size_t round = 0; round + 1 < std::max<size_t>(n, 2); ++round) {
    bool changed = false;
    for (const Link& e : t.links()) {
      const double nd = tree.dist[e.dst] + e.weight;
      if (nd < tree.dist[e.src]) {
        tree.dist[e.src] = nd;
        changed = true;
      }
    }
    if (!changed) break;
  }

  tree.parent_link.assign(n, kNoLink);
  for (NodeId v = 0; v < n; ++v) {
    if (v == target) continue;
    if (tree.dist[v] == kInf) {
      fail("node '" + t.node_name(v) + "' cannot reach '" + t.node_name(target) + "'");
    }
    for (LinkId e : t.out_links(v)) {  // ascending id: first match wins ties
      const Link& l = t.link(e);
      if (std::abs(tree.dist[v] - (l.weight + tree.dist[l.dst])) <= kDistTol) {
        tree.parent_link[v] = e;
        break;
      }
    }
  }
  return tree;
}

std::vector<ShortestPathTree> shortest_trees_serial(
    const Topology& t, const std::vector<NodeId>& targets) {
  std::vector<ShortestPathTree> trees(targets.size());
  for (size_t i = 0; i < targets.size(); ++i) {
    trees[i] = shortest_tree(t, targets[i]);
  }
  return trees;
}

std::vector<ShortestPathTree> shortest_trees(const Topology& t,
                                             const std::vector<NodeId>& targets) {
  std::vector<ShortestPathTree> trees(targets.size());
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < static_cast<long>(targets.size()); ++i) {
    try {
      trees[i] = shortest_tree(t, targets[i]);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  return trees;
}

double sidetrack_cost(const Topology& t, const ShortestPathTree& tree, LinkId e) {
  const Link& l = t.link(e);
  if (tree.parent_link[l.src] == e) fail("sidetrack_cost: link is a tree arc");
  const double c = tree.dist[l.dst] - tree.dist[l.src] + l.weight;
  return c < 0 ? 0.0 : c;  // negatives only from rounding
}

std::vector<std::vector<LinkId>> ecmp_dag(const Topology& t,
                                          const ShortestPathTree& tree) {
  std::vector<std::vector<LinkId>> dag(t.node_count());
  for (NodeId v = 0; v < t.node_count(); ++v) {
    if (v == tree.target) continue;
    for (LinkId e : t.out_links(v)) {
      const Link& l = t.link(e);
      if (std::abs(tree.dist[v] - (l.weight + tree.dist[l.dst])) <= kDistTol) {
        dag[v].push_back(e);
      }
    }
  }
  return dag;
}

}  // namespace kpath
