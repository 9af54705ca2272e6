#pragma once

#include <vector>

#include "kpath/topology.hpp"

namespace kpath {

/// Absolute tolerance for distance comparisons.
inline constexpr double kDistTol = 1e-9;

/// Shortest-path tree toward a target: d(v) and the tree arc leaving each
/// node. Ties between parents are broken by smallest link id.
struct ShortestPathTree {
  NodeId target = 0;
  std::vector<double> dist;         // d(v), v -> target
  std::vector<LinkId> parent_link;  // kNoLink for the target itself
};

/// Bellman-Ford toward the target. Throws if some node cannot reach it.
ShortestPathTree shortest_tree(const Topology& t, NodeId target);

/// Batch tree construction for many targets. The default build runs the
/// targets in parallel (OpenMP when available); the serial variant is the
/// reference implementation kept for testing and benchmarking.
std::vector<ShortestPathTree> shortest_trees(const Topology& t,
                                             const std::vector<NodeId>& targets);
std::vector<ShortestPathTree> shortest_trees_serial(
    const Topology& t, const std::vector<NodeId>& targets);

/// Length penalty c(e) = d(v) - d(u) + w(e) of a non-tree link u->v.
/// Throws if e is a tree arc.
double sidetrack_cost(const Topology& t, const ShortestPathTree& tree, LinkId e);

/// Per-node out-links lying on some shortest path toward the tree's target
/// (the ECMP next-hop DAG).
std::vector<std::vector<LinkId>> ecmp_dag(const Topology& t,
                                          const ShortestPathTree& tree);

}  // namespace kpath
