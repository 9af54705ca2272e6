#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "kpath/shortest.hpp"
#include "kpath/topology.hpp"

namespace kpath {

inline constexpr double kThetaInf = std::numeric_limits<double>::infinity();
inline constexpr size_t kDefaultMaxPaths = 1000;

/// A loop-free directed path. length = sum of link weights, which equals
/// d(src) + sum of sidetrack penalties of its non-tree links.
struct Path {
  NodeId src = 0;
  NodeId dst = 0;
  std::vector<LinkId> links;
  double length = 0;

  std::vector<NodeId> nodes(const Topology& t) const;
  bool operator==(const Path& other) const {
    return src == other.src && dst == other.dst && links == other.links;
  }
};

/// Builds the path encoded by a SET of sidetrack edges: walk from src, taking
/// the unique applicable sidetrack edge at each node when present, otherwise
/// the tree arc. Returns nullopt when the set is not well-formed (a node is
/// revisited, a sidetrack edge is left unconsumed, or two set members leave
/// the same node).
std::optional<Path> path_from_sidetracks(const Topology& t,
                                         const ShortestPathTree& tree, NodeId src,
                                         const std::vector<LinkId>& sidetracks);

/// Loop-free src->dst paths in ascending length, restricted to those whose
/// sidetrack penalty total is at most theta * d(src), cut at max_paths after
/// (length, lexicographic node sequence) ordering. The first path emitted is
/// a shortest path.
std::vector<Path> enumerate_paths(const Topology& t, NodeId src, NodeId dst,
                                  double theta, size_t max_paths = kDefaultMaxPaths);

/// Same, reusing a precomputed tree toward dst.
std::vector<Path> enumerate_paths(const Topology& t, const ShortestPathTree& tree,
                                  NodeId src, double theta,
                                  size_t max_paths = kDefaultMaxPaths);

/// Per-flow candidate enumeration for many (src, dst) pairs. The default
/// build parallelizes across flows (trees per distinct destination are built
/// once); the serial variant is the reference kept for testing.
std::vector<std::vector<Path>> candidate_paths(
    const Topology& t, const std::vector<std::pair<NodeId, NodeId>>& flows,
    double theta, size_t max_paths);
std::vector<std::vector<Path>> candidate_paths_serial(
    const Topology& t, const std::vector<std::pair<NodeId, NodeId>>& flows,
    double theta, size_t max_paths);

}  // namespace kpath
