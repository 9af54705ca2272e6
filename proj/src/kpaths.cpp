#include "kpath/kpaths.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "kpath/error.hpp"

namespace kpath {

namespace {

constexpr double kCostTol = 1e-9;

double max_weight(const Topology& t) {
  double w = 0;
  for (const Link& e : t.links()) w = std::max(w, e.weight);
  return w;
}

// A queued walk: a sidetrack sequence together with the node/link walk it
// encodes (simple prefix through the last sidetrack head, then tree descent
// to the target). The descent may collide with the prefix, in which case the
// walk is never emitted but may still carry extensions attached before the
// collision point.
struct Walk {
  double cost = 0;  // sum of sidetrack penalties
  std::vector<NodeId> nodes;
  std::vector<LinkId> links;
  uint32_t descent_begin = 0;  // index into nodes where the final descent starts
  bool loop_free = true;
};

struct WalkOrder {
  bool operator()(const Walk& a, const Walk& b) const { return a.cost > b.cost; }
};

// Ascending-length enumeration via sidetrack sequences: each new sidetrack
// attaches at a node of the previous walk's final tree descent, which makes
// every loop-free path reachable through a chain of queued walks.
class Enumerator {
 public:
  Enumerator(const Topology& t, const ShortestPathTree& tree, NodeId src,
             double theta, size_t max_paths)
      : topo_(t), tree_(tree), src_(src), theta_(theta), max_paths_(max_paths) {
    d_src_ = tree.dist[src];
    if (!std::isfinite(d_src_)) {
      fail("no path from '" + t.node_name(src) + "' to '" +
           t.node_name(tree.target) + "'");
    }
    // No loop-free path can be longer than this; prunes theta = inf runs.
    length_bound_ =
        static_cast<double>(t.node_count() - 1) * max_weight(t) + kCostTol;
    marked_.assign(t.node_count(), 0);
  }

  std::vector<Path> run() {
    push_initial();
    std::vector<Path> out;
    while (!queue_.empty() && out.size() < max_paths_) {
      // Drain one cost level completely (zero-penalty extensions join it while
      // draining) so that equal-length paths are emitted in lexicographic
      // node-sequence order.
      const double level = queue_.top().cost;
      std::vector<Walk> finished;
      while (!queue_.empty() && queue_.top().cost <= level + kCostTol) {
        Walk w = queue_.top();
        queue_.pop();
        expand(w);
        if (w.loop_free) finished.push_back(std::move(w));
      }
      std::sort(finished.begin(), finished.end(),
                [](const Walk& a, const Walk& b) { return a.nodes < b.nodes; });
      for (Walk& w : finished) {
        if (out.size() >= max_paths_) break;
        out.push_back(
            Path{src_, tree_.target, std::move(w.links), d_src_ + w.cost});
      }
    }
    return out;
  }

 private:
  // Appends the tree descent from the walk's last node to the target.
  // Expects marked_ to flag exactly the walk's prefix nodes; returns whether
  // the descent avoids them (the walk is then loop-free).
  bool descend(Walk& w) {
    bool ok = true;
    NodeId v = w.nodes.back();
    while (v != tree_.target) {
      const LinkId e = tree_.parent_link[v];
      w.links.push_back(e);
      v = topo_.link(e).dst;
      if (marked_[v]) ok = false;
      w.nodes.push_back(v);
    }
    return ok;
  }

  void push_initial() {
    Walk w;
    w.descent_begin = 0;
    w.nodes.push_back(src_);
    marked_[src_] = 1;
    w.loop_free = descend(w);
    marked_[src_] = 0;
    queue_.push(std::move(w));
  }

  void expand(const Walk& w) {
    std::vector<NodeId> marks;
    marks.reserve(w.nodes.size());
    for (uint32_t i = 0; i < w.descent_begin; ++i) {
      marked_[w.nodes[i]] = 1;
      marks.push_back(w.nodes[i]);
    }
    for (uint32_t i = w.descent_begin; i < w.nodes.size(); ++i) {
      const NodeId x = w.nodes[i];
      if (marked_[x]) break;  // the walk revisits x; later attachments are dead
      if (x == tree_.target) break;
      marked_[x] = 1;
      marks.push_back(x);
      for (LinkId e : topo_.out_links(x)) {
        if (tree_.parent_link[x] == e) continue;  // tree arc, not a sidetrack
        const Link& l = topo_.link(e);
        const double c =
            std::max(0.0, tree_.dist[l.dst] - tree_.dist[x] + l.weight);
        const double cost = w.cost + c;
        if (std::isfinite(theta_) && cost > theta_ * d_src_ + kCostTol) continue;
        if (d_src_ + cost > length_bound_) continue;
        if (marked_[l.dst]) continue;  // child's prefix would revisit l.dst
        Walk child;
        child.cost = cost;
        child.nodes.assign(w.nodes.begin(), w.nodes.begin() + i + 1);
        child.links.assign(w.links.begin(), w.links.begin() + i);
        child.nodes.push_back(l.dst);
        child.links.push_back(e);
        child.descent_begin = i + 1;
        marked_[l.dst] = 1;
        child.loop_free = descend(child);
        marked_[l.dst] = 0;
        queue_.push(std::move(child));
      }
    }
    for (NodeId v : marks) marked_[v] = 0;
  }

  const Topology& topo_;
  const ShortestPathTree& tree_;
  NodeId src_;
  double theta_;
  size_t max_paths_;
  double d_src_ = 0;
  double length_bound_ = 0;
  std::vector<char> marked_;
  std::priority_queue<Walk, std::vector<Walk>, WalkOrder> queue_;
};

}  // namespace

std::vector<NodeId> Path::nodes(const Topology& t) const {
  std::vector<NodeId> seq{src};
  for (LinkId e : links) seq.push_back(t.link(e).dst);
  return seq;
}

std::optional<Path> path_from_sidetracks(const Topology& t,
                                         const ShortestPathTree& tree, NodeId src,
                                         const std::vector<LinkId>& sidetracks) {
  // At most one set member may leave any node.
  std::vector<LinkId> at_node(t.node_count(), kNoLink);
  for (LinkId e : sidetracks) {
    const Link& l = t.link(e);
    if (tree.parent_link[l.src] == e) fail("sidetrack set contains a tree arc");
    if (at_node[l.src] != kNoLink) return std::nullopt;
    at_node[l.src] = e;
  }

  Path p;
  p.src = src;
  p.dst = tree.target;
  std::vector<char> visited(t.node_count(), 0);
  size_t consumed = 0;
  NodeId v = src;
  while (true) {
    if (visited[v]) return std::nullopt;
    visited[v] = 1;
    if (v == tree.target) break;
    LinkId e = at_node[v];
    if (e != kNoLink) {
      at_node[v] = kNoLink;
      ++consumed;
    } else {
      e = tree.parent_link[v];
      if (e == kNoLink) return std::nullopt;  // unreachable
    }
    p.links.push_back(e);
    p.length += t.link(e).weight;
    v = t.link(e).dst;
  }
  if (consumed != sidetracks.size()) return std::nullopt;
  return p;
}

std::vector<Path> enumerate_paths(const Topology& t, const ShortestPathTree& tree,
                                  NodeId src, double theta, size_t max_paths) {
  if (theta < 0) fail("theta must be non-negative");
  if (max_paths == 0) fail("max_paths must be positive");
  if (src == tree.target) fail("enumerate_paths: source equals destination");
  return Enumerator(t, tree, src, theta, max_paths).run();
}

std::vector<Path> enumerate_paths(const Topology& t, NodeId src, NodeId dst,
                                  double theta, size_t max_paths) {
  if (src == dst) fail("enumerate_paths: source equals destination");
  const ShortestPathTree tree = shortest_tree(t, dst);
  return enumerate_paths(t, tree, src, theta, max_paths);
}

namespace {

std::vector<std::vector<Path>> candidates_impl(
    const Topology& t, const std::vector<std::pair<NodeId, NodeId>>& flows,
    double theta, size_t max_paths, bool parallel) {
  // One tree per distinct destination.
  std::vector<NodeId> dsts;
  dsts.reserve(flows.size());
  for (const auto& f : flows) dsts.push_back(f.second);
  std::sort(dsts.begin(), dsts.end());
  dsts.erase(std::unique(dsts.begin(), dsts.end()), dsts.end());

  std::vector<ShortestPathTree> trees =
      parallel ? shortest_trees(t, dsts) : shortest_trees_serial(t, dsts);
  auto tree_of = [&](NodeId dst) -> const ShortestPathTree& {
    return trees[std::lower_bound(dsts.begin(), dsts.end(), dst) - dsts.begin()];
  };

  std::vector<std::vector<Path>> out(flows.size());
  if (parallel) {
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < static_cast<long>(flows.size()); ++i) {
      try {
        out[i] = enumerate_paths(t, tree_of(flows[i].second), flows[i].first,
                                 theta, max_paths);
      } catch (...) {
#pragma omp critical
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);
  } else {
    for (size_t i = 0; i < flows.size(); ++i) {
      out[i] = enumerate_paths(t, tree_of(flows[i].second), flows[i].first, theta,
                               max_paths);
    }
  }
  return out;
}

}  // namespace

std::vector<std::vector<Path>> candidate_paths(
    const Topology& t, const std::vector<std::pair<NodeId, NodeId>>& flows,
    double theta, size_t max_paths) {
  return candidates_impl(t, flows, theta, max_paths, true);
}

std::vector<std::vector<Path>> candidate_paths_serial(
    const Topology& t, const std::vector<std::pair<NodeId, NodeId>>& flows,
    double theta, size_t max_paths) {
  return candidates_impl(t, flows, theta, max_paths, false);
}

}  // namespace kpath
