#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace kpath {

using NodeId = uint32_t;
using LinkId = uint32_t;

inline constexpr LinkId kNoLink = UINT32_MAX;

/// One directed link. An undirected cable is stored as two directed links with
/// equal weight and capacity at consecutive ids (forward first).
struct Link {
  LinkId id;
  NodeId src;
  NodeId dst;
  double weight;    // routing metric, > 0
  double capacity;  // traffic units per time, > 0
};

/// Directed-link graph with named nodes and a designated endpoint set (the
/// nodes that may send or receive traffic). Immutable once built; safe to
/// share read-only across threads.
class Topology {
 public:
  NodeId add_node(const std::string& name);

  /// Adds the directed pair u->v, v->u. Returns the id of the forward link.
  LinkId add_cable(NodeId u, NodeId v, double weight = 1.0, double capacity = 1.0);

  /// Restricts the endpoint set. Ids are deduplicated and kept sorted.
  void set_endpoints(std::vector<NodeId> endpoints);

  size_t node_count() const { return names_.size(); }
  size_t link_count() const { return links_.size(); }
  size_t cable_count() const { return links_.size() / 2; }

  const std::string& node_name(NodeId v) const { return names_[v]; }
  bool has_node(const std::string& name) const { return by_name_.count(name) != 0; }
  NodeId node_by_name(const std::string& name) const;  // throws Error if absent

  const Link& link(LinkId e) const { return links_[e]; }
  const std::vector<Link>& links() const { return links_; }
  const std::vector<LinkId>& out_links(NodeId v) const { return out_[v]; }
  const std::vector<LinkId>& in_links(NodeId v) const { return in_[v]; }

  /// Endpoints in ascending id order; defaults to all nodes.
  const std::vector<NodeId>& endpoints() const;
  bool endpoints_are_all_nodes() const;

  bool strongly_connected() const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, NodeId> by_name_;
  std::vector<Link> links_;
  std::vector<std::vector<LinkId>> out_;
  std::vector<std::vector<LinkId>> in_;
  std::unordered_map<uint64_t, bool> cable_seen_;  // undirected pair key
  std::vector<NodeId> endpoints_;
  mutable std::vector<NodeId> all_nodes_cache_;
};

/// Extended generalized fat tree XGFT(h; m_1..m_h; w_1..w_h).
/// Level-0 nodes are the leaves (named L0_*) and form the endpoint set;
/// leaves = prod(m_i), top-level switches = prod(w_i). Unit weights and
/// capacities.
Topology make_xgft(int levels, const std::vector<int>& children,
                   const std::vector<int>& parents);

/// Connected seeded random graph with n*avg_degree/2 cables (spanning tree
/// first, then random extra cables). Unit weights and capacities; every node
/// is an endpoint.
Topology make_irregular(int n_nodes, double avg_degree, uint64_t seed);

/// Plain-text topology format: `node <name>` lines, `link <src> <dst> <weight>
/// <capacity>` lines (one undirected cable each), optional `endpoint <name>`
/// lines. `#` starts a comment. load(save(t)) == t and save is canonical.
Topology load_topology(const std::string& text);
std::string save_topology(const Topology& t);

Topology load_topology_file(const std::string& path);

}  // namespace kpath
