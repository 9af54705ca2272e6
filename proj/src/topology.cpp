#include "kpath/topology.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "kpath/error.hpp"
#include "kpath/rng.hpp"

namespace kpath {

namespace {

uint64_t cable_key(NodeId u, NodeId v) {
  const uint64_t a = std::min(u, v);
  const uint64_t b = std::max(u, v);
  return (a << 32) | b;
}

std::string fmt_double(double x) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace

NodeId Topology::add_node(const std::string& name) {
  if (name.empty()) fail("node name must not be empty");
  if (by_name_.count(name)) fail("duplicate node name '" + name + "'");
  const NodeId id = static_cast<NodeId>(names_.size());
  names_.push_back(name);
  by_name_.emplace(name, id);
  out_.emplace_back();
  in_.emplace_back();
  return id;
}

LinkId Topology::add_cable(NodeId u, NodeId v, double weight, double capacity) {
  if (u >= names_.size() || v >= names_.size()) fail("cable references unknown node");
  if (u == v) fail("self-loop cable at node '" + names_[u] + "'");
  if (weight <= 0) fail("non-positive link weight");
  if (capacity <= 0) fail("non-positive link capacity");
  if (!cable_seen_.emplace(cable_key(u, v), true).second) {
    fail("duplicate cable between '" + names_[u] + "' and '" + names_[v] + "'");
  }
  const LinkId id = static_cast<LinkId>(links_.size());
  links_.push_back({id, u, v, weight, capacity});
  links_.push_back({id + 1, v, u, weight, capacity});
  out_[u].push_back(id);
  in_[v].push_back(id);
  out_[v].push_back(id + 1);
  in_[u].push_back(id + 1);
  return id;
}

void Topology::set_endpoints(std::vector<NodeId> endpoints) {
  for (NodeId v : endpoints) {
    if (v >= names_.size()) fail("endpoint references unknown node");
  }
  std::sort(endpoints.begin(), endpoints.end());
  endpoints.erase(std::unique(endpoints.begin(), endpoints.end()), endpoints.end());
  if (endpoints.empty()) fail("endpoint set must not be empty");
  endpoints_ = std::move(endpoints);
}

NodeId Topology::node_by_name(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) fail("unknown node '" + name + "'");
  return it->second;
}

const std::vector<NodeId>& Topology::endpoints() const {
  if (!endpoints_.empty()) return endpoints_;
  if (all_nodes_cache_.size() != names_.size()) {
    all_nodes_cache_.resize(names_.size());
    std::iota(all_nodes_cache_.begin(), all_nodes_cache_.end(), NodeId{0});
  }
  return all_nodes_cache_;
}

bool Topology::endpoints_are_all_nodes() const {
  return endpoints_.empty() || endpoints_.size() == names_.size();
}

bool Topology::strongly_connected() const {
  if (names_.empty()) return true;
  auto reach = [&](bool forward) {
    std::vector<char> seen(names_.size(), 0);
    std::vector<NodeId> stack{0};
    seen[0] = 1;
    size_t count = 1;
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      for (LinkId e : forward ? out_[v] : in_[v]) {
        const NodeId w = forward ? links_[e].dst : links_[e].src;
        if (!seen[w]) {
          seen[w] = 1;
          ++count;
          stack.push_back(w);
        }
      }
    }
    return count == names_.size();
  };
  return reach(true) && reach(false);
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

Topology make_xgft(int levels, const std::vector<int>& children,
                   const std::vector<int>& parents) {
  if (levels <= 0) fail("xgft: levels must be positive");
  const size_t h = static_cast<size_t>(levels);
  if (children.size() != h || parents.size() != h) {
    fail("xgft: children and parents must each have one entry per level");
  }
  for (int m : children)
    if (m <= 0) fail("xgft: children entries must be positive");
  for (int w : parents)
    if (w <= 0) fail("xgft: parents entries must be positive");

  // A level-i node is identified by h digits: the first h-i drawn from the
  // children radices m_1..m_{h-i}, the rest from the parents radices
  // w_{h-i+1}..w_h. A node's parents are obtained by replacing digit h-i
  // (the last children digit) with each value of the parents radix w_{h-i}.
  auto radix = [&](size_t level, size_t j) {  // digit j in 0..h-1
    return j < h - level ? static_cast<size_t>(children[j])
                         : static_cast<size_t>(parents[j]);
  };

  std::vector<size_t> level_count(h + 1, 1);
  for (size_t i = 0; i <= h; ++i) {
    for (size_t j = 0; j < h; ++j) level_count[i] *= radix(i, j);
  }

  Topology t;
  std::vector<size_t> level_offset(h + 1, 0);
  for (size_t i = 0; i <= h; ++i) {
    level_offset[i] = t.node_count();
    for (size_t idx = 0; idx < level_count[i]; ++idx) {
      t.add_node("L" + std::to_string(i) + "_" + std::to_string(idx));
    }
  }

  // Digit j is most significant for j = 0.
  auto encode = [&](size_t level, const std::vector<size_t>& dig) {
    size_t idx = 0;
    for (size_t j = 0; j < h; ++j) idx = idx * radix(level, j) + dig[j];
    return idx;
  };

  for (size_t i = 0; i < h; ++i) {
    std::vector<size_t> dig(h, 0);
    for (size_t idx = 0; idx < level_count[i]; ++idx) {
      // Decode idx into digits for level i.
      size_t rem = idx;
      for (size_t j = h; j-- > 0;) {
        const size_t r = radix(i, j);
        dig[j] = rem % r;
        rem /= r;
      }
      const size_t pos = h - i - 1;  // digit replaced on the way up
      std::vector<size_t> pdig = dig;
      for (size_t b = 0; b < static_cast<size_t>(parents[pos]); ++b) {
        pdig[pos] = b;
        const size_t pidx = encode(i + 1, pdig);
        t.add_cable(static_cast<NodeId>(level_offset[i] + idx),
                    static_cast<NodeId>(level_offset[i + 1] + pidx));
      }
    }
  }

  std::vector<NodeId> leaves(level_count[0]);
  std::iota(leaves.begin(), leaves.end(), NodeId{0});
  t.set_endpoints(std::move(leaves));
  return t;
}

Topology make_irregular(int n_nodes, double avg_degree, uint64_t seed) {
  if (n_nodes < 3) fail("irregular: need at least 3 nodes");
  if (avg_degree < 2.0) fail("irregular: average degree must be at least 2");
  const size_t n = static_cast<size_t>(n_nodes);
  const size_t target = static_cast<size_t>(std::llround(n * avg_degree / 2.0));
  const size_t max_cables = n * (n - 1) / 2;
  if (target > max_cables) {
    fail("irregular: requested degree exceeds simple-graph limit");
  }

  Topology t;
  for (size_t i = 0; i < n; ++i) t.add_node("n" + std::to_string(i));

  Rng rng(seed);
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  rng.shuffle(order);

  std::vector<std::pair<NodeId, NodeId>> cables;
  std::unordered_map<uint64_t, bool> used;
  auto try_add = [&](NodeId u, NodeId v) {
    if (u == v) return false;
    const uint64_t key =
        (static_cast<uint64_t>(std::min(u, v)) << 32) | std::max(u, v);
    if (used.count(key)) return false;
    used.emplace(key, true);
    cables.emplace_back(u, v);
    return true;
  };

  // Random spanning tree: attach each node to a random earlier one.
  for (size_t i = 1; i < n; ++i) {
    try_add(order[i], order[rng.bounded(i)]);
  }
  while (cables.size() < target) {
    const NodeId u = static_cast<NodeId>(rng.bounded(n));
    const NodeId v = static_cast<NodeId>(rng.bounded(n));
    try_add(u, v);
  }

  for (auto [u, v] : cables) t.add_cable(u, v);
  return t;
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

Topology load_topology(const std::string& text) {
  Topology t;
  std::vector<NodeId> endpoints;
  size_t line_no = 0;
  size_t pos = 0;
  bool saw_link_or_endpoint = false;

  auto parse_positive = [&](const std::string& tok, const char* what) {
    double x = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
      fail("line " + std::to_string(line_no) + ": bad " + what + " '" + tok + "'");
    }
    if (x <= 0) {
      fail("line " + std::to_string(line_no) + ": non-positive " + what);
    }
    return x;
  };

  while (pos <= text.size()) {
    const size_t eol = text.find('\n', pos);
    std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos
                                                                 : eol - pos);
    pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    if (const size_t hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    while (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;

    std::vector<std::string> args;
    for (std::string a; ls >> a;) args.push_back(a);

    try {
      if (kw == "node") {
        if (args.size() != 1) fail("expected: node <name>");
        if (saw_link_or_endpoint) fail("node line after link/endpoint section");
        t.add_node(args[0]);
      } else if (kw == "link") {
        if (args.size() != 4) fail("expected: link <src> <dst> <weight> <capacity>");
        saw_link_or_endpoint = true;
        const NodeId u = t.node_by_name(args[0]);
        const NodeId v = t.node_by_name(args[1]);
        t.add_cable(u, v, parse_positive(args[2], "weight"),
                    parse_positive(args[3], "capacity"));
      } else if (kw == "endpoint") {
        if (args.size() != 1) fail("expected: endpoint <name>");
        saw_link_or_endpoint = true;
        endpoints.push_back(t.node_by_name(args[0]));
      } else {
        fail("unknown keyword '" + kw + "'");
      }
    } catch (const Error& e) {
      const std::string msg = e.what();
      if (msg.rfind("line ", 0) == 0) throw;
      fail("line " + std::to_string(line_no) + ": " + msg);
    }
  }

  if (t.node_count() == 0) fail("topology file has no node lines");
  if (!endpoints.empty()) t.set_endpoints(std::move(endpoints));
  return t;
}

std::string save_topology(const Topology& t) {
  std::string out;
  for (NodeId v = 0; v < t.node_count(); ++v) {
    out += "node " + t.node_name(v) + "\n";
  }
  for (const Link& e : t.links()) {
    if (e.id % 2 != 0) continue;  // reverse half of a cable
    out += "link " + t.node_name(e.src) + " " + t.node_name(e.dst) + " " +
           fmt_double(e.weight) + " " + fmt_double(e.capacity) + "\n";
  }
  if (!t.endpoints_are_all_nodes()) {
    for (NodeId v : t.endpoints()) out += "endpoint " + t.node_name(v) + "\n";
  }
  return out;
}

Topology load_topology_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open topology file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return load_topology(ss.str());
  } catch (const Error& e) {
    fail(path + ": " + e.what());
  }
}

}  // namespace kpath
